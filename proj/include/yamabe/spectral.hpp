#pragma once

#include "yamabe/assembly.hpp"

namespace yamabe {

struct SpectralResult {
  double value = 0.0;
  DiscreteField eigenfield;  // M-normalized, positive
  int iterations = 0;
  double residual = 0.0;     // ||(A+S)e - value*Me|| in the M^{-1} dual norm
};

// Smallest eigenvalue of the pencil (A+S, M) by shift-and-invert iteration.
// The initial shift sits below inf sigma so the shifted operator is positive
// definite; the shift is tightened adaptively as the Rayleigh value settles.
SpectralResult mu_bottom(const OperatorAssembly& a, double tol = 1e-9, int max_iter = 600);

struct ConsistencyReport {
  double q_p2 = 0.0;
  double mu = 0.0;
  double rel_gap = 0.0;
  bool ok = false;
};

// The p = 2, alpha = 0 minimization and mu_bottom solve the same variational
// problem by different routes; a mismatch flags a bug in one of them.
ConsistencyReport q_equals_mu_check(const OperatorAssembly& a, double tol = 1e-8);

// Best constant C = sup ||rho^alpha v||_p / ||v||_{H_1^2} on the truncated
// domain, ||v||_{H_1^2}^2 = ||dv||_2^2 + ||v||_2^2.
double embedding_constant(const OperatorAssembly& a, const ModelManifold& m,
                          double alpha, double p, double tol = 1e-9);

// M^{-1} dual norm over nodes with positive lumped weight.
double dual_residual_norm(const OperatorAssembly& a, const std::vector<double>& res);

}  // namespace yamabe
