#pragma once

#include <cstdint>
#include <optional>

#include "yamabe/assembly.hpp"

namespace yamabe {

struct PreconditionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class MinimizeInit { warm_start, gaussian_bump, constant };

struct MinimizeConfig {
  int max_iter = 200000;
  double q_rel_tol = 1e-13;
  double residual_tol = 1e-8;
  double armijo_backtrack = 0.5;
  double armijo_c1 = 1e-4;
  MinimizeInit init = MinimizeInit::gaussian_bump;
  std::uint64_t rng_seed = 0;

  void validate() const {
    if (!(q_rel_tol > 0.0) || !(residual_tol > 0.0))
      throw std::invalid_argument("MinimizeConfig: tolerances must be positive");
    if (!(armijo_backtrack > 0.0 && armijo_backtrack < 1.0))
      throw std::invalid_argument("MinimizeConfig: backtrack factor must lie in (0,1)");
    if (max_iter < 1) throw std::invalid_argument("MinimizeConfig: max_iter must be >= 1");
  }
};

// A converged minimizer of the weighted quotient, renormalized so that
// ||rho^alpha v||_p = 1 and positive at all active nodes.
struct Extremal {
  DiscreteField v;
  double Q = 0.0;
  double alpha = 0.0;
  double p = 2.0;
  double p_crit = 6.0;
  double residual = 0.0;
  int iterations = 0;
  double sup_v = 0.0;
  int argmax_node = 0;   // active-node index, smallest on ties
  double argmax_r = 0.0;
  double norm_pcrit_unweighted = 0.0;
  double mu = 0.0;                 // mu_bottom of the assembly, checked > 0
  std::vector<double> q_history;   // accepted Q values, nonincreasing
};

// Minimizes energy(v) / ||rho^alpha v||_p^2. The primary iteration is the
// normalized inverse fixed point v <- normalize(|K^{-1}(W_{alpha,p} |v|^{p-2} v)|)
// with a projected-gradient Armijo fallback whenever a fixed-point step would
// increase the quotient. Deterministic for a fixed config.
Extremal minimize_Q(const OperatorAssembly& a, double alpha, double p, const MinimizeConfig& cfg,
                    const std::optional<DiscreteField>& warm = std::nullopt);

// ||(A+S)v - Q W_{alpha,p} v^{p-1}|| in the M^{-1} dual norm.
double el_residual(const OperatorAssembly& a, const DiscreteField& v, double Q,
                   double alpha, double p);

// Max-point inequality at the argmax node r*:
// Q rho^{alpha p}(r*) v(r*)^{p-2} >= sigma(r*) - tol.
bool max_point_check(const ModelManifold& m, const Extremal& e, double tol);

// True iff the extremal decays: max of v over the outermost `fraction` of the
// active nodes is <= tol * sup_v and the argmax sits outside that window.
// Vacuously true unless alpha > 0 and p < p_crit.
bool decay_check(const Extremal& e, const RadialGrid& g, double fraction, double tol);

// Euclidean gradient of the quotient at v (exposed for the consistency tests).
std::vector<double> quotient_gradient(const OperatorAssembly& a, const DiscreteField& v,
                                      double alpha, double p);

}  // namespace yamabe
