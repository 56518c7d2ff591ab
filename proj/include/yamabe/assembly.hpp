#pragma once

#include <string>
#include <vector>

#include "yamabe/geometry.hpp"
#include "yamabe/grid.hpp"
#include "yamabe/tridiag.hpp"

namespace yamabe {

struct AssemblyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SolverError : std::runtime_error {
  double best_value = 0.0;
  double best_residual = 0.0;
  int iterations = 0;
  SolverError(const std::string& what, double value, double residual, int iters)
      : std::runtime_error(what), best_value(value), best_residual(residual), iterations(iters) {}
};

// Discrete quadratic forms on a radial grid:
//   stiffness A(v,v) ~ a_n int theta v'^2   (P1 elements, midpoint theta)
//   potential S(v,v) ~ int theta sigma v^2  (nodal lumping)
//   mass      M(v,v) ~ int theta v^2        (same lumping)
// plus nodal weights for the weighted L^p masses int theta rho^{alpha p} |v|^p.
// At a Neumann pole the node carries zero lumped weight (theta(0) = 0), which
// slaves the pole value to its neighbour through the stiffness row.
struct OperatorAssembly {
  RadialGrid grid;
  int n = 3;
  double a_n = 8.0;
  double p_crit = 6.0;
  std::string model_label;
  WeightSpec weight_spec;

  SymTridiag stiffness;            // A
  std::vector<double> elem_coef;   // per-element a_n * theta(mid) / h, for the stable energy
  std::vector<double> potential;   // diagonal of S: W_i * sigma_i
  std::vector<double> mass;        // diagonal of M: W_i
  std::vector<double> sigma_node;  // sigma at active nodes
  std::vector<double> rho_node;    // rho at active nodes
  double sigma_inf = 0.0;
  double sigma_sup = 0.0;

  int dof() const { return grid.dof(); }

  // A(v,v) + S(v,v); the stiffness part is summed over element differences,
  // which avoids the cancellation of the tridiagonal quadratic form on
  // near-constant fields
  double energy(const DiscreteField& v) const;
  double energy(const std::vector<double>& v) const;
  // M(v,v)
  double mass_form(const DiscreteField& v) const;
  // nodal weights W_i rho_i^{alpha p}
  std::vector<double> weighted_mass(double alpha, double p) const;
  // (sum W_i rho_i^{alpha p} |v_i|^p)^{1/p}
  double weighted_p_norm(const DiscreteField& v, double alpha, double p) const;
  // energy(v) / weighted_p_norm(v)^2
  double quotient(const DiscreteField& v, double alpha, double p) const;

  // K = A + S as a single tridiagonal form.
  SymTridiag full_operator() const;

  void check_dim(const DiscreteField& v, const char* who) const;
  void check_p(double p, const char* who) const;
};

OperatorAssembly assemble(const ModelManifold& m, const RadialGrid& g, const WeightSpec& w);

// Same grid and quadrature, but the H_1^2 inner-product form: unit-coefficient
// stiffness and unit potential, so energy(v) = ||dv||^2 + ||v||^2.
OperatorAssembly assemble_h12_form(const ModelManifold& m, const RadialGrid& g, const WeightSpec& w);

}  // namespace yamabe
