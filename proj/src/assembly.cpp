#include "yamabe/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace yamabe {

RadialGrid build_grid(const ModelManifold& m, double r_inner, double r_max, int N,
                      std::optional<BcInner> requested_inner) {
  if (!(r_inner >= 0.0)) throw ConfigError("build_grid: r_inner must be >= 0");
  if (!(r_max > r_inner)) throw ConfigError("build_grid: r_max must exceed r_inner");
  if (N < 1) throw ConfigError("build_grid: N must be >= 1");
  BcInner bc = (r_inner == 0.0 && m.r_pole) ? BcInner::pole_neumann : BcInner::dirichlet;
  if (requested_inner) {
    if (*requested_inner == BcInner::pole_neumann && r_inner > 0.0)
      throw ConfigError("build_grid: pole_neumann requires r_inner = 0");
    if (*requested_inner == BcInner::pole_neumann && !m.r_pole)
      throw ConfigError("build_grid: pole_neumann requires a model with a smooth pole");
    bc = *requested_inner;
  }
  RadialGrid g;
  g.r_inner = r_inner;
  g.r_max = r_max;
  g.n_interior = N;
  g.bc_inner = bc;
  g.h = (r_max - r_inner) / (N + 1);
  return g;
}

namespace {

OperatorAssembly assemble_impl(const ModelManifold& m, const RadialGrid& g, const WeightSpec& w,
                               bool h12_form) {
  OperatorAssembly a;
  a.grid = g;
  a.n = m.n;
  a.a_n = h12_form ? 1.0 : m.a_n();
  a.p_crit = m.p_crit();
  a.model_label = m.label;
  a.weight_spec = w;

  const int nd = g.dof();
  const int first = g.first_active();
  a.stiffness.d.assign(static_cast<size_t>(nd), 0.0);
  a.stiffness.e.assign(static_cast<size_t>(nd - 1), 0.0);
  a.elem_coef.assign(static_cast<size_t>(g.n_interior + 1), 0.0);
  a.potential.assign(static_cast<size_t>(nd), 0.0);
  a.mass.assign(static_cast<size_t>(nd), 0.0);
  a.sigma_node.assign(static_cast<size_t>(nd), 0.0);
  a.rho_node.assign(static_cast<size_t>(nd), 0.0);

  auto theta = [&](double r) { return unit_sphere_area(m.n) * std::pow(m.warp.f(r), m.n - 1); };

  // stiffness: element [r_k, r_{k+1}], midpoint quadrature of theta
  for (int k = 0; k <= g.n_interior; ++k) {
    double rm = g.node_r(k) + 0.5 * g.h;
    double fm = m.warp.f(rm);
    if (!(fm > 0.0) || !std::isfinite(fm))
      throw AssemblyError("assemble: f <= 0 at element midpoint r = " + std::to_string(rm) +
                          " (element " + std::to_string(k) + ")");
    double c = a.a_n * theta(rm) / g.h;
    a.elem_coef[static_cast<size_t>(k)] = c;
    int i = k - first, j = k + 1 - first;
    if (i >= 0 && i < nd) a.stiffness.d[static_cast<size_t>(i)] += c;
    if (j >= 0 && j < nd) a.stiffness.d[static_cast<size_t>(j)] += c;
    if (i >= 0 && j < nd) a.stiffness.e[static_cast<size_t>(i)] -= c;
  }

  // lumped nodal weights and potential
  double sig_lo = std::numeric_limits<double>::infinity();
  double sig_hi = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < nd; ++j) {
    double r = g.active_r(j);
    bool pole_node = (g.bc_inner == BcInner::pole_neumann && j == 0);
    double width = pole_node ? 0.5 * g.h : g.h;
    double th = theta(r);
    if (!pole_node) {
      double f = m.warp.f(r);
      if (!(f > 0.0) || !std::isfinite(f))
        throw AssemblyError("assemble: f <= 0 at node " + std::to_string(j + first) +
                            " (r = " + std::to_string(r) + ")");
    }
    double sig = h12_form ? 1.0 : scalar_curvature(m, r);
    if (!std::isfinite(sig))
      throw AssemblyError("assemble: sigma not finite at node " + std::to_string(j + first) +
                          " (r = " + std::to_string(r) + ")");
    a.mass[static_cast<size_t>(j)] = width * th;
    a.potential[static_cast<size_t>(j)] = width * th * sig;
    a.sigma_node[static_cast<size_t>(j)] = sig;
    a.rho_node[static_cast<size_t>(j)] = w.rho(r);
    sig_lo = std::min(sig_lo, sig);
    sig_hi = std::max(sig_hi, sig);
  }
  a.sigma_inf = sig_lo;
  a.sigma_sup = sig_hi;
  return a;
}

}  // namespace

OperatorAssembly assemble(const ModelManifold& m, const RadialGrid& g, const WeightSpec& w) {
  return assemble_impl(m, g, w, false);
}

OperatorAssembly assemble_h12_form(const ModelManifold& m, const RadialGrid& g, const WeightSpec& w) {
  return assemble_impl(m, g, w, true);
}

void OperatorAssembly::check_dim(const DiscreteField& v, const char* who) const {
  if (v.size() != dof())
    throw std::invalid_argument(std::string(who) + ": field has " + std::to_string(v.size()) +
                                " values, grid has " + std::to_string(dof()) + " dof");
}

void OperatorAssembly::check_p(double p, const char* who) const {
  if (!(p >= 2.0 && p <= p_crit + 1e-12))
    throw std::invalid_argument(std::string(who) + ": p must lie in [2, p_crit]");
}

double OperatorAssembly::energy(const std::vector<double>& v) const {
  if (static_cast<int>(v.size()) != dof())
    throw std::invalid_argument("energy: field has " + std::to_string(v.size()) +
                                " values, grid has " + std::to_string(dof()) + " dof");
  const int first = grid.first_active();
  const int nd = dof();
  double s = 0.0;
  for (int k = 0; k <= grid.n_interior; ++k) {
    int i = k - first, j = k + 1 - first;
    double left = (i >= 0 && i < nd) ? v[static_cast<size_t>(i)] : 0.0;
    double right = (j >= 0 && j < nd) ? v[static_cast<size_t>(j)] : 0.0;
    double d = right - left;
    s += elem_coef[static_cast<size_t>(k)] * d * d;
  }
  for (int i = 0; i < nd; ++i) s += potential[static_cast<size_t>(i)] * v[static_cast<size_t>(i)] * v[static_cast<size_t>(i)];
  return s;
}

double OperatorAssembly::energy(const DiscreteField& v) const {
  check_dim(v, "energy");
  return energy(v.values);
}

double OperatorAssembly::mass_form(const DiscreteField& v) const {
  check_dim(v, "mass_form");
  double s = 0.0;
  for (int i = 0; i < dof(); ++i) s += mass[static_cast<size_t>(i)] * v[i] * v[i];
  return s;
}

std::vector<double> OperatorAssembly::weighted_mass(double alpha, double p) const {
  check_p(p, "weighted_mass");
  if (alpha < 0.0) throw std::invalid_argument("weighted_mass: alpha must be >= 0");
  std::vector<double> wq(static_cast<size_t>(dof()));
  for (int i = 0; i < dof(); ++i) {
    double rpow = (alpha == 0.0) ? 1.0 : std::pow(rho_node[static_cast<size_t>(i)], alpha * p);
    wq[static_cast<size_t>(i)] = mass[static_cast<size_t>(i)] * rpow;
  }
  return wq;
}

double OperatorAssembly::weighted_p_norm(const DiscreteField& v, double alpha, double p) const {
  check_dim(v, "weighted_p_norm");
  check_p(p, "weighted_p_norm");
  if (alpha < 0.0) throw std::invalid_argument("weighted_p_norm: alpha must be >= 0");
  double s = 0.0;
  if (p == 2.0 && alpha == 0.0) {
    for (int i = 0; i < dof(); ++i) s += mass[static_cast<size_t>(i)] * v[i] * v[i];
    return std::sqrt(s);
  }
  for (int i = 0; i < dof(); ++i) {
    double rpow = (alpha == 0.0) ? 1.0 : std::pow(rho_node[static_cast<size_t>(i)], alpha * p);
    s += mass[static_cast<size_t>(i)] * rpow * std::pow(std::abs(v[i]), p);
  }
  return std::pow(s, 1.0 / p);
}

double OperatorAssembly::quotient(const DiscreteField& v, double alpha, double p) const {
  double nr = weighted_p_norm(v, alpha, p);
  if (!(nr > 0.0)) throw std::invalid_argument("quotient: zero field");
  return energy(v) / (nr * nr);
}

SymTridiag OperatorAssembly::full_operator() const {
  SymTridiag k = stiffness;
  for (int i = 0; i < dof(); ++i) k.d[static_cast<size_t>(i)] += potential[static_cast<size_t>(i)];
  return k;
}

}  // namespace yamabe
