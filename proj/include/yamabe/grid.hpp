#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "yamabe/geometry.hpp"

namespace yamabe {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class BcInner { pole_neumann, dirichlet };

// Uniform radial mesh r_k = r_inner + k*h, k = 0..N+1, h = (r_max-r_inner)/(N+1).
// The outer boundary is always Dirichlet. The inner boundary is a Neumann pole
// node when r_inner = 0 on a pole-anchored model, Dirichlet otherwise
// (exterior domains). Active nodes are the degrees of freedom.
struct RadialGrid {
  double r_inner = 0.0;
  double r_max = 1.0;
  int n_interior = 0;  // N
  BcInner bc_inner = BcInner::dirichlet;
  double h = 0.0;

  int first_active() const { return bc_inner == BcInner::pole_neumann ? 0 : 1; }
  int last_active() const { return n_interior; }
  int dof() const { return last_active() - first_active() + 1; }
  double node_r(int k) const { return r_inner + k * h; }
  double active_r(int j) const { return node_r(first_active() + j); }
};

RadialGrid build_grid(const ModelManifold& m, double r_inner, double r_max, int N,
                      std::optional<BcInner> requested_inner = std::nullopt);

// Nodal values on the active nodes of a grid.
struct DiscreteField {
  std::vector<double> values;

  DiscreteField() = default;
  explicit DiscreteField(std::vector<double> v) : values(std::move(v)) {}
  explicit DiscreteField(int n, double fill = 0.0) : values(static_cast<size_t>(n), fill) {}
  int size() const { return static_cast<int>(values.size()); }
  double& operator[](int i) { return values[static_cast<size_t>(i)]; }
  double operator[](int i) const { return values[static_cast<size_t>(i)]; }
};

}  // namespace yamabe
