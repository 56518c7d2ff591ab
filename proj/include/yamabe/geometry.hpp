#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace yamabe {

// Radial warp profile f(r) of a rotationally symmetric metric
// g = dr^2 + f(r)^2 g_{S^{n-1}}, together with analytic derivatives.
// Pole-anchored profiles satisfy f(0) = 0, f'(0) = 1.
enum class WarpKind { sphere, flat, hyperbolic, cylinder_bump, custom };

struct WarpProfile {
  WarpKind kind = WarpKind::custom;
  std::function<double(double)> f;
  std::function<double(double)> f_prime;
  std::function<double(double)> f_second;
  std::map<std::string, double> params;
};

WarpProfile warp_sphere();
WarpProfile warp_flat();
WarpProfile warp_hyperbolic();
// f(r) = r on [0,1], C^2 quintic blend on [1, 1+blend_width], f = c_inf after.
WarpProfile warp_cylinder_bump(double c_inf, double blend_width = 1.0);
WarpProfile warp_custom(std::function<double(double)> f,
                        std::function<double(double)> f_prime,
                        std::function<double(double)> f_second);

struct ModelManifold {
  int n = 3;                 // dimension, n >= 3
  WarpProfile warp;
  bool r_pole = true;        // whether r = 0 is a smooth pole
  std::string label;

  ModelManifold(int n_, WarpProfile warp_, bool r_pole_, std::string label_);

  double a_n() const { return 4.0 * (n - 1) / (n - 2); }
  double p_crit() const { return 2.0 * n / (n - 2); }
};

// Radial weight rho(r) = exp(-r_s(r)) with the smooth radius
// r_s(r) = sqrt(1 + r^2), so |r_s(r) - r| <= xi = 1 for all r >= 0.
struct WeightSpec {
  double xi = 1.0;
  double smooth_radius(double r) const { return std::sqrt(1.0 + r * r); }
  double rho(double r) const { return std::exp(-smooth_radius(r)); }
};

// sigma(r) = -2(n-1) f''/f + (n-1)(n-2)(1 - f'^2)/f^2.
// At a smooth pole the r -> 0 limit is taken by Richardson extrapolation.
double scalar_curvature(const ModelManifold& m, double r);

// theta(r) = |S^{n-1}| f(r)^{n-1}.
double volume_density(const ModelManifold& m, double r);

// rho(r)^alpha; exactly 1 for alpha = 0.
double weight(const WeightSpec& w, double r, double alpha);

// n(n-1) omega_n^{2/n}, omega_n the volume of the unit round n-sphere.
double sphere_yamabe_constant(int n);

// Constant scalar curvature of the product model spaces:
// -k(k+1) c^2 + (n-k-1)(n-k-2), c in [-1,1], 0 <= k <= n-2.
double model_space_sigma(int n, int k, double c);

// (1 + lambda^2 r^2)^{-(n-2)/2}, the extremal profile of the flat quotient.
double aubin_talenti_bubble(int n, double lambda, double r);

double unit_sphere_area(int n);    // |S^{n-1}|
double unit_sphere_volume(int n);  // omega_n = vol(S^n)

// Model registry. Labels: "sphere3", "flat3", "hyperbolic3",
// "cylbump3", "cylbump3:c=0.5,blend=1".
ModelManifold make_model(const std::string& label);
std::vector<std::string> model_registry_labels();

}  // namespace yamabe
