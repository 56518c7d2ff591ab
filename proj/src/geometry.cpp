#include "yamabe/geometry.hpp"

#include <algorithm>
#include <cstdlib>
#include <sstream>

namespace yamabe {

WarpProfile warp_sphere() {
  WarpProfile w;
  w.kind = WarpKind::sphere;
  w.f = [](double r) { return std::sin(r); };
  w.f_prime = [](double r) { return std::cos(r); };
  w.f_second = [](double r) { return -std::sin(r); };
  return w;
}

WarpProfile warp_flat() {
  WarpProfile w;
  w.kind = WarpKind::flat;
  w.f = [](double r) { return r; };
  w.f_prime = [](double) { return 1.0; };
  w.f_second = [](double) { return 0.0; };
  return w;
}

WarpProfile warp_hyperbolic() {
  WarpProfile w;
  w.kind = WarpKind::hyperbolic;
  w.f = [](double r) { return std::sinh(r); };
  w.f_prime = [](double r) { return std::cosh(r); };
  w.f_second = [](double r) { return std::sinh(r); };
  return w;
}

namespace {

// Quintic Hermite blend on [1, 1+w]: value/slope/curvature (1, 1, 0) at the
// left end, (c, 0, 0) at the right end.
struct BlendCoeffs {
  double c_inf, w;
  double value(double r) const {
    double s = (r - 1.0) / w;
    double s2 = s * s, s3 = s2 * s, s4 = s3 * s, s5 = s4 * s;
    double h00 = 1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5;
    double h10 = s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5;
    double h01 = 10.0 * s3 - 15.0 * s4 + 6.0 * s5;
    return h00 + w * h10 + c_inf * h01;
  }
  double deriv(double r) const {
    double s = (r - 1.0) / w;
    double s2 = s * s, s3 = s2 * s, s4 = s3 * s;
    double d00 = -30.0 * s2 + 60.0 * s3 - 30.0 * s4;
    double d10 = 1.0 - 18.0 * s2 + 32.0 * s3 - 15.0 * s4;
    double d01 = 30.0 * s2 - 60.0 * s3 + 30.0 * s4;
    return (d00 + w * d10 + c_inf * d01) / w;
  }
  double second(double r) const {
    double s = (r - 1.0) / w;
    double s2 = s * s, s3 = s2 * s;
    double dd00 = -60.0 * s + 180.0 * s2 - 120.0 * s3;
    double dd10 = -36.0 * s + 96.0 * s2 - 60.0 * s3;
    double dd01 = 60.0 * s - 180.0 * s2 + 120.0 * s3;
    return (dd00 + w * dd10 + c_inf * dd01) / (w * w);
  }
};

}  // namespace

WarpProfile warp_cylinder_bump(double c_inf, double blend_width) {
  if (!(c_inf > 0.0)) throw std::invalid_argument("cylinder_bump: c_inf must be positive");
  if (!(blend_width > 0.0)) throw std::invalid_argument("cylinder_bump: blend width must be positive");
  BlendCoeffs b{c_inf, blend_width};
  WarpProfile w;
  w.kind = WarpKind::cylinder_bump;
  w.params = {{"c", c_inf}, {"blend", blend_width}};
  double r_end = 1.0 + blend_width;
  w.f = [b, r_end, c_inf](double r) {
    if (r <= 1.0) return r;
    if (r >= r_end) return c_inf;
    return b.value(r);
  };
  w.f_prime = [b, r_end](double r) {
    if (r <= 1.0) return 1.0;
    if (r >= r_end) return 0.0;
    return b.deriv(r);
  };
  w.f_second = [b, r_end](double r) {
    if (r <= 1.0 || r >= r_end) return 0.0;
    return b.second(r);
  };
  // bounded-geometry proxy: the blend must stay positive
  for (int i = 1; i < 64; ++i) {
    double r = 1.0 + blend_width * i / 64.0;
    if (!(w.f(r) > 0.0))
      throw std::invalid_argument("cylinder_bump: blend dips to f <= 0; choose a larger c_inf or width");
  }
  return w;
}

WarpProfile warp_custom(std::function<double(double)> f,
                        std::function<double(double)> f_prime,
                        std::function<double(double)> f_second) {
  WarpProfile w;
  w.kind = WarpKind::custom;
  w.f = std::move(f);
  w.f_prime = std::move(f_prime);
  w.f_second = std::move(f_second);
  return w;
}

ModelManifold::ModelManifold(int n_, WarpProfile warp_, bool r_pole_, std::string label_)
    : n(n_), warp(std::move(warp_)), r_pole(r_pole_), label(std::move(label_)) {
  if (n < 3) throw std::invalid_argument("ModelManifold: dimension must be >= 3");
  if (!warp.f || !warp.f_prime || !warp.f_second)
    throw std::invalid_argument("ModelManifold: warp profile needs f, f', f''");
}

namespace {

double sigma_at(const ModelManifold& m, double r) {
  double f = m.warp.f(r);
  double fp = m.warp.f_prime(r);
  double fpp = m.warp.f_second(r);
  double n1 = m.n - 1.0, n2 = m.n - 2.0;
  return -2.0 * n1 * fpp / f + n1 * n2 * (1.0 - fp * fp) / (f * f);
}

}  // namespace

double scalar_curvature(const ModelManifold& m, double r) {
  if (r < 0.0) throw std::domain_error("scalar_curvature: r < 0");
  const double pole_eps = 2e-3;
  if (r < pole_eps) {
    if (!m.r_pole) throw std::domain_error("scalar_curvature: pole evaluation on a model without a smooth pole");
    // Richardson extrapolation of the even function sigma(r) toward r = 0;
    // balances the cancellation in (1 - f'^2) against truncation.
    double s1 = sigma_at(m, pole_eps);
    double s2 = sigma_at(m, 2.0 * pole_eps);
    return (4.0 * s1 - s2) / 3.0;
  }
  double f = m.warp.f(r);
  if (!(f > 0.0)) throw std::domain_error("scalar_curvature: f(r) <= 0 at r = " + std::to_string(r));
  return sigma_at(m, r);
}

double unit_sphere_area(int n) {
  // |S^{n-1}| = 2 pi^{n/2} / Gamma(n/2)
  return 2.0 * std::pow(M_PI, n / 2.0) / std::tgamma(n / 2.0);
}

double unit_sphere_volume(int n) {
  // vol(S^n) = 2 pi^{(n+1)/2} / Gamma((n+1)/2)
  return 2.0 * std::pow(M_PI, (n + 1) / 2.0) / std::tgamma((n + 1) / 2.0);
}

double volume_density(const ModelManifold& m, double r) {
  if (r < 0.0) throw std::domain_error("volume_density: r < 0");
  double f = m.warp.f(r);
  return unit_sphere_area(m.n) * std::pow(f, m.n - 1);
}

double weight(const WeightSpec& w, double r, double alpha) {
  if (alpha < 0.0) throw std::invalid_argument("weight: alpha must be >= 0");
  if (alpha == 0.0) return 1.0;
  return std::exp(-alpha * w.smooth_radius(r));
}

double sphere_yamabe_constant(int n) {
  if (n < 3) throw std::invalid_argument("sphere_yamabe_constant: n must be >= 3");
  double omega_n = unit_sphere_volume(n);
  return n * (n - 1.0) * std::pow(omega_n, 2.0 / n);
}

double model_space_sigma(int n, int k, double c) {
  if (n < 3) throw std::invalid_argument("model_space_sigma: n must be >= 3");
  if (k < 0 || k > n - 2) throw std::invalid_argument("model_space_sigma: need 0 <= k <= n-2");
  if (c < -1.0 || c > 1.0) throw std::invalid_argument("model_space_sigma: need c in [-1,1]");
  return -k * (k + 1.0) * c * c + (n - k - 1.0) * (n - k - 2.0);
}

double aubin_talenti_bubble(int n, double lambda, double r) {
  if (!(lambda > 0.0)) throw std::invalid_argument("aubin_talenti_bubble: lambda must be > 0");
  return std::pow(1.0 + lambda * lambda * r * r, -(n - 2.0) / 2.0);
}

namespace {

struct ParsedLabel {
  std::string base;
  int n = 3;
  std::map<std::string, double> params;
};

ParsedLabel parse_label(const std::string& label) {
  ParsedLabel out;
  std::string head = label;
  auto colon = label.find(':');
  if (colon != std::string::npos) {
    head = label.substr(0, colon);
    std::string rest = label.substr(colon + 1);
    std::stringstream ss(rest);
    std::string item;
    while (std::getline(ss, item, ',')) {
      auto eq = item.find('=');
      if (eq == std::string::npos)
        throw std::invalid_argument("model label: malformed parameter '" + item + "'");
      out.params[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
    }
  }
  size_t digits = head.size();
  while (digits > 0 && std::isdigit(static_cast<unsigned char>(head[digits - 1]))) --digits;
  if (digits == head.size())
    throw std::invalid_argument("model label: missing dimension suffix in '" + label + "'");
  out.base = head.substr(0, digits);
  out.n = std::atoi(head.c_str() + digits);
  return out;
}

}  // namespace

ModelManifold make_model(const std::string& label) {
  ParsedLabel p = parse_label(label);
  if (p.base == "sphere") return ModelManifold(p.n, warp_sphere(), true, label);
  if (p.base == "flat") return ModelManifold(p.n, warp_flat(), true, label);
  if (p.base == "hyperbolic") return ModelManifold(p.n, warp_hyperbolic(), true, label);
  if (p.base == "cylbump") {
    double c = p.params.count("c") ? p.params.at("c") : 0.5;
    double blend = p.params.count("blend") ? p.params.at("blend") : 1.0;
    return ModelManifold(p.n, warp_cylinder_bump(c, blend), true, label);
  }
  throw std::invalid_argument("unknown model label '" + label + "'");
}

std::vector<std::string> model_registry_labels() {
  return {"sphere3", "flat3", "hyperbolic3", "cylbump3:c=0.5,blend=1"};
}

}  // namespace yamabe
