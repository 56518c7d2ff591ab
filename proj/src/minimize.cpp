#include "yamabe/minimize.hpp"

#include <algorithm>
#include <cmath>

#include "yamabe/spectral.hpp"

namespace yamabe {

namespace {

double pnorm(const std::vector<double>& wq, const std::vector<double>& v, double p) {
  double s = 0.0;
  if (p == 2.0) {
    for (size_t i = 0; i < v.size(); ++i) s += wq[i] * v[i] * v[i];
    return std::sqrt(s);
  }
  for (size_t i = 0; i < v.size(); ++i) s += wq[i] * std::pow(std::abs(v[i]), p);
  return std::pow(s, 1.0 / p);
}

void nonlinearity(const std::vector<double>& wq, const std::vector<double>& v, double p,
                  std::vector<double>& out) {
  out.resize(v.size());
  if (p == 2.0) {
    for (size_t i = 0; i < v.size(); ++i) out[i] = wq[i] * v[i];
    return;
  }
  for (size_t i = 0; i < v.size(); ++i)
    out[i] = wq[i] * std::pow(std::abs(v[i]), p - 2.0) * v[i];
}

}  // namespace

std::vector<double> quotient_gradient(const OperatorAssembly& a, const DiscreteField& v,
                                      double alpha, double p) {
  a.check_dim(v, "quotient_gradient");
  std::vector<double> wq = a.weighted_mass(alpha, p);
  SymTridiag K = a.full_operator();
  std::vector<double> kv, nl;
  K.matvec(v.values, kv);
  nonlinearity(wq, v.values, p, nl);
  double nr = pnorm(wq, v.values, p);
  double pw = nr * nr;            // ||.||_p^2 at the evaluation point
  double e = a.energy(v);
  double q = e / pw;
  double ppow = std::pow(nr, p);  // sum of the p-masses
  std::vector<double> g(static_cast<size_t>(v.size()));
  for (size_t i = 0; i < g.size(); ++i)
    g[i] = 2.0 / pw * (kv[i] - q * pw / ppow * nl[i]);
  return g;
}

double el_residual(const OperatorAssembly& a, const DiscreteField& v, double Q,
                   double alpha, double p) {
  a.check_dim(v, "el_residual");
  if (!(pnorm(a.weighted_mass(alpha, p), v.values, p) > 0.0))
    throw std::invalid_argument("el_residual: zero field");
  std::vector<double> wq = a.weighted_mass(alpha, p);
  SymTridiag K = a.full_operator();
  std::vector<double> kv, nl;
  K.matvec(v.values, kv);
  nonlinearity(wq, v.values, p, nl);
  std::vector<double> res(static_cast<size_t>(v.size()));
  for (size_t i = 0; i < res.size(); ++i) res[i] = kv[i] - Q * nl[i];
  return dual_residual_norm(a, res);
}

Extremal minimize_Q(const OperatorAssembly& a, double alpha, double p, const MinimizeConfig& cfg,
                    const std::optional<DiscreteField>& warm) {
  cfg.validate();
  a.check_p(p, "minimize_Q");
  if (alpha < 0.0) throw std::invalid_argument("minimize_Q: alpha must be >= 0");

  SpectralResult mu = mu_bottom(a, 1e-9);
  if (!(mu.value > 0.0))
    throw PreconditionError("minimize_Q: mu_bottom = " + std::to_string(mu.value) +
                            " is not positive");

  const int nd = a.dof();
  const std::vector<double> wq = a.weighted_mass(alpha, p);
  SymTridiag K = a.full_operator();
  TridiagLDLT fac = TridiagLDLT::factor(K);  // positive definite since mu > 0

  auto normalize = [&](std::vector<double>& v) {
    double nr = pnorm(wq, v, p);
    if (!(nr > 0.0)) throw SolverError("minimize_Q: iterate collapsed to zero", 0.0, 0.0, 0);
    for (auto& vi : v) vi /= nr;
  };
  auto quot = [&](const std::vector<double>& v) {
    double nr = pnorm(wq, v, p);
    return a.energy(v) / (nr * nr);
  };

  // initial iterate; near the critical exponent a cold start first solves a
  // subcritical stage and continues from it, since the critical landscape
  // carries an almost-flat direction that punishes arbitrary starts
  std::vector<double> v(static_cast<size_t>(nd), 1.0);
  double p_gate = 2.0 + 0.8 * (a.p_crit - 2.0);
  if (!warm && p > p_gate) {
    MinimizeConfig warmup_cfg = cfg;
    warmup_cfg.residual_tol = std::max(cfg.residual_tol, 1e-9);
    Extremal stage = minimize_Q(a, alpha, p_gate, warmup_cfg);
    return minimize_Q(a, alpha, p, cfg, stage.v);
  }
  if (warm) {
    if (static_cast<int>(warm->values.size()) != nd)
      throw std::invalid_argument("minimize_Q: warm start has wrong dimension");
    v = warm->values;
    for (auto& vi : v) vi = std::abs(vi);
  } else if (cfg.init == MinimizeInit::gaussian_bump) {
    int jc = 0;
    for (int j = 1; j < nd; ++j)
      if (a.sigma_node[static_cast<size_t>(j)] < a.sigma_node[static_cast<size_t>(jc)]) jc = j;
    double rc = a.grid.active_r(jc);
    double s = (a.grid.r_max - a.grid.r_inner) / 8.0;
    for (int j = 0; j < nd; ++j) {
      double d = a.grid.active_r(j) - rc;
      v[static_cast<size_t>(j)] = std::exp(-d * d / (2.0 * s * s));
    }
  }
  normalize(v);
  double Q = quot(v);

  std::vector<double> q_history{Q};
  std::vector<double> rhs, u, grad, trial, kv;
  double res = std::numeric_limits<double>::infinity();
  int it = 0;
  int stalled = 0;

  // Bordered Newton corrector on the Euler-Lagrange system
  //   K v - Q wq |v|^{p-2} v = 0,   sum wq |v|^p = 1.
  // The border carries the constraint and, when supplied, a deflation
  // direction z estimating the slowly contracting mode: near-critical
  // symmetric problems have an almost-flat family whose tangent is nearly
  // orthogonal to the constraint, which would make the plain bordered matrix
  // near-singular. Deflating z out restores a well-conditioned complement;
  // motion along z is handled by the 1-D minimizer instead.
  auto newton_step = [&](const std::vector<double>* z) -> bool {
    std::vector<double> wp(static_cast<size_t>(nd)), f1(static_cast<size_t>(nd));
    nonlinearity(wq, v, p, wp);  // wq |v|^{p-2} v
    double curQ = quot(v);
    SymTridiag J = K;
    for (int i = 0; i < nd; ++i) {
      double vp2 = (p == 2.0) ? 1.0 : std::pow(std::abs(v[static_cast<size_t>(i)]), p - 2.0);
      J.d[static_cast<size_t>(i)] -= curQ * (p - 1.0) * wq[static_cast<size_t>(i)] * vp2;
    }
    TridiagLDLT jfac = TridiagLDLT::factor(J);
    for (double piv : jfac.dfac)
      if (!(std::abs(piv) > 1e-300) || !std::isfinite(piv)) return false;
    K.matvec(v, f1);
    for (int i = 0; i < nd; ++i) f1[static_cast<size_t>(i)] = -(f1[static_cast<size_t>(i)] - curQ * wp[static_cast<size_t>(i)]);
    std::vector<double> y1, y2, y3;
    jfac.solve(f1, y1);
    jfac.solve(wp, y2);
    std::vector<double> dv(static_cast<size_t>(nd));
    if (z) {
      jfac.solve(*z, y3);
      // solve the 2x2 border for (dQ, zeta): c.dv = 0 and z.dv = 0
      double c1 = 0.0, c2 = 0.0, c3 = 0.0, z1 = 0.0, z2 = 0.0, z3 = 0.0;
      for (int i = 0; i < nd; ++i) {
        c1 += wp[static_cast<size_t>(i)] * y1[static_cast<size_t>(i)];
        c2 += wp[static_cast<size_t>(i)] * y2[static_cast<size_t>(i)];
        c3 += wp[static_cast<size_t>(i)] * y3[static_cast<size_t>(i)];
        z1 += (*z)[static_cast<size_t>(i)] * y1[static_cast<size_t>(i)];
        z2 += (*z)[static_cast<size_t>(i)] * y2[static_cast<size_t>(i)];
        z3 += (*z)[static_cast<size_t>(i)] * y3[static_cast<size_t>(i)];
      }
      // [c2 c3; z2 z3] [dQ; zeta] = [-c1; -z1]
      double det = c2 * z3 - c3 * z2;
      if (!(std::abs(det) > 1e-300) || !std::isfinite(det)) return false;
      double dQ = (c3 * z1 - c1 * z3) / det;
      double zeta = (c1 * z2 - c2 * z1) / det;
      for (int i = 0; i < nd; ++i)
        dv[static_cast<size_t>(i)] = y1[static_cast<size_t>(i)] + dQ * y2[static_cast<size_t>(i)] +
                                     zeta * y3[static_cast<size_t>(i)];
    } else {
      double c1 = 0.0, c2 = 0.0;
      for (int i = 0; i < nd; ++i) {
        c1 += wp[static_cast<size_t>(i)] * y1[static_cast<size_t>(i)];
        c2 += wp[static_cast<size_t>(i)] * y2[static_cast<size_t>(i)];
      }
      if (!(std::abs(c2) > 1e-300)) return false;
      double dQ = -c1 / c2;
      for (int i = 0; i < nd; ++i)
        dv[static_cast<size_t>(i)] = y1[static_cast<size_t>(i)] + dQ * y2[static_cast<size_t>(i)];
    }
    double cur_res = el_residual(a, DiscreteField(v), curQ, alpha, p);
    double damp = 1.0;
    for (int tries = 0; tries < 12; ++tries) {
      trial.resize(static_cast<size_t>(nd));
      for (int i = 0; i < nd; ++i)
        trial[static_cast<size_t>(i)] =
            std::abs(v[static_cast<size_t>(i)] + damp * dv[static_cast<size_t>(i)]);
      double nr = pnorm(wq, trial, p);
      if (nr > 0.0 && std::isfinite(nr)) {
        std::vector<double> cand = trial;
        for (auto& ci : cand) ci /= nr;
        double qc = quot(cand);
        double rc = el_residual(a, DiscreteField(cand), qc, alpha, p);
        if (std::isfinite(rc) && rc <= (1.0 - 0.5 * damp) * cur_res) {
          v = cand;
          Q = std::min(Q, qc);
          q_history.push_back(Q);
          return true;
        }
      }
      damp *= 0.5;
    }
    return false;
  };

  // 1-D minimization of the quotient along a direction (both signs), used to
  // travel the slowly contracting mode that Newton deflates out. Monotone:
  // t = 0 stays a candidate.
  std::vector<double> dir(static_cast<size_t>(nd));
  auto line_minimize = [&](const std::vector<double>& d) -> bool {
    auto eval = [&](double t) {
      trial.resize(static_cast<size_t>(nd));
      for (int i = 0; i < nd; ++i)
        trial[static_cast<size_t>(i)] =
            std::abs(v[static_cast<size_t>(i)] + t * d[static_cast<size_t>(i)]);
      double nr = pnorm(wq, trial, p);
      if (!(nr > 0.0)) return std::numeric_limits<double>::infinity();
      return a.energy(trial) / (nr * nr);
    };
    double best_t = 0.0, best_f = Q;
    for (double sgn : {1.0, -1.0}) {
      double hi = sgn, fhi = eval(hi);
      for (int k = 0; k < 60; ++k) {
        double f2x = eval(2.0 * hi);
        if (!(f2x < fhi)) break;
        hi *= 2.0;
        fhi = f2x;
      }
      double lo = 0.0, b = 2.0 * hi;
      const double gr = 0.618033988749894848;
      double x1 = b * (1.0 - gr), x2 = b * gr;
      double f1 = eval(x1), f2 = eval(x2);
      for (int k = 0; k < 60; ++k) {
        if (f1 <= f2) {
          b = x2;
          x2 = x1;
          f2 = f1;
          x1 = lo + (b - lo) * (1.0 - gr);
          f1 = eval(x1);
        } else {
          lo = x1;
          x1 = x2;
          f1 = f2;
          x2 = lo + (b - lo) * gr;
          f2 = eval(x2);
        }
        if (f1 < best_f) { best_f = f1; best_t = x1; }
        if (f2 < best_f) { best_f = f2; best_t = x2; }
      }
      if (fhi < best_f) { best_f = fhi; best_t = hi; }
    }
    if (best_t == 0.0 || !(best_f < Q - 1e-15 * (1.0 + std::abs(Q)))) return false;
    eval(best_t);
    v = trial;
    normalize(v);
    Q = std::min(Q, quot(v));
    q_history.push_back(Q);
    return true;
  };

  // rounding slack: near convergence the quotient value settles at machine
  // precision while the iterate is still contracting, so hold the monotone
  // gate to fp-level increases only
  const double fp_slack = 1e-13;
  const int plateau_window = 12;
  std::vector<double> res_history;
  std::vector<double> z_mode;  // running estimate of the slow contraction mode
  std::vector<double> v_before;
  int closer_cooldown = 0;
  // Rounding floor of the residual evaluation: eps times the dual norm of the
  // absolute-value matvec. Problems with extreme magnitudes (strong weights,
  // conformally thin exterior shells) put this floor above the requested
  // absolute tolerance; within a small factor of it no iteration can improve.
  auto residual_floor = [&]() {
    std::vector<double> s(static_cast<size_t>(nd));
    for (int i = 0; i < nd; ++i) {
      double t = std::abs(K.d[static_cast<size_t>(i)]) * std::abs(v[static_cast<size_t>(i)]);
      if (i > 0) t += std::abs(K.e[static_cast<size_t>(i - 1)]) * std::abs(v[static_cast<size_t>(i - 1)]);
      if (i + 1 < nd) t += std::abs(K.e[static_cast<size_t>(i)]) * std::abs(v[static_cast<size_t>(i + 1)]);
      s[static_cast<size_t>(i)] = t;
    }
    return 2.22e-16 * dual_residual_norm(a, s);
  };
  double best_res = std::numeric_limits<double>::infinity();
  int fruitless = 0;
  for (it = 1; it <= cfg.max_iter; ++it) {
    res = el_residual(a, DiscreteField(v), quot(v), alpha, p);
    if (res <= cfg.residual_tol && it >= 2) break;
    if (res < 0.99 * best_res) {
      best_res = res;
      fruitless = 0;
    } else if (++fruitless >= 100 && it >= 2) {
      if (res <= 5.0 * residual_floor()) break;
    }
    res_history.push_back(res);
    bool plateau = false;
    if (static_cast<int>(res_history.size()) > plateau_window) {
      double past = res_history[res_history.size() - 1 - plateau_window];
      plateau = res > 0.7 * past;
    }
    if (closer_cooldown > 0) --closer_cooldown;
    if (plateau && closer_cooldown == 0) {
      bool advanced = false;
      const std::vector<double>* z = z_mode.empty() ? nullptr : &z_mode;
      if (z && line_minimize(z_mode)) advanced = true;
      if (res <= 0.05 * (1.0 + std::abs(Q)) && newton_step(z)) advanced = true;
      if (advanced) {
        res_history.clear();
        continue;
      }
      closer_cooldown = plateau_window;
    }
    bool accepted = false;
    // fixed-point step
    nonlinearity(wq, v, p, rhs);
    fac.solve(rhs, u);
    for (auto& ui : u) ui = std::abs(ui);
    normalize(u);
    double Qu = quot(u);
    if (Qu <= Q + fp_slack * (1.0 + std::abs(Q))) {
      // consecutive differences converge to the slowest mode of the iteration
      z_mode.assign(static_cast<size_t>(nd), 0.0);
      double zn = 0.0;
      for (int i = 0; i < nd; ++i) {
        z_mode[static_cast<size_t>(i)] = u[static_cast<size_t>(i)] - v[static_cast<size_t>(i)];
        zn += z_mode[static_cast<size_t>(i)] * z_mode[static_cast<size_t>(i)];
      }
      if (zn > 0.0) {
        zn = std::sqrt(zn);
        for (auto& zi : z_mode) zi /= zn;
      } else {
        z_mode.clear();
      }
      v = u;
      Q = std::min(Q, Qu);
      accepted = true;
      q_history.push_back(Q);
      continue;
    }
    // Armijo fallback on the projected gradient
    grad = quotient_gradient(a, DiscreteField(v), alpha, p);
    double g2 = 0.0, vn2 = 0.0;
    for (size_t i = 0; i < grad.size(); ++i) {
      g2 += grad[i] * grad[i];
      vn2 += v[i] * v[i];
    }
    if (g2 > 0.0) {
      double t = 0.5 * std::sqrt(vn2 / g2);
      for (int bt = 0; bt < 50; ++bt) {
        trial = v;
        for (size_t i = 0; i < trial.size(); ++i) trial[i] = std::abs(v[i] - t * grad[i]);
        double nr = pnorm(wq, trial, p);
        if (nr > 0.0) {
          for (auto& ti : trial) ti /= nr;
          double Qt = quot(trial);
          if (Qt <= Q - cfg.armijo_c1 * t * g2) {
            v = trial;
            Q = Qt;
            accepted = true;
            q_history.push_back(Q);
            break;
          }
        }
        t *= cfg.armijo_backtrack;
      }
    }
    if (!accepted) {
      if (++stalled >= 3)
        throw SolverError("minimize_Q: stalled at Q = " + std::to_string(Q) + ", residual " +
                              std::to_string(res),
                          Q, res, it);
    } else {
      stalled = 0;
    }
  }

  res = el_residual(a, DiscreteField(v), quot(v), alpha, p);
  if (res > std::max(cfg.residual_tol, 5.0 * residual_floor()))
    throw SolverError("minimize_Q: no convergence after " + std::to_string(cfg.max_iter) +
                          " iterations (residual " + std::to_string(res) + ")",
                      Q, res, it);

  // The solve against a Stieltjes matrix keeps fixed-point iterates strictly
  // positive; an Armijo-accepted final iterate may carry zeros, so polish once.
  bool has_nonpos = false;
  for (double vi : v)
    if (!(vi > 0.0)) has_nonpos = true;
  if (has_nonpos) {
    nonlinearity(wq, v, p, rhs);
    fac.solve(rhs, u);
    for (auto& ui : u) ui = std::abs(ui);
    normalize(u);
    double Qu = quot(u);
    double ru = el_residual(a, DiscreteField(u), Qu, alpha, p);
    if (Qu <= Q * (1.0 + 1e-12) && ru <= cfg.residual_tol) {
      v = u;
      Q = Qu;
      res = ru;
      q_history.push_back(Q);
    }
  }

  normalize(v);
  Extremal e;
  e.v = DiscreteField(v);
  e.Q = a.energy(e.v);
  e.alpha = alpha;
  e.p = p;
  e.p_crit = a.p_crit;
  e.residual = res;
  e.iterations = it;
  e.mu = mu.value;
  e.q_history = std::move(q_history);
  e.argmax_node = 0;
  for (int j = 0; j < nd; ++j)
    if (v[static_cast<size_t>(j)] > v[static_cast<size_t>(e.argmax_node)]) e.argmax_node = j;
  e.sup_v = v[static_cast<size_t>(e.argmax_node)];
  e.argmax_r = a.grid.active_r(e.argmax_node);
  e.norm_pcrit_unweighted = a.weighted_p_norm(e.v, 0.0, a.p_crit);
  return e;
}

bool max_point_check(const ModelManifold& m, const Extremal& e, double tol) {
  double rstar = e.argmax_r;
  double sig = scalar_curvature(m, rstar);
  WeightSpec w;
  double rho_ap = weight(w, rstar, e.alpha * e.p);
  double lhs = e.Q * rho_ap * std::pow(e.sup_v, e.p - 2.0);
  return lhs >= sig - tol;
}

bool decay_check(const Extremal& e, const RadialGrid& g, double fraction, double tol) {
  if (!(e.alpha > 0.0 && e.p < e.p_crit - 1e-12)) return true;  // vacuous
  double r_cut = g.r_max - fraction * (g.r_max - g.r_inner);
  if (e.argmax_r >= r_cut) return false;
  double outer_max = 0.0;
  for (int j = 0; j < e.v.size(); ++j)
    if (g.active_r(j) >= r_cut) outer_max = std::max(outer_max, std::abs(e.v[j]));
  return outer_max <= tol * e.sup_v;
}

}  // namespace yamabe
