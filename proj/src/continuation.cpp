#include "yamabe/continuation.hpp"

#include <algorithm>
#include <cmath>

#include "yamabe/spectral.hpp"

namespace yamabe {

void Schedule::validate(double p_crit) const {
  if (alpha_list.empty() || p_list.empty())
    throw std::invalid_argument("Schedule: alpha_list and p_list must be nonempty");
  if (alpha_list.back() != 0.0)
    throw std::invalid_argument("Schedule: alpha_list must end with 0");
  if (!(alpha_list.front() > 0.0))
    throw std::invalid_argument("Schedule: alpha_list must start positive");
  for (size_t i = 1; i < alpha_list.size(); ++i)
    if (!(alpha_list[i] < alpha_list[i - 1]))
      throw std::invalid_argument("Schedule: alpha_list must be strictly decreasing");
  for (size_t i = 1; i < p_list.size(); ++i)
    if (!(p_list[i] > p_list[i - 1]))
      throw std::invalid_argument("Schedule: p_list must be increasing");
  if (!(p_list.front() >= 2.0))
    throw std::invalid_argument("Schedule: p_list must start at >= 2");
  if (std::abs(p_list.back() - p_crit) > 1e-12)
    throw std::invalid_argument("Schedule: p_list must end at p_crit");
}

Schedule Schedule::defaults(double p_crit) {
  Schedule s;
  s.alpha_list = {0.5, 0.2, 0.05, 0.0};
  // geometric refinement toward the critical endpoint; {2,3,4,5,5.5,5.9,6} at n=3
  double gap = p_crit - 2.0;
  for (double f : {1.0, 0.75, 0.5, 0.25, 0.125, 0.025, 0.0})
    s.p_list.push_back(p_crit - f * gap);
  return s;
}

namespace {

double inner_sup_delta(const RadialGrid& g, const DiscreteField& a, const DiscreteField& b) {
  double r_mid = 0.5 * (g.r_inner + g.r_max);
  double s = 0.0;
  for (int j = 0; j < a.size() && g.active_r(j) <= r_mid; ++j)
    s = std::max(s, std::abs(a[j] - b[j]));
  return s;
}

TraceRecord make_record(int stage, const Extremal& e, const RadialGrid& g,
                        const std::optional<DiscreteField>& prev) {
  TraceRecord r;
  r.stage = stage;
  r.alpha = e.alpha;
  r.p = e.p;
  r.Q = e.Q;
  r.sup_v = e.sup_v;
  r.argmax_r = e.argmax_r;
  r.residual = e.residual;
  r.iterations = e.iterations;
  r.norm_pcrit_unweighted = e.norm_pcrit_unweighted;
  r.inner_sup_delta = prev ? inner_sup_delta(g, e.v, *prev) : 0.0;
  r.field = e.v;
  return r;
}

}  // namespace

ContinuationTrace run_continuation(const ModelManifold& m, const RadialGrid& g,
                                   const WeightSpec& w, const Schedule& sched,
                                   const MinimizeConfig& cfg) {
  sched.validate(m.p_crit());
  OperatorAssembly a = assemble(m, g, w);

  ContinuationTrace trace;
  std::optional<DiscreteField> warm;
  std::optional<Extremal> last_extremal;
  double alpha0 = sched.alpha_list.front();

  auto step = [&](int stage, double alpha, double p) -> bool {
    try {
      Extremal e = minimize_Q(a, alpha, p, cfg, warm);
      TraceRecord rec = make_record(stage, e, g, warm);
      if (trace.blowup_threshold > 0.0 && e.sup_v > trace.blowup_threshold)
        rec.blowup_flagged = true;
      trace.records.push_back(std::move(rec));
      warm = e.v;
      if (trace.blowup_threshold == 0.0)
        trace.blowup_threshold = 50.0 * e.sup_v;  // 50x the stage-1 initial sup
      last_extremal = std::move(e);
      return true;
    } catch (const SolverError& err) {
      TraceRecord rec;
      rec.stage = stage;
      rec.alpha = alpha;
      rec.p = p;
      rec.Q = err.best_value;
      rec.residual = err.best_residual;
      rec.iterations = err.iterations;
      trace.records.push_back(std::move(rec));
      trace.failure = err.what();
      return false;
    }
  };

  for (double p : sched.p_list)
    if (!step(1, alpha0, p)) return trace;
  for (size_t i = 1; i < sched.alpha_list.size(); ++i)
    if (!step(2, sched.alpha_list[i], sched.p_list.back())) return trace;

  // the terminal solve is the alpha = 0, p = p_crit one
  if (last_extremal && last_extremal->alpha == 0.0 &&
      std::abs(last_extremal->p - m.p_crit()) <= 1e-12) {
    trace.completed = true;
    trace.final = std::move(last_extremal);
  }
  return trace;
}

AuditReport audit_monotonicity(const std::vector<QPoint>& points, double tol, double p_crit) {
  AuditReport rep;
  // (a) alpha-monotonicity at fixed p
  for (const QPoint& x : points) {
    for (const QPoint& y : points) {
      if (std::abs(x.p - y.p) > 1e-12) continue;
      if (x.alpha < y.alpha - 1e-15) {
        if (!(x.Q <= y.Q + tol))
          rep.violations.push_back({"alpha_monotone", x.alpha, y.alpha, x.p, x.Q, y.Q});
      }
    }
  }
  // (b) the critical endpoint of a sweep must stay above the trend of the
  // closest subcritical values; a value far below signals a branch jump
  std::vector<double> alphas;
  for (const QPoint& x : points)
    if (std::find_if(alphas.begin(), alphas.end(),
                     [&](double a) { return std::abs(a - x.alpha) <= 1e-15; }) == alphas.end())
      alphas.push_back(x.alpha);
  for (double al : alphas) {
    std::vector<QPoint> sweep;
    for (const QPoint& x : points)
      if (std::abs(x.alpha - al) <= 1e-15) sweep.push_back(x);
    std::sort(sweep.begin(), sweep.end(), [](const QPoint& a, const QPoint& b) { return a.p < b.p; });
    if (sweep.size() < 3) continue;
    if (!(p_crit > 0.0) || std::abs(sweep.back().p - p_crit) > 1e-9) continue;
    const QPoint& top = sweep.back();
    const QPoint& s1 = sweep[sweep.size() - 2];
    const QPoint& s2 = sweep[sweep.size() - 3];
    double slope = std::max(0.0, (s2.Q - s1.Q) / std::max(1e-12, s1.p - s2.p));
    double floor = s1.Q - 3.0 * slope * (top.p - s1.p) - tol * (1.0 + std::abs(top.Q));
    if (!(top.Q >= floor))
      rep.violations.push_back({"p_limsup", al, al, top.p, top.Q, floor});
  }
  // (c) ordering of the alpha-limit at each p; the terminal gap is reported,
  // not thresholded (the continuum limit carries no rate).
  for (const QPoint& x : points) {
    if (x.alpha != 0.0) continue;
    double best_alpha = std::numeric_limits<double>::infinity();
    double q_at_best = 0.0;
    for (const QPoint& y : points) {
      if (std::abs(y.p - x.p) > 1e-12 || y.alpha <= 0.0) continue;
      if (y.alpha < best_alpha) {
        best_alpha = y.alpha;
        q_at_best = y.Q;
      }
    }
    if (std::isfinite(best_alpha)) {
      rep.terminal_alpha_gap = std::max(rep.terminal_alpha_gap, q_at_best - x.Q);
      if (!(x.Q <= q_at_best + tol))
        rep.violations.push_back({"alpha_ordering", 0.0, best_alpha, x.p, x.Q, q_at_best});
    }
  }
  return rep;
}

double blowup_rescale_delta(double m_p, double p) { return std::pow(m_p, (2.0 - p) / 2.0); }

MonitorReport sup_bound_monitor(const ContinuationTrace& trace, const RadialGrid& g, int n,
                                double k_threshold) {
  MonitorReport rep;
  for (size_t idx = 0; idx < trace.records.size(); ++idx) {
    const TraceRecord& rec = trace.records[idx];
    if (rec.field.size() == 0) continue;
    if (!(rec.sup_v > k_threshold)) continue;
    rep.flagged.push_back(static_cast<int>(idx));

    BlowupProfile prof;
    prof.record_index = static_cast<int>(idx);
    double mp = rec.sup_v;
    double delta = blowup_rescale_delta(mp, rec.p);
    prof.delta_p = delta;
    int nd = rec.field.size();
    int jstar = 0;
    for (int j = 0; j < nd; ++j)
      if (rec.field[j] > rec.field[jstar]) jstar = j;
    double rstar = g.active_r(jstar);
    prof.x.reserve(static_cast<size_t>(nd));
    prof.u.reserve(static_cast<size_t>(nd));
    for (int j = 0; j < nd; ++j) {
      prof.x.push_back((g.active_r(j) - rstar) / delta);
      prof.u.push_back(rec.field[j] / mp);
    }
    // best-fit bubble over lambda: coarse log sweep plus local refinement
    auto sup_dist = [&](double lam) {
      double win = 5.0 * std::sqrt(3.0) / lam;
      double worst = 0.0;
      for (size_t j = 0; j < prof.x.size(); ++j) {
        if (std::abs(prof.x[j]) > win) continue;
        double b = aubin_talenti_bubble(n, lam, prof.x[j]);
        worst = std::max(worst, std::abs(prof.u[j] - b));
      }
      return worst;
    };
    double best_lam = 1.0, best = std::numeric_limits<double>::infinity();
    for (int k = -40; k <= 40; ++k) {
      double lam = std::pow(10.0, k / 10.0);
      double d = sup_dist(lam);
      if (d < best) {
        best = d;
        best_lam = lam;
      }
    }
    for (int pass = 0; pass < 40; ++pass) {
      double step = best_lam * 0.05;
      bool moved = false;
      for (double lam : {best_lam - step, best_lam + step}) {
        if (lam <= 0.0) continue;
        double d = sup_dist(lam);
        if (d < best) {
          best = d;
          best_lam = lam;
          moved = true;
        }
      }
      if (!moved) break;
    }
    prof.lambda_best = best_lam;
    prof.sup_dist = best;
    rep.profiles.push_back(std::move(prof));
  }
  return rep;
}

std::vector<ExteriorEstimate> q_at_infinity(const ModelManifold& m, const WeightSpec& w,
                                            const std::vector<double>& R_list, double r_max,
                                            int N, const MinimizeConfig& cfg) {
  if (R_list.empty()) throw std::invalid_argument("q_at_infinity: empty R_list");
  for (size_t i = 1; i < R_list.size(); ++i)
    if (!(R_list[i] > R_list[i - 1]))
      throw std::invalid_argument("q_at_infinity: R_list must be increasing");
  if (!(R_list.back() < r_max / 2.0))
    throw std::invalid_argument("q_at_infinity: need max(R_list) < r_max / 2");

  std::vector<ExteriorEstimate> out;
  for (double R : R_list) {
    ExteriorEstimate est;
    est.R = R;
    try {
      RadialGrid g = build_grid(m, R, r_max, N);
      OperatorAssembly a = assemble(m, g, w);
      SpectralResult mu = mu_bottom(a);
      est.mu = mu.value;
      if (!(mu.value > 0.0)) {
        est.error = "exterior mu <= 0";
        out.push_back(est);
        continue;
      }
      Extremal e = minimize_Q(a, 0.0, a.p_crit, cfg);
      est.Q = e.Q;
      est.ok = true;
    } catch (const std::exception& ex) {
      est.error = ex.what();
    }
    out.push_back(est);
  }
  return out;
}

ScalingReport subcritical_scaling_check(int n, double s, double R1, double R2, int N,
                                        const MinimizeConfig& cfg, double tol) {
  ModelManifold flat(n, warp_flat(), true, "flat" + std::to_string(n));
  if (!(s >= 2.0 && s < flat.p_crit())) throw std::invalid_argument("subcritical_scaling_check: need 2 <= s < p_crit");
  if (!(R2 > R1 && R1 > 0.0)) throw std::invalid_argument("subcritical_scaling_check: need R2 > R1 > 0");
  WeightSpec w;
  ScalingReport rep;
  rep.exponent = 2.0 - n + 2.0 * n / s;
  RadialGrid g1 = build_grid(flat, 0.0, R1, N);
  RadialGrid g2 = build_grid(flat, 0.0, R2, N);
  Extremal e1 = minimize_Q(assemble(flat, g1, w), 0.0, s, cfg);
  Extremal e2 = minimize_Q(assemble(flat, g2, w), 0.0, s, cfg);
  rep.Q1 = e1.Q;
  rep.Q2 = e2.Q;
  rep.observed_ratio = e2.Q / e1.Q;
  rep.expected_ratio = std::pow(R2 / R1, -rep.exponent);
  rep.ok = std::abs(rep.observed_ratio - rep.expected_ratio) <= tol * rep.expected_ratio;
  return rep;
}

namespace {

std::string fmt_short(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", x);
  return buf;
}

}  // namespace

Verdict decide_existence(const ModelManifold& m, const RadialGrid& g, const WeightSpec& w,
                         const Schedule& sched, const MinimizeConfig& cfg, const Margins& margins,
                         ContinuationTrace* trace_out) {
  Verdict v;
  OperatorAssembly a = assemble(m, g, w);
  SpectralResult mu = mu_bottom(a);
  v.mu_value = mu.value;
  v.hypotheses_met.mu_positive = mu.value >= margins.mu;
  if (!v.hypotheses_met.mu_positive) {
    v.notes.push_back("mu_positive failed: mu = " + fmt_short(mu.value) + " < margin " +
                      fmt_short(margins.mu));
    return v;  // no continuation attempted without a spectral gap
  }

  Extremal direct = minimize_Q(a, 0.0, a.p_crit, cfg);
  v.q_estimate = direct.Q;

  double r_span = g.r_max - g.r_inner;
  std::vector<double> R_list = {g.r_inner + 0.125 * r_span, g.r_inner + 0.25 * r_span,
                                g.r_inner + 0.45 * r_span};
  std::vector<ExteriorEstimate> ext = q_at_infinity(m, w, R_list, g.r_max, g.n_interior, cfg);
  bool ext_ok = !ext.empty() && ext.back().ok;
  if (ext_ok) v.q_inf_estimate = ext.back().Q;
  v.hypotheses_met.qbar_exceeds_q = ext_ok && (v.q_inf_estimate - v.q_estimate >= margins.qbar);
  if (!v.hypotheses_met.qbar_exceeds_q)
    v.notes.push_back("qbar_exceeds_q failed: Qbar - Q = " +
                      fmt_short(v.q_inf_estimate - v.q_estimate) + " < margin " +
                      fmt_short(margins.qbar));

  double sphere = sphere_yamabe_constant(m.n);
  v.hypotheses_met.q_below_sphere = v.q_estimate <= sphere - margins.sphere;
  if (!v.hypotheses_met.q_below_sphere)
    v.notes.push_back("q_below_sphere failed: Q = " + fmt_short(v.q_estimate) + " > " +
                      fmt_short(sphere) + " - margin " + fmt_short(margins.sphere));

  if (!v.hypotheses_met.all()) return v;

  // a-posteriori check of the weighted-critical bound at the schedule's head
  // alpha; shrink and retry when violated.
  Schedule run_sched = sched;
  for (int attempt = 0; attempt < 4; ++attempt) {
    Extremal head = minimize_Q(a, run_sched.alpha_list.front(), a.p_crit, cfg);
    if (head.Q < sphere) break;
    std::vector<double> scaled;
    for (double al : run_sched.alpha_list) scaled.push_back(al * 0.5);
    scaled.back() = 0.0;
    run_sched.alpha_list = scaled;
    v.notes.push_back("alpha0 shrunk to " + fmt_short(run_sched.alpha_list.front()) +
                      " (weighted critical constant reached the sphere bound)");
    if (attempt == 3)
      v.notes.push_back("alpha0 condition unverifiable at smallest attempted alpha");
  }

  ContinuationTrace trace = run_continuation(m, g, w, run_sched, cfg);
  if (trace_out) *trace_out = trace;
  if (!trace.completed || !trace.final) {
    v.notes.push_back("continuation failed: " + (trace.failure.empty() ? "incomplete trace" : trace.failure));
    return v;
  }
  MonitorReport mon = sup_bound_monitor(trace, g, m.n, trace.blowup_threshold);
  if (!mon.flagged.empty()) v.notes.push_back("blow-up flags raised on " +
                                              std::to_string(mon.flagged.size()) + " record(s)");
  const Extremal& fin = *trace.final;
  double norm_dev = std::abs(fin.norm_pcrit_unweighted - 1.0);
  if (fin.residual <= cfg.residual_tol && norm_dev <= 1e-2) {
    v.final = fin;
  } else {
    v.notes.push_back("final extremal rejected: residual " + fmt_short(fin.residual) +
                      ", |norm_pcrit - 1| = " + fmt_short(norm_dev));
  }
  return v;
}

bool certify_mu1(const Extremal& e, double tol) {
  if (!(e.alpha == 0.0) || std::abs(e.p - e.p_crit) > 1e-12)
    throw std::invalid_argument("certify_mu1: needs a final (alpha = 0, p = p_crit) extremal");
  return std::isfinite(e.sup_v) && e.norm_pcrit_unweighted <= 1.0 + tol && e.residual <= tol;
}

}  // namespace yamabe
