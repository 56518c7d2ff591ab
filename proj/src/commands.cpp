#include "yamabe/commands.hpp"

#include <cmath>
#include <filesystem>
#include <iostream>

#include <json.hpp>

#include "yamabe/serialize.hpp"
#include "yamabe/spectral.hpp"

namespace yamabe {

namespace {

using nlohmann::ordered_json;

ordered_json extremal_block(const Extremal& e) {
  return ordered_json{{"Q", e.Q},           {"alpha", e.alpha},
                      {"p", e.p},           {"residual", e.residual},
                      {"iterations", e.iterations}, {"sup_v", e.sup_v},
                      {"argmax_r", e.argmax_r},     {"norm_pcrit", e.norm_pcrit_unweighted}};
}

void emit(const std::string& out_dir, const std::string& name, const std::string& content) {
  std::filesystem::create_directories(out_dir);
  write_file((std::filesystem::path(out_dir) / name).string(), content);
}

struct Problem {
  ModelManifold model;
  RadialGrid grid;
  WeightSpec weight;
  OperatorAssembly assembly;
};

Problem setup(const RunConfig& cfg) {
  ModelManifold m = make_model(cfg.model);
  RadialGrid g = build_grid(m, cfg.r_inner, cfg.r_max, cfg.N);
  WeightSpec w;
  OperatorAssembly a = assemble(m, g, w);
  return Problem{std::move(m), g, w, std::move(a)};
}

}  // namespace

int cmd_q(const RunConfig& cfg, const std::string& out_dir, bool quiet) {
  Problem pr = setup(cfg);
  double p = cfg.p ? *cfg.p : pr.model.p_crit();
  Extremal e = minimize_Q(pr.assembly, cfg.alpha, p, cfg.minimize);

  ordered_json j;
  j["command"] = "q";
  j["config"] = ordered_json::parse(cfg.canonical_json());
  j["extremal"] = extremal_block(e);
  SpectralResult mu = mu_bottom(pr.assembly);
  j["mu"] = {{"value", mu.value}, {"residual", mu.residual}, {"r_max", cfg.r_max}};
  emit(out_dir, "summary.json", j.dump(2) + "\n");
  emit(out_dir, "field.csv", field_to_csv(pr.assembly, e.v, cfg.alpha));
  if (!quiet)
    std::cout << "q: model=" << cfg.model << " alpha=" << cfg.alpha << " p=" << p
              << " Q=" << format_double(e.Q) << " residual=" << format_double(e.residual) << "\n";
  return 0;
}

int cmd_mu(const RunConfig& cfg, const std::string& out_dir, bool quiet) {
  ModelManifold m = make_model(cfg.model);
  WeightSpec w;
  std::vector<double> sweep = cfg.mu_r_max_list;
  if (sweep.empty())
    sweep = {0.25 * cfg.r_max, 0.5 * cfg.r_max, cfg.r_max};

  double span_full = cfg.r_max - cfg.r_inner;
  ordered_json rows = ordered_json::array();
  for (double rm : sweep) {
    int n_nodes = std::max(16, static_cast<int>(std::lround(cfg.N * (rm - cfg.r_inner) / span_full)));
    RadialGrid g = build_grid(m, cfg.r_inner, rm, n_nodes);
    OperatorAssembly a = assemble(m, g, w);
    SpectralResult res = mu_bottom(a);
    rows.push_back({{"r_max", rm}, {"N", n_nodes}, {"value", res.value}, {"residual", res.residual}});
    if (!quiet)
      std::cout << "mu: r_max=" << format_double(rm) << " N=" << n_nodes
                << " mu=" << format_double(res.value) << "\n";
  }
  ordered_json j;
  j["command"] = "mu";
  j["config"] = ordered_json::parse(cfg.canonical_json());
  j["table"] = rows;
  emit(out_dir, "summary.json", j.dump(2) + "\n");
  return 0;
}

int cmd_continue(const RunConfig& cfg, const std::string& out_dir, bool quiet) {
  Problem pr = setup(cfg);
  Schedule sched = cfg.schedule ? *cfg.schedule : Schedule::defaults(pr.model.p_crit());
  sched.validate(pr.model.p_crit());
  ContinuationTrace trace;
  Verdict v = decide_existence(pr.model, pr.grid, pr.weight, sched, cfg.minimize, cfg.margins,
                               &trace);

  ordered_json j;
  j["command"] = "continue";
  j["config"] = ordered_json::parse(cfg.canonical_json());
  j["verdict"] = ordered_json::parse(verdict_to_json(v));
  ordered_json deltas = ordered_json::array();
  for (const TraceRecord& r : trace.records) deltas.push_back(r.inner_sup_delta);
  j["stage_inner_deltas"] = deltas;
  emit(out_dir, "summary.json", j.dump(2) + "\n");
  emit(out_dir, "trace.csv", trace_to_csv(trace));
  if (v.final) emit(out_dir, "field.csv", field_to_csv(pr.assembly, v.final->v, 0.0));
  if (!quiet) {
    std::cout << "continue: mu=" << format_double(v.mu_value)
              << " Q=" << format_double(v.q_estimate)
              << " Qbar=" << format_double(v.q_inf_estimate) << "\n";
    for (const std::string& note : v.notes) std::cout << "  note: " << note << "\n";
  }
  return v.hypotheses_met.all() && v.final ? 0 : 1;
}

int cmd_qinf(const RunConfig& cfg, const std::string& out_dir, bool quiet) {
  ModelManifold m = make_model(cfg.model);
  WeightSpec w;
  std::vector<double> R_list = cfg.qinf_R_list;
  if (R_list.empty()) {
    double span = cfg.r_max - cfg.r_inner;
    R_list = {cfg.r_inner + 0.125 * span, cfg.r_inner + 0.25 * span, cfg.r_inner + 0.45 * span};
  }
  int nq = cfg.qinf_N > 0 ? cfg.qinf_N : cfg.N;
  std::vector<ExteriorEstimate> table = q_at_infinity(m, w, R_list, cfg.r_max, nq, cfg.minimize);

  ordered_json rows = ordered_json::array();
  for (const ExteriorEstimate& e : table) {
    ordered_json row{{"R", e.R}, {"ok", e.ok}};
    if (e.ok) {
      row["Q"] = e.Q;
      row["mu"] = e.mu;
    } else {
      row["error"] = e.error;
    }
    rows.push_back(row);
    if (!quiet)
      std::cout << "qinf: R=" << format_double(e.R)
                << (e.ok ? " Q=" + format_double(e.Q) : " error=" + e.error) << "\n";
  }
  ordered_json j;
  j["command"] = "qinf";
  j["config"] = ordered_json::parse(cfg.canonical_json());
  j["table"] = rows;
  bool any_ok = false;
  for (const ExteriorEstimate& e : table) any_ok = any_ok || e.ok;
  if (any_ok) {
    for (auto it = table.rbegin(); it != table.rend(); ++it)
      if (it->ok) {
        j["qbar_estimate"] = it->Q;
        break;
      }
  }
  emit(out_dir, "summary.json", j.dump(2) + "\n");
  return any_ok ? 0 : 3;
}

int cmd_bubble(const RunConfig& cfg, const std::string& out_dir, bool quiet) {
  Problem pr = setup(cfg);
  std::vector<double> lambdas = cfg.bubble_lambdas;
  if (lambdas.empty()) lambdas = {0.25, 0.5, 1, 2, 4, 8, 12, 16, 24, 32};

  double pcrit = pr.model.p_crit();
  double best_q = std::numeric_limits<double>::infinity();
  double best_lam = lambdas.front();
  ordered_json rows = ordered_json::array();
  for (double lam : lambdas) {
    DiscreteField v(pr.assembly.dof());
    double shift = aubin_talenti_bubble(pr.model.n, lam, pr.grid.r_max);
    for (int j = 0; j < v.size(); ++j)
      v[j] = aubin_talenti_bubble(pr.model.n, lam, pr.grid.active_r(j)) - shift;
    double q = pr.assembly.quotient(v, 0.0, pcrit);
    rows.push_back({{"lambda", lam}, {"Q", q}});
    if (q < best_q) {
      best_q = q;
      best_lam = lam;
    }
  }
  double sphere = sphere_yamabe_constant(pr.model.n);
  ordered_json j;
  j["command"] = "bubble";
  j["config"] = ordered_json::parse(cfg.canonical_json());
  j["table"] = rows;
  j["min_Q"] = best_q;
  j["best_lambda"] = best_lam;
  j["sphere_constant"] = sphere;
  j["gap_rel"] = (best_q - sphere) / sphere;
  emit(out_dir, "summary.json", j.dump(2) + "\n");
  if (!quiet)
    std::cout << "bubble: min Q=" << format_double(best_q) << " at lambda=" << format_double(best_lam)
              << " rel gap=" << format_double((best_q - sphere) / sphere) << "\n";
  return 0;
}

int cmd_audit(const RunConfig& cfg, const std::string& out_dir, bool quiet) {
  WeightSpec w;
  ordered_json j;
  j["command"] = "audit";
  j["config"] = ordered_json::parse(cfg.canonical_json());
  ordered_json checks = ordered_json::array();
  int failures = 0;

  auto record = [&](const std::string& name, bool ok, ordered_json detail) {
    detail["check"] = name;
    detail["ok"] = ok;
    checks.push_back(detail);
    if (!ok) ++failures;
    if (!quiet) std::cout << "audit: " << name << (ok ? " ok" : " VIOLATION") << "\n";
  };

  for (const std::string& label : cfg.audit.models) {
    ModelManifold m = make_model(label);
    double r_max = (m.warp.kind == WarpKind::sphere) ? M_PI : cfg.r_max;
    RadialGrid g = build_grid(m, 0.0, r_max, cfg.N);
    OperatorAssembly a = assemble(m, g, w);

    // monotonicity matrix; two deterministic starts per cell
    std::vector<QPoint> points;
    std::vector<Extremal> cell_extremals;
    for (double p : cfg.audit.ps) {
      for (double al : cfg.audit.alphas) {
        MinimizeConfig mc = cfg.minimize;
        mc.init = MinimizeInit::gaussian_bump;
        Extremal e1 = minimize_Q(a, al, p, mc);
        mc.init = MinimizeInit::constant;
        Extremal e2 = minimize_Q(a, al, p, mc);
        const Extremal& best = (e1.Q <= e2.Q) ? e1 : e2;
        points.push_back({al, p, best.Q});
        cell_extremals.push_back(best);
      }
    }
    AuditReport rep = audit_monotonicity(points, cfg.audit.tol, a.p_crit);
    ordered_json viol = ordered_json::array();
    for (const AuditViolation& x : rep.violations)
      viol.push_back({{"kind", x.kind}, {"alpha_a", x.alpha_a}, {"alpha_b", x.alpha_b},
                      {"p", x.p}, {"lhs", x.lhs}, {"rhs", x.rhs}});
    record("monotonicity[" + label + "]", rep.ok(),
           {{"violations", viol}, {"terminal_alpha_gap", rep.terminal_alpha_gap}});

    ConsistencyReport qmu = q_equals_mu_check(a, 1e-8);
    record("q_equals_mu[" + label + "]", qmu.ok,
           {{"q_p2", qmu.q_p2}, {"mu", qmu.mu}, {"rel_gap", qmu.rel_gap}});

    bool maxpt_ok = true;
    for (const Extremal& e : cell_extremals)
      maxpt_ok = maxpt_ok && max_point_check(m, e, 1e-6);
    record("max_point[" + label + "]", maxpt_ok, ordered_json::object());
  }

  {
    ScalingReport rep = subcritical_scaling_check(3, cfg.audit.scaling_s, cfg.audit.scaling_R1,
                                                  cfg.audit.scaling_R2, cfg.audit.scaling_N,
                                                  cfg.minimize, cfg.audit.scaling_tol);
    record("subcritical_scaling", rep.ok,
           {{"Q1", rep.Q1}, {"Q2", rep.Q2}, {"observed_ratio", rep.observed_ratio},
            {"expected_ratio", rep.expected_ratio}, {"exponent", rep.exponent}});
  }

  {
    // decay on a weighted subcritical flat extremal
    ModelManifold flat = make_model("flat3");
    RadialGrid g = build_grid(flat, 0.0, 30.0, cfg.N);
    OperatorAssembly a = assemble(flat, g, w);
    Extremal e = minimize_Q(a, 0.5, 4.0, cfg.minimize);
    record("decay[flat3,alpha=0.5,p=4]", decay_check(e, g, 0.1, 0.05),
           {{"sup_v", e.sup_v}, {"argmax_r", e.argmax_r}});
  }

  {
    // certify the final extremal of a continuation run
    ModelManifold m = make_model(cfg.audit.continuation_model);
    double r_max = (m.warp.kind == WarpKind::sphere) ? M_PI : cfg.r_max;
    RadialGrid g = build_grid(m, 0.0, r_max, cfg.N);
    Schedule sched = Schedule::defaults(m.p_crit());
    ContinuationTrace trace = run_continuation(m, g, w, sched, cfg.minimize);
    bool ok = trace.completed && trace.final && certify_mu1(*trace.final, 1e-6);
    record("certify_mu1[" + cfg.audit.continuation_model + "]", ok,
           {{"completed", trace.completed}});
  }

  j["checks"] = checks;
  j["failures"] = failures;
  emit(out_dir, "summary.json", j.dump(2) + "\n");
  return failures == 0 ? 0 : 1;
}

int cmd_models(const std::string& out_dir, bool quiet) {
  ordered_json j;
  j["command"] = "models";
  j["labels"] = model_registry_labels();
  emit(out_dir, "summary.json", j.dump(2) + "\n");
  if (!quiet)
    for (const std::string& s : model_registry_labels()) std::cout << s << "\n";
  return 0;
}

int run_command(const std::string& name, const RunConfig& cfg, const std::string& out_dir,
                bool quiet) {
  try {
    if (name == "q") return cmd_q(cfg, out_dir, quiet);
    if (name == "mu") return cmd_mu(cfg, out_dir, quiet);
    if (name == "continue") return cmd_continue(cfg, out_dir, quiet);
    if (name == "qinf") return cmd_qinf(cfg, out_dir, quiet);
    if (name == "audit") return cmd_audit(cfg, out_dir, quiet);
    if (name == "bubble") return cmd_bubble(cfg, out_dir, quiet);
    if (name == "models") return cmd_models(out_dir, quiet);
    std::cerr << "unknown subcommand '" << name << "'\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 3;
  } catch (const PreconditionError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace yamabe
