#include <doctest.h>

#include <cmath>
#include <random>

#include "oracle_utils.hpp"
#include "yamabe/minimize.hpp"
#include "yamabe/spectral.hpp"

using namespace yamabe;

namespace {
const WeightSpec kWeight;

OperatorAssembly make(const char* label, double r0, double r1, int N) {
  ModelManifold m = make_model(label);
  RadialGrid g = build_grid(m, r0, r1, N);
  return assemble(m, g, kWeight);
}
}  // namespace

TEST_CASE("p=2 minimization returns mu and the bottom eigenfield") {
  for (const char* label : {"sphere3", "flat3"}) {
    ModelManifold m = make_model(label);
    double r_max = m.warp.kind == WarpKind::sphere ? M_PI : 10.0;
    RadialGrid g = build_grid(m, 0.0, r_max, 600);
    OperatorAssembly a = assemble(m, g, kWeight);
    MinimizeConfig cfg;
    cfg.residual_tol = 1e-9;
    Extremal e = minimize_Q(a, 0.0, 2.0, cfg);
    SpectralResult mu = mu_bottom(a, 1e-9);
    CHECK(e.Q == doctest::Approx(mu.value).epsilon(1e-9));
    // eigenfield match up to normalization: compare normalized shapes
    double scale = 0.0;
    int mid = a.dof() / 2;
    scale = e.v[mid] / mu.eigenfield[mid];
    for (int j = 0; j < a.dof(); j += 37)
      CHECK(e.v[j] == doctest::Approx(scale * mu.eigenfield[j]).epsilon(1e-5));
  }
}

TEST_CASE("sphere critical minimization hits the closed-form constant") {
  OperatorAssembly a = make("sphere3", 0.0, M_PI, 2000);
  MinimizeConfig cfg;
  Extremal e = minimize_Q(a, 0.0, 6.0, cfg);
  CHECK(e.Q == doctest::Approx(sphere_yamabe_constant(3)).epsilon(5e-3));
  CHECK(e.residual <= cfg.residual_tol);
  CHECK(std::abs(a.weighted_p_norm(e.v, 0.0, 6.0) - 1.0) <= 1e-12);
  for (int j = 0; j < e.v.size(); ++j) CHECK(e.v[j] > 0.0);
}

TEST_CASE("monotone descent of the accepted Q sequence") {
  OperatorAssembly a = make("cylbump3:c=0.5,blend=1", 0.0, 20.0, 600);
  MinimizeConfig cfg;
  Extremal e = minimize_Q(a, 0.3, 4.5, cfg);
  REQUIRE(e.q_history.size() > 2);
  for (size_t k = 1; k < e.q_history.size(); ++k)
    CHECK(e.q_history[k] <= e.q_history[k - 1] + 1e-12 * (1.0 + std::abs(e.q_history[k - 1])));
}

TEST_CASE("el_residual semantics") {
  OperatorAssembly a = make("sphere3", 0.0, M_PI, 500);
  MinimizeConfig cfg;
  cfg.residual_tol = 1e-10;

  SUBCASE("eigenfield at p=2 is a discrete critical point") {
    Extremal e = minimize_Q(a, 0.0, 2.0, cfg);
    CHECK(el_residual(a, e.v, e.Q, 0.0, 2.0) <= 1e-10);
  }

  SUBCASE("single-node perturbation breaks criticality measurably") {
    Extremal e = minimize_Q(a, 0.0, 4.0, cfg);
    double base = el_residual(a, e.v, e.Q, 0.0, 4.0);
    DiscreteField w = e.v;
    int mid = w.size() / 2;
    w[mid] *= 1.01;
    double pert = el_residual(a, w, e.Q, 0.0, 4.0);
    CHECK(pert > 100.0 * base);
    CHECK(pert > 1e-4);
  }

  SUBCASE("converged extremal meets the default tolerance") {
    MinimizeConfig dflt;
    Extremal e = minimize_Q(a, 0.0, 6.0, dflt);
    CHECK(e.residual <= dflt.residual_tol);
    CHECK(el_residual(a, e.v, a.quotient(e.v, 0.0, 6.0), 0.0, 6.0) <= dflt.residual_tol);
  }

  SUBCASE("zero field rejected") {
    CHECK_THROWS_AS(el_residual(a, DiscreteField(a.dof(), 0.0), 1.0, 0.0, 2.0),
                    std::invalid_argument);
  }
}

TEST_CASE("gradient consistency against central differences") {
  OperatorAssembly a = make("flat3", 0.0, 6.0, 40);
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> unif(0.2, 1.0);
  for (auto [alpha, p] : std::initializer_list<std::pair<double, double>>{
           {0.0, 2.0}, {0.5, 4.0}, {0.2, 6.0}}) {
    for (int trial = 0; trial < 5; ++trial) {
      DiscreteField v(a.dof());
      for (int j = 0; j < v.size(); ++j) v[j] = unif(rng);
      std::vector<double> g = quotient_gradient(a, v, alpha, p);
      for (int j = 3; j < v.size(); j += 11) {
        double eps = 1e-6;
        DiscreteField vp = v, vm = v;
        vp[j] += eps;
        vm[j] -= eps;
        double fd = (a.quotient(vp, alpha, p) - a.quotient(vm, alpha, p)) / (2.0 * eps);
        CHECK(g[static_cast<size_t>(j)] ==
              doctest::Approx(fd).epsilon(1e-6).scale(std::max(1.0, std::abs(fd))));
      }
    }
  }
}

TEST_CASE("flat ball p=4 matches the brute-force multistart optimizer") {
  OperatorAssembly a = make("flat3", 0.0, 1.0, 24);
  MinimizeConfig cfg;
  Extremal e = minimize_Q(a, 0.0, 4.0, cfg);
  auto fn = [&](const std::vector<double>& x) {
    DiscreteField v{x};
    double nr = a.weighted_p_norm(v, 0.0, 4.0);
    if (!(nr > 0.0)) return 1e300;
    return a.energy(v) / (nr * nr);
  };
  double brute = oracle::multistart_descent(fn, a.dof(), 20, 777, oracle::operator_diag_metric(a));
  CHECK(e.Q == doctest::Approx(brute).epsilon(1e-4));
}

TEST_CASE("oracle equivalence across the model/exponent matrix") {
  // N <= 24 grids; flat, sphere, hyperbolic; p in {2, 4, p_crit - eps}
  for (const char* label : {"flat3", "sphere3", "hyperbolic3"}) {
    ModelManifold m = make_model(label);
    double r_max = m.warp.kind == WarpKind::sphere ? M_PI : 4.0;
    RadialGrid g = build_grid(m, 0.0, r_max, 22);
    OperatorAssembly a = assemble(m, g, kWeight);
    for (double p : {2.0, 4.0, 5.9}) {
      MinimizeConfig cfg;
      Extremal e = minimize_Q(a, 0.0, p, cfg);
      auto fn = [&](const std::vector<double>& x) {
        DiscreteField v{x};
        double nr = a.weighted_p_norm(v, 0.0, p);
        if (!(nr > 0.0)) return 1e300;
        return a.energy(v) / (nr * nr);
      };
      double brute = oracle::multistart_descent(fn, a.dof(), 20, 4242 + static_cast<int>(p * 10),
                                                oracle::operator_diag_metric(a));
      INFO(label << " p=" << p << " solver=" << e.Q << " brute=" << brute);
      CHECK(e.Q == doctest::Approx(brute).epsilon(1e-4));
    }
  }
}

TEST_CASE("max_point_check") {
  SUBCASE("sphere critical: equality at the constant solution") {
    ModelManifold m = make_model("sphere3");
    RadialGrid g = build_grid(m, 0.0, M_PI, 1200);
    OperatorAssembly a = assemble(m, g, kWeight);
    MinimizeConfig cfg;
    Extremal e = minimize_Q(a, 0.0, 6.0, cfg);
    CHECK(max_point_check(m, e, 1e-6));
  }

  SUBCASE("nonpositive curvature: trivially true") {
    ModelManifold m = make_model("hyperbolic3");
    RadialGrid g = build_grid(m, 0.0, 12.0, 800);
    OperatorAssembly a = assemble(m, g, kWeight);
    MinimizeConfig cfg;
    Extremal e = minimize_Q(a, 0.2, 4.0, cfg);
    CHECK(max_point_check(m, e, 1e-6));
  }

  SUBCASE("negative control: a non-critical field may fail") {
    ModelManifold m = make_model("cylbump3:c=0.5,blend=1");
    Extremal fake;
    fake.Q = 1.0;
    fake.alpha = 0.0;
    fake.p = 6.0;
    fake.p_crit = 6.0;
    fake.sup_v = 0.01;     // tiny maximum on the positive-sigma end
    fake.argmax_r = 10.0;  // sigma = 8 there
    CHECK_FALSE(max_point_check(m, fake, 1e-6));
  }
}

TEST_CASE("decay_check") {
  ModelManifold flat = make_model("flat3");
  RadialGrid g = build_grid(flat, 0.0, 30.0, 1200);
  OperatorAssembly a = assemble(flat, g, kWeight);
  MinimizeConfig cfg;

  SUBCASE("weighted subcritical extremal decays") {
    Extremal e = minimize_Q(a, 0.5, 4.0, cfg);
    CHECK(decay_check(e, g, 0.1, 0.05));
    CHECK(e.argmax_r < 15.0);
  }

  SUBCASE("constant field fails") {
    Extremal fake;
    fake.v = DiscreteField(a.dof(), 1.0);
    fake.alpha = 0.5;
    fake.p = 4.0;
    fake.p_crit = 6.0;
    fake.sup_v = 1.0;
    fake.argmax_node = 0;
    fake.argmax_r = 0.0;
    CHECK_FALSE(decay_check(fake, g, 0.1, 0.05));
  }

  SUBCASE("critical or unweighted extremals are vacuously true") {
    ModelManifold m = make_model("sphere3");
    RadialGrid gs = build_grid(m, 0.0, M_PI, 500);
    OperatorAssembly as = assemble(m, gs, kWeight);
    Extremal e = minimize_Q(as, 0.0, 6.0, cfg);
    CHECK(decay_check(e, gs, 0.1, 0.05));
    CHECK(e.argmax_node < as.dof() - as.dof() / 10);
  }
}

TEST_CASE("constraint normalization and determinism") {
  OperatorAssembly a = make("flat3", 0.0, 8.0, 500);
  MinimizeConfig cfg;
  Extremal e1 = minimize_Q(a, 0.3, 5.0, cfg);
  Extremal e2 = minimize_Q(a, 0.3, 5.0, cfg);
  CHECK(std::abs(a.weighted_p_norm(e1.v, 0.3, 5.0) - 1.0) <= 1e-12);
  CHECK(e1.Q == e2.Q);  // bit-identical reruns
  for (int j = 0; j < e1.v.size(); ++j) CHECK(e1.v[j] == e2.v[j]);
  CHECK(e1.norm_pcrit_unweighted == doctest::Approx(a.weighted_p_norm(e1.v, 0.0, 6.0)));
}

TEST_CASE("invalid arguments") {
  OperatorAssembly a = make("flat3", 0.0, 5.0, 50);
  MinimizeConfig cfg;
  CHECK_THROWS_AS(minimize_Q(a, -0.1, 4.0, cfg), std::invalid_argument);
  CHECK_THROWS_AS(minimize_Q(a, 0.0, 1.5, cfg), std::invalid_argument);
  CHECK_THROWS_AS(minimize_Q(a, 0.0, 7.0, cfg), std::invalid_argument);
  MinimizeConfig bad;
  bad.armijo_backtrack = 1.5;
  CHECK_THROWS_AS(minimize_Q(a, 0.0, 4.0, bad), std::invalid_argument);
  DiscreteField wrong(3, 1.0);
  CHECK_THROWS_AS(minimize_Q(a, 0.0, 4.0, cfg, wrong), std::invalid_argument);
}
