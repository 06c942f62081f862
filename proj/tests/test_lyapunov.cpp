#include <doctest.h>

#include <sstream>

#include "consim/lyapunov.hpp"
#include "oracles.hpp"

using namespace consim;

TEST_SUITE_BEGIN("lyapunov");

namespace {

Trajectory constant_trajectory(const Eigen::VectorXd& x, int steps) {
  Trajectory traj;
  for (int k = 0; k <= steps; ++k) {
    traj.times.push_back(0.1 * k);
    traj.states.push_back(x);
    SelectionState sel;
    sel.nu = Eigen::VectorXd::Zero(x.size());
    sel.sliding_mask.assign(x.size(), false);
    sel.derivative = Eigen::VectorXd::Zero(x.size());
    traj.selections.push_back(std::move(sel));
  }
  return traj;
}

}  // namespace

TEST_CASE("pointwise evaluation") {
  SUBCASE("constant trajectory at (1, 1)") {
    auto g = build_graph(2, {{0, 1, 1.0}, {1, 0, 1.0}});
    auto sys = make_system(g, {sign_fn(1.0), sign_fn(1.0)});
    Eigen::VectorXd x(2);
    x << 1.0, 1.0;
    auto trace = evaluate_lyapunov(sys, constant_trajectory(x, 5));
    for (double v : trace.v_max) CHECK(v == 1.0);
    for (double w : trace.w_neg_min) CHECK(w == -1.0);
    CHECK_FALSE(trace.has_v1());
  }
  SUBCASE("argmax/argmin sets at (1, 3, 2)") {
    auto g = build_graph(3, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 0, 1.0}});
    auto sys = make_system(g, std::vector<MonotoneFn>(3, sign_fn(1.0)));
    Eigen::VectorXd x(3);
    x << 1.0, 3.0, 2.0;
    auto trace = evaluate_lyapunov(sys, constant_trajectory(x, 1));
    CHECK(trace.v_max[0] == 3.0);
    CHECK(trace.w_neg_min[0] == -1.0);
    CHECK(trace.argmax_sets[0] == std::vector<int>{1});
    CHECK(trace.argmin_sets[0] == std::vector<int>{0});
  }
  SUBCASE("V1 uses the primitive weighted by the Perron vector") {
    auto g = build_graph(2, {{0, 1, 1.0}, {1, 0, 1.0}});
    auto sys = make_system(g, {quantizer_symmetric({1.0}), quantizer_symmetric({1.0})});
    auto perron = left_perron(sys.lap);
    CHECK(perron.w(0) == doctest::Approx(0.5));
    Eigen::VectorXd x(2);
    x << 1.0, 0.4;
    auto trace = evaluate_lyapunov(sys, constant_trajectory(x, 1), perron);
    REQUIRE(trace.has_v1());
    // 0.5 * F(1.0) + 0.5 * F(0.4) = 0.5 * 0.5 + 0 = 0.25
    CHECK(trace.v1[0] == doctest::Approx(0.25).epsilon(1e-12));
  }
}

TEST_CASE("monotonicity_report thresholds") {
  LyapunovTrace trace;
  trace.times = {0, 1, 2, 3};
  trace.v_max = {3.0, 2.0, 1.5, 1.0};       // strictly decreasing
  trace.w_neg_min = {1.0, 1.0, 1.0, 1.0};   // constant

  auto rep = monotonicity_report(trace, 0.0);
  CHECK(rep.v.pass);
  CHECK(rep.v.max_increase <= 0.0);
  CHECK(rep.w.pass);
  CHECK(rep.w.max_increase == 0.0);
  CHECK_FALSE(rep.v1.has_value());
  CHECK(rep.all_pass());

  // a 2e-3 bump against slack 1e-3 fails and reports the offending step
  trace.v_max = {3.0, 2.0, 2.002, 1.0};
  auto bumped = monotonicity_report(trace, 1e-3);
  CHECK_FALSE(bumped.v.pass);
  CHECK(bumped.v.max_increase == doctest::Approx(2e-3));
  CHECK(bumped.v.worst_step == 1);
  CHECK_FALSE(bumped.all_pass());

  CHECK_THROWS_AS(monotonicity_report(trace, -1.0), Error);
}

TEST_CASE("V1 is non-increasing along strongly connected trajectories") {
  oracle::Rand rng(103);
  for (int rep = 0; rep < 10; ++rep) {
    int n = rng.uniform_int(2, 6);
    auto g = oracle::random_digraph(rng, n, 0.5, false, true);
    std::vector<MonotoneFn> fs;
    for (int i = 0; i < n; ++i)
      fs.push_back(rng.uniform() < 0.5 ? MonotoneFn(quantizer_symmetric({1.0}))
                                       : MonotoneFn(sign_fn(1.0)));
    auto sys = make_system(std::move(g), std::move(fs));
    auto perron = left_perron(sys.lap);

    IntegratorConfig cfg;
    cfg.dt = 0.01;
    cfg.t_end = 15.0;
    Eigen::VectorXd x0(n);
    for (int i = 0; i < n; ++i) x0(i) = rng.uniform(-3.0, 3.0);
    auto traj = integrate(sys, x0, cfg);

    double sup_nu = 0.0;
    for (const auto& sel : traj.selections)
      sup_nu = std::max(sup_nu, sel.nu.cwiseAbs().maxCoeff());
    double slack = 2.0 * cfg.dt * sys.lap.in_degrees.maxCoeff() * sup_nu;

    auto trace = evaluate_lyapunov(sys, traj, perron);
    auto report = monotonicity_report(trace, slack);
    REQUIRE(report.v1.has_value());
    CHECK(report.v1->pass);
  }
}

TEST_CASE("V and W are non-increasing for homogeneous spanning-tree systems") {
  oracle::Rand rng(107);
  for (int rep = 0; rep < 10; ++rep) {
    int n = rng.uniform_int(2, 6);
    auto g = oracle::random_digraph(rng, n, 0.5, true, false);
    auto sys = make_system(std::move(g), std::vector<MonotoneFn>(n, quantizer_symmetric({1.0})));

    IntegratorConfig cfg;
    cfg.dt = 0.01;
    cfg.t_end = 15.0;
    Eigen::VectorXd x0(n);
    for (int i = 0; i < n; ++i) x0(i) = rng.uniform(-3.0, 3.0);
    auto traj = integrate(sys, x0, cfg);

    double sup_nu = 0.0;
    for (const auto& sel : traj.selections)
      sup_nu = std::max(sup_nu, sel.nu.cwiseAbs().maxCoeff());
    double slack = 2.0 * cfg.dt * sys.lap.in_degrees.maxCoeff() * sup_nu;

    auto report = monotonicity_report(evaluate_lyapunov(sys, traj), slack);
    CHECK(report.v.pass);
    CHECK(report.w.pass);
  }
}

TEST_CASE("V1 is radially unbounded under the sign condition") {
  oracle::Rand rng(109);
  auto g = oracle::random_digraph(rng, 4, 0.7, false, true);
  std::vector<MonotoneFn> fs = {quantizer_symmetric({1.0}), quantizer_asymmetric({1.0}),
                                quantizer_logarithmic({1.0}), sign_fn(1.0)};
  auto sys = make_system(std::move(g), std::move(fs));
  auto perron = left_perron(sys.lap);

  auto v1_at = [&](const Eigen::VectorXd& x) {
    auto trace = evaluate_lyapunov(sys, constant_trajectory(x, 0), perron);
    return trace.v1[0];
  };
  for (int rep = 0; rep < 20; ++rep) {
    Eigen::VectorXd u(4);
    for (int i = 0; i < 4; ++i) u(i) = rng.uniform(-1.0, 1.0);
    u.normalize();
    double prev = v1_at(100.0 * u);
    for (double r : {1e3, 1e4}) {
      double cur = v1_at(r * u);
      CHECK(cur > prev);
      prev = cur;
    }
  }
}

TEST_CASE("lyapunov csv format") {
  auto g = build_graph(2, {{0, 1, 1.0}, {1, 0, 1.0}});
  auto sys = make_system(g, {sign_fn(1.0), sign_fn(1.0)});
  Eigen::VectorXd x(2);
  x << 1.0, -0.5;
  auto trace = evaluate_lyapunov(sys, constant_trajectory(x, 1));
  std::ostringstream os;
  write_lyapunov_csv(trace, os);
  std::string body = os.str();
  CHECK(body.rfind("t,V,W,V1\n", 0) == 0);
  CHECK(body.find("nan") != std::string::npos);  // V1 absent
}

TEST_SUITE_END();
