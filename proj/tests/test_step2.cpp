#include <doctest.h>

#include <cmath>
#include <random>

#include "step2.hpp"
#include "test_helpers.hpp"
#include "util.hpp"

using namespace ps3;
using ps3::testing::default_config;

namespace {
Step2Problem all_feasible(int n) {
  Step2Problem p;
  p.horizon = n;
  p.relaxed_gear = Eigen::MatrixXd::Constant(n, 6, 1.0 / 6.0);
  p.relaxed_engine = Eigen::VectorXd::Constant(n, 1.0);
  p.feas_off = Eigen::MatrixXi::Ones(n, 6);
  p.feas_on = Eigen::MatrixXi::Ones(n, 6);
  p.initial_gear = 2;
  p.initial_engine = 1;
  return p;
}
}  // namespace

TEST_CASE("hat encoding is a one-hot partition of unity") {
  const auto enc = hat_encode_gear({1.0, 2.5, 3.2, 6.0, 7.3});
  for (int k = 0; k < enc.rows(); ++k) CHECK(enc.row(k).sum() == doctest::Approx(1.0));
  CHECK(enc(0, 0) == 1.0);
  CHECK(enc(1, 1) == doctest::Approx(0.5));
  CHECK(enc(1, 2) == doctest::Approx(0.5));
  CHECK(enc(2, 2) == doctest::Approx(0.8));
  CHECK(enc(2, 3) == doctest::Approx(0.2));
  CHECK(enc(3, 5) == 1.0);
  CHECK(enc(4, 5) == 1.0);  // clamped into [1, 6]
}

TEST_CASE("feasibility matrices: stops, redline, and torque-budget nesting") {
  const auto& cfg = default_config();
  const int n = 4;
  std::vector<double> v{0.0, 10.0, 24.5, 16.0};
  std::vector<double> a{0.0, 0.3, 0.0, 0.8};
  DriveCycle cycle = make_cycle(std::vector<double>(n + 1, 0.0), {});

  Eigen::MatrixXi b0, b1;
  build_feasibility(v, a, cycle, cfg, &b0, &b1);

  // Stopped row: zero demand, every gear feasible both ways.
  for (int j = 0; j < 6; ++j) {
    CHECK(b0(0, j) == 1);
    CHECK(b1(0, j) == 1);
  }
  // Near-top speed in gear 1 exceeds the redline.
  const double omega_g1 = cfg.vehicle.gear_ratios[0] * 24.5 / cfg.vehicle.wheel_radius_m;
  REQUIRE(omega_g1 > cfg.engine.max_speed_radps);
  CHECK(b0(2, 0) == 0);
  CHECK(b1(2, 0) == 0);
  // Torque budget with the engine is a superset of EM-only.
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < 6; ++j)
      if (b0(k, j) == 1) CHECK(b1(k, j) == 1);
}

TEST_CASE("integral dwell-respecting input is a fixed point with zero objective") {
  auto p = all_feasible(10);
  // Gear 2 for 5 steps then gear 3; engine on throughout.
  for (int k = 0; k < 10; ++k) {
    p.relaxed_gear.row(k).setZero();
    p.relaxed_gear(k, k < 5 ? 1 : 2) = 1.0;
  }
  const auto miqp = solve_miqp(p);
  const auto dp = solve_dp(p);
  CHECK(miqp.objective == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(dp.objective == doctest::Approx(0.0).epsilon(1e-12));
  for (int k = 0; k < 10; ++k) {
    CHECK(miqp.gear[static_cast<std::size_t>(k)] == (k < 5 ? 2 : 3));
    CHECK(miqp.engine[static_cast<std::size_t>(k)] == 1);
  }
}

TEST_CASE("one-second gear blip is suppressed or stretched, matching enumeration") {
  auto p = all_feasible(6);
  for (int k = 0; k < 6; ++k) {
    p.relaxed_gear.row(k).setZero();
    p.relaxed_gear(k, k == 2 ? 3 : 1) = 1.0;  // blip to gear 4 at step 2
  }
  const double brute = enumerate_schedules(p);
  const auto miqp = solve_miqp(p);
  const auto dp = solve_dp(p);
  CHECK(miqp.objective == doctest::Approx(brute).epsilon(1e-12));
  CHECK(dp.objective == doctest::Approx(brute).epsilon(1e-12));
  // Either the blip is dropped or the gear is held >= 4 samples.
  int changes = 0;
  for (int k = 1; k < 6; ++k)
    if (miqp.gear[static_cast<std::size_t>(k)] != miqp.gear[static_cast<std::size_t>(k) - 1])
      ++changes;
  CHECK(changes != 1);  // a lone 1 s excursion would need two changes 1 s apart
}

TEST_CASE("uniform half engine request matches enumeration at N = 5") {
  auto p = all_feasible(5);
  p.relaxed_engine.setConstant(0.5);
  for (int k = 0; k < 5; ++k) {
    p.relaxed_gear.row(k).setZero();
    p.relaxed_gear(k, 1) = 1.0;  // gear matches the initial gear exactly
  }
  const double brute = enumerate_schedules(p);
  const auto miqp = solve_miqp(p);
  const auto dp = solve_dp(p);
  CHECK(miqp.objective == doctest::Approx(brute).epsilon(1e-12));
  CHECK(dp.objective == doctest::Approx(brute).epsilon(1e-12));
  // Any constant engine status costs 0.25 per step; gear tracking is free.
  CHECK(brute == doctest::Approx(5 * 0.25).epsilon(1e-12));
}

TEST_CASE("uniform relaxed input admits a constant optimal schedule") {
  auto p = all_feasible(9);
  const auto dp = solve_dp(p);
  // Constant schedule cost: engine matches (cost 0), uniform gear rows
  // cost (1-1/6)^2 + 5*(1/6)^2 each.
  const double per_step = std::pow(1.0 - 1.0 / 6.0, 2) + 5.0 * std::pow(1.0 / 6.0, 2);
  CHECK(dp.objective == doctest::Approx(9 * per_step).epsilon(1e-12));
}

TEST_CASE("N = 1 picks the cheapest feasible assignment") {
  auto p = all_feasible(1);
  p.relaxed_gear.row(0).setZero();
  p.relaxed_gear(0, 4) = 1.0;
  p.relaxed_engine[0] = 0.2;
  const auto dp = solve_dp(p);
  CHECK(dp.gear[0] == 5);
  CHECK(dp.engine[0] == 0);
  CHECK(dp.objective == doctest::Approx(0.2 * 0.2).epsilon(1e-12));
  const auto miqp = solve_miqp(p);
  CHECK(miqp.objective == doctest::Approx(dp.objective).epsilon(1e-12));
}

TEST_CASE("random small instances: MIQP and DP match exhaustive enumeration") {
  for (unsigned seed = 0; seed < 12; ++seed) {
    const auto p = random_instance(6, 1000 + seed);
    const double brute = enumerate_schedules(p);
    const auto miqp = solve_miqp(p);
    const auto dp = solve_dp(p);
    CAPTURE(seed);
    CHECK(std::abs(miqp.objective - brute) <= 1e-9);
    CHECK(std::abs(dp.objective - brute) <= 1e-9);
    validate_schedule(p, miqp);
    validate_schedule(p, dp);
  }
}

TEST_CASE("equivalence harness on N = 50 instances") {
  for (unsigned seed = 0; seed < 10; ++seed) {
    const auto p = random_instance(50, 7000 + seed, seed % 3 == 0);
    const auto report = check_equivalence(p, "/tmp");
    CHECK(report.equal);
  }
}

TEST_CASE("node bounds never exceed the final objective") {
  const auto p = random_instance(30, 42);
  Step2Stats stats;
  const auto schedule = solve_miqp(p, &stats);
  CHECK(stats.root_bound <= schedule.objective + 1e-12);
  for (double b : stats.node_bounds) CHECK(b <= schedule.objective + 1e-9);
  CHECK(stats.nodes_explored > 0);
}

TEST_CASE("counter replay reproduces schedules and flags violations") {
  auto p = all_feasible(8);
  DiscreteSchedule s;
  s.gear = {2, 2, 2, 2, 3, 3, 3, 3};
  s.engine = {1, 1, 1, 0, 0, 0, 1, 1};
  replay_counters(p, &s);
  CHECK(s.sigma_gear[3] == 4);
  CHECK(s.sigma_gear[4] == 1);
  CHECK(s.sigma_engine[2] == 3);
  CHECK(s.sigma_engine[3] == 1);

  DiscreteSchedule bad = s;
  bad.gear = {2, 3, 2, 2, 2, 2, 2, 2};  // two changes 1 s apart
  CHECK_THROWS_AS(replay_counters(p, &bad), Error);

  DiscreteSchedule bad_engine = s;
  bad_engine.engine = {1, 0, 1, 1, 1, 1, 1, 1};
  CHECK_THROWS_AS(replay_counters(p, &bad_engine), Error);
}

TEST_CASE("infeasible rows raise Infeasible in every solver") {
  auto p = all_feasible(4);
  // Force a step where holding is impossible and dwell forbids a change:
  // gear 5 required at steps 0..1, then only gear 1 feasible at step 2.
  p.feas_on.setZero();
  p.feas_off.setZero();
  for (int k = 0; k < 2; ++k) p.feas_on(k, 4) = 1;
  p.feas_on(2, 0) = 1;
  p.feas_on(3, 0) = 1;
  CHECK_THROWS_AS(solve_dp(p), Error);
  CHECK_THROWS_AS(solve_miqp(p), Error);
  CHECK_THROWS_AS(enumerate_schedules(p), Error);
}

TEST_CASE("instance serialization round-trips") {
  const auto p = random_instance(12, 99);
  const auto q = Step2Problem::from_json_text(p.to_json());
  CHECK(q.horizon == p.horizon);
  CHECK((q.relaxed_gear - p.relaxed_gear).lpNorm<Eigen::Infinity>() < 1e-12);
  CHECK((q.relaxed_engine - p.relaxed_engine).lpNorm<Eigen::Infinity>() < 1e-12);
  CHECK(q.feas_off == p.feas_off);
  CHECK(q.feas_on == p.feas_on);
  CHECK(q.initial_gear == p.initial_gear);
  CHECK(q.initial_engine == p.initial_engine);
  const auto s1 = solve_dp(p);
  const auto s2 = solve_dp(q);
  CHECK(s1.objective == doctest::Approx(s2.objective).epsilon(1e-15));
}
