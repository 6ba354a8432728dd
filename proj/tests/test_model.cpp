#include <doctest.h>

#include <cmath>
#include <random>

#include "model.hpp"
#include "test_helpers.hpp"
#include "util.hpp"

using namespace ps3;
using ps3::testing::default_config;
using ps3::testing::flat_battery;

namespace {
// Independent oracle: smaller root of Voc I - R0 I^2 = P via the
// quadratic formula, verified by back-substitution before use.
double current_oracle(double voc, double r0, double p) {
  const double disc = voc * voc - 4.0 * r0 * p;
  const double root = (voc - std::sqrt(disc)) / (2.0 * r0);
  REQUIRE(voc * root - r0 * root * root == doctest::Approx(p).epsilon(1e-12));
  return root;
}
}  // namespace

TEST_CASE("battery current: zero power gives zero current") {
  const auto bp = flat_battery(0.1, 350.0);
  CHECK(battery_current(0.0, 0.55, bp) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("battery current matches the quadratic oracle") {
  const auto bp = flat_battery(0.1, 350.0);
  // Oracle values for (Voc 350, R0 0.1): discharge 3500 W and charge
  // -3500 W with 0.9 coulombic efficiency.
  const double discharge = current_oracle(350.0, 0.1, 3500.0);
  CHECK(discharge == doctest::Approx(10.0287358695).epsilon(1e-9));
  CHECK(battery_current(3500.0, 0.55, bp) == doctest::Approx(discharge).epsilon(1e-12));

  const double charge = 0.9 * current_oracle(350.0, 0.1, -3500.0);
  CHECK(charge == doctest::Approx(-8.9744316118).epsilon(1e-9));
  CHECK(battery_current(-3500.0, 0.55, bp) == doctest::Approx(charge).epsilon(1e-12));
}

TEST_CASE("battery current rejects power beyond the peak") {
  const auto bp = flat_battery(0.1, 350.0);
  const double peak = 350.0 * 350.0 / (4.0 * 0.1);
  CHECK_THROWS_AS(battery_current(peak * 1.01, 0.55, bp), Error);
}

TEST_CASE("battery current back-substitutes on random feasible discharge points") {
  const auto& cfg = default_config();
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> soc(0.3, 0.8), power(0.0, 60000.0);
  for (int i = 0; i < 10000; ++i) {
    const double z = soc(rng), p = power(rng);
    const double ib = battery_current(p, z, cfg.battery);
    const double back = cfg.battery.voc_v(z) * ib - cfg.battery.r0_ohm(z) * ib * ib;
    CHECK(back == doctest::Approx(p).epsilon(1e-9));
    // Charge-balance sign: discharge drains.
    double dsoc, dtemp;
    battery_derivatives({z, 25.0}, p, cfg.battery, &dsoc, &dtemp);
    if (ib > 0) CHECK(dsoc < 0);
  }
}

TEST_CASE("battery derivatives: unit conversion, equilibrium and ohmic sign") {
  auto bp = flat_battery(0.1, 350.0);
  bp.nominal_capacity_ah = 31.0;

  double dsoc, dtemp;
  // Equilibrium: no current, ambient temperature.
  battery_derivatives({0.55, bp.ambient_temp_c}, 0.0, bp, &dsoc, &dtemp);
  CHECK(dsoc == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(dtemp == doctest::Approx(0.0).epsilon(1e-15));

  // 31 A out of 31 Ah drains 1/3600 per second.
  battery_current_core(0.0, 0.0, bp, false);  // instantiation sanity
  battery_derivatives_core(0.55, 25.0, 31.0, bp, &dsoc, &dtemp);
  CHECK(dsoc == doctest::Approx(-1.0 / 3600.0).epsilon(1e-12));

  // At ambient, any nonzero current heats the pack.
  battery_derivatives_core(0.55, bp.ambient_temp_c, 12.0, bp, &dsoc, &dtemp);
  CHECK(dtemp > 0.0);
  CHECK(dtemp == doctest::Approx(12.0 * 12.0 * 0.1 / (100.0 * 1000.0)).epsilon(1e-12));
}

TEST_CASE("traction force term-by-term") {
  VehicleParams vp;
  vp.mass_kg = 10000.0;
  vp.drag_coeff = 0.5;
  vp.air_density_kg_per_m3 = 1.2;
  vp.frontal_area_m2 = 10.0;  // cd*rho*A/2 = 3
  vp.gravity_mps2 = 9.81;
  vp.rolling_coeff = 0.007;
  vp.wheel_radius_m = 0.45;
  vp.gearbox_eff = 0.96;
  vp.gear_ratios = {6, 5, 4, 3, 2, 1};

  CHECK(traction_force(0, 0, 0, vp) ==
        doctest::Approx(vp.mass_kg * vp.gravity_mps2 * vp.rolling_coeff).epsilon(1e-12));
  CHECK(traction_force(10, 1, 0, vp) == doctest::Approx(10000.0 + 300.0 + 686.7).epsilon(1e-9));

  const double theta = 0.03;
  const double diff = traction_force(0, 0, theta, vp) - traction_force(0, 0, -theta, vp);
  CHECK(diff == doctest::Approx(2 * vp.mass_kg * vp.gravity_mps2 * std::sin(theta)).epsilon(1e-12));

  // Affine in a: second difference vanishes; even in v through v^2 only.
  const double f0 = traction_force(5, 0.0, 0.01, vp);
  const double f1 = traction_force(5, 0.5, 0.01, vp);
  const double f2 = traction_force(5, 1.0, 0.01, vp);
  CHECK(f2 - 2 * f1 + f0 == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(traction_force(5, 0.2, 0.01, vp) - traction_force(-5, 0.2, 0.01, vp) ==
        doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("driveline kinematics") {
  VehicleParams vp;
  vp.gear_ratios = {6, 5, 4, 3, 2, 1};
  vp.wheel_radius_m = 0.5;

  double w, al;
  driveline_kinematics(0.0, 0.0, 2, vp, &w, &al);
  CHECK(w == 0.0);
  driveline_kinematics(10.0, 1.0, 3, vp, &w, &al);
  CHECK(w == doctest::Approx(80.0).epsilon(1e-12));
  CHECK(al == doctest::Approx(8.0).epsilon(1e-12));

  double w_higher;
  driveline_kinematics(10.0, 1.0, 4, vp, &w_higher, &al);
  CHECK(w_higher < w);

  CHECK_THROWS_AS(driveline_kinematics(1.0, 0.0, 0, vp, &w, &al), Error);
  CHECK_THROWS_AS(driveline_kinematics(1.0, 0.0, 7, vp, &w, &al), Error);
}

TEST_CASE("demand torque branches") {
  const auto& cfg = default_config();
  const auto& vp = cfg.vehicle;
  const auto& em = cfg.engine;

  CHECK(demand_torque(5000.0, 80.0, 1.0, 3, true, 0.0, vp, em) == 0.0);

  // Efficiency exponent flips with the force sign.
  const double gamma = vp.gear_ratios[2];
  const double pos = demand_torque(1000.0, 80.0, 0.0, 3, false, 10.0, vp, em);
  const double neg = demand_torque(-1000.0, 80.0, 0.0, 3, false, 10.0, vp, em);
  CHECK(pos == doctest::Approx(1000.0 * vp.wheel_radius_m / (gamma * vp.gearbox_eff)).epsilon(1e-12));
  CHECK(neg == doctest::Approx(-1000.0 * vp.wheel_radius_m * vp.gearbox_eff / gamma).epsilon(1e-12));

  const double alpha = 2.0;
  const double on = demand_torque(1000.0, 80.0, alpha, 3, true, 10.0, vp, em);
  const double off = demand_torque(1000.0, 80.0, alpha, 3, false, 10.0, vp, em);
  CHECK(on - off ==
        doctest::Approx(em.drag_nm(80.0) + alpha * vp.engine_inertia_kgm2).epsilon(1e-10));
}

TEST_CASE("torque split traction, braking clamp and conservation") {
  const auto& cfg = default_config();
  const double idle = cfg.engine.idle_speed_radps;
  double tau_e, tau_m, p_m, brake;

  torque_split(1.0, 400.0, idle + 30.0, true, cfg.engine, cfg.em, &tau_e, &tau_m, &p_m, &brake);
  CHECK(tau_e == 0.0);
  CHECK(tau_m == doctest::Approx(400.0));
  CHECK(brake == 0.0);

  torque_split(0.0, 400.0, idle + 30.0, true, cfg.engine, cfg.em, &tau_e, &tau_m, &p_m, &brake);
  CHECK(tau_e == doctest::Approx(400.0));
  CHECK(tau_m == doctest::Approx(0.0));
  CHECK(p_m == doctest::Approx(0.0));

  // Braking: EM clamps at its recuperation curve, friction brakes absorb
  // the rest.
  const double w = 100.0;
  const double clamp = cfg.em.tau_m_min_nm(w);
  torque_split(0.3, clamp - 200.0, w, true, cfg.engine, cfg.em, &tau_e, &tau_m, &p_m, &brake);
  CHECK(tau_e == 0.0);
  CHECK(tau_m == doctest::Approx(clamp));
  CHECK(brake == doctest::Approx(-200.0));

  // Sweep stays inside the EM map rectangle (|tau_m| <= 600 here).
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> mu(-1.0, 1.0), tau(0.0, 600.0), speed(idle + 1.0, 250.0);
  for (int i = 0; i < 2000; ++i) {
    const double m = mu(rng), t = tau(rng), s = speed(rng);
    torque_split(m, t, s, true, cfg.engine, cfg.em, &tau_e, &tau_m, &p_m, &brake);
    CHECK(tau_e + tau_m == doctest::Approx(t).epsilon(1e-9));
  }
}

TEST_CASE("engine outputs branches") {
  const auto& cfg = default_config();
  const double amb = cfg.aftertreatment.ambient_temp_c;
  double f, exh, tot, nox;

  engine_outputs(120.0, 300.0, false, cfg.engine, amb, &f, &exh, &tot, &nox);
  CHECK(f == 0.0);
  CHECK(exh == 0.0);
  CHECK(tot == doctest::Approx(amb));
  CHECK(nox == 0.0);

  engine_outputs(cfg.engine.idle_speed_radps - 5.0, 100.0, true, cfg.engine, amb, &f, &exh, &tot,
                 &nox);
  CHECK(exh == doctest::Approx(0.05752));
  CHECK(tot == doctest::Approx(90.0));
  CHECK(nox == doctest::Approx(8.4));
  CHECK(f == doctest::Approx(cfg.engine.idle_fuel_gps));

  // Exact at a grid node.
  const auto& grid = cfg.engine.fuel_grid;
  const double w = grid.a[4], t = grid.b[10];
  engine_outputs(w, t, true, cfg.engine, amb, &f, &exh, &tot, &nox);
  CHECK(f == doctest::Approx(grid.values(10, 4)).epsilon(1e-12));

  CHECK_THROWS_AS(engine_outputs(grid.a[grid.a.size() - 1] + 50.0, 0.0, true, cfg.engine, amb, &f,
                                 &exh, &tot, &nox),
                  Error);
}

TEST_CASE("aftertreatment equilibrium, cooling sign and monotone warm-up") {
  const auto& at = default_config().aftertreatment;
  const double amb = at.ambient_temp_c;
  double d0, d1, d2, d3;

  aftertreatment_derivatives({amb, amb, amb, amb}, 0.1, amb, 10.0, at, &d0, &d1, &d2, &d3);
  CHECK(d0 == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(d1 == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(d2 == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(d3 == doctest::Approx(0.0).epsilon(1e-12));

  aftertreatment_derivatives({200, 180, 160, 140}, 0.0, amb, 15.0, at, &d0, &d1, &d2, &d3);
  CHECK(d0 == 0.0);  // pre-DOC only couples through exhaust flow
  CHECK(d1 < 0.0);
  CHECK(d2 < 0.0);
  CHECK(d3 < 0.0);

  // Constant hot feed: every stage temperature is nondecreasing.
  AftertreatmentState state{amb, amb, amb, amb};
  const double mexh = 0.15, t_tot = 320.0, v = 12.0;
  double prev[4] = {state.t_predoc_c, state.t_doc_c, state.t_dpf_c, state.t_scr_c};
  for (int step = 0; step < 4000; ++step) {
    aftertreatment_derivatives(state, mexh, t_tot, v, at, &d0, &d1, &d2, &d3);
    state.t_predoc_c += 0.25 * d0;
    state.t_doc_c += 0.25 * d1;
    state.t_dpf_c += 0.25 * d2;
    state.t_scr_c += 0.25 * d3;
    CHECK(state.t_predoc_c >= prev[0] - 1e-10);
    CHECK(state.t_doc_c >= prev[1] - 1e-10);
    CHECK(state.t_dpf_c >= prev[2] - 1e-10);
    CHECK(state.t_scr_c >= prev[3] - 1e-10);
    prev[0] = state.t_predoc_c;
    prev[1] = state.t_doc_c;
    prev[2] = state.t_dpf_c;
    prev[3] = state.t_scr_c;
  }
  CHECK(state.t_predoc_c > 300.0);  // approaches the feed temperature
}

TEST_CASE("system-out NOx averaging and bounds") {
  const auto& at = default_config().aftertreatment;

  // Hand-built conversion surfaces for the averaging oracle.
  AftertreatmentParams flat = at;
  auto const_grid = [](double value) {
    Grid2 g;
    g.a = Eigen::VectorXd::LinSpaced(2, 0.0, 500.0);
    g.b = Eigen::VectorXd::LinSpaced(2, 0.0, 0.5);
    g.values = Eigen::MatrixXd::Constant(2, 2, value);
    return g;
  };
  flat.conv_no_grid = const_grid(1.0);
  flat.conv_no2_grid = const_grid(1.0);
  flat.finalize();
  CHECK(system_out_nox(10.0, 250.0, 0.2, flat) == doctest::Approx(0.0));

  flat.conv_no_grid = const_grid(0.0);
  flat.conv_no2_grid = const_grid(0.0);
  flat.finalize();
  CHECK(system_out_nox(10.0, 250.0, 0.2, flat) == doctest::Approx(10.0));

  flat.conv_no_grid = const_grid(0.8);
  flat.conv_no2_grid = const_grid(0.6);
  flat.finalize();
  CHECK(system_out_nox(10.0, 250.0, 0.2, flat) == doctest::Approx(3.0).epsilon(1e-12));

  std::mt19937 rng(23);
  std::uniform_real_distribution<double> temp(0.0, 500.0), flow(0.0, 0.5), engine_out(0.0, 400.0);
  for (int i = 0; i < 5000; ++i) {
    const double e = engine_out(rng);
    const double s = system_out_nox(e, temp(rng), flow(rng), at);
    CHECK(s >= 0.0);
    CHECK(s <= e + 1e-12);
  }
}
