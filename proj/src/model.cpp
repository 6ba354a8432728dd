#include "model.hpp"

#include "util.hpp"

namespace ps3 {

void BatteryParams::validate() const {
  if (!(nominal_capacity_ah > 0)) fail("ConfigError", "battery.nominal_capacity_ah must be > 0");
  if (!(coulombic_eff_charge > 0 && coulombic_eff_charge <= 1))
    fail("ConfigError", "battery.coulombic_eff_charge must be in (0,1]");
  if (!(coulombic_eff_discharge > 0 && coulombic_eff_discharge <= 1))
    fail("ConfigError", "battery.coulombic_eff_discharge must be in (0,1]");
  if (!(pack_mass_kg > 0)) fail("ConfigError", "battery.pack_mass_kg must be > 0");
  if (!(specific_heat_j_per_kgk > 0)) fail("ConfigError", "battery.specific_heat_j_per_kgk must be > 0");
  if (!(surface_area_m2 > 0)) fail("ConfigError", "battery.surface_area_m2 must be > 0");
  if (!(soc_min < soc_boundary && soc_boundary < soc_max))
    fail("ConfigError", "battery.soc_boundary must lie strictly between soc_min and soc_max");
  for (double s = soc_min; s <= soc_max + 1e-12; s += 0.01)
    if (!(r0_ohm(s) > 0)) fail("ConfigError", "battery.r0_curve must be positive over [soc_min, soc_max]");
  const auto& tgrid = current_max_a.grid().x;
  for (int i = 0; i < tgrid.size(); ++i) {
    if (!(current_min_a(tgrid[i]) < 0)) fail("ConfigError", "battery.current_min_curve must be negative");
    if (!(current_max_a(tgrid[i]) > 0)) fail("ConfigError", "battery.current_max_curve must be positive");
  }
}

void VehicleParams::validate() const {
  if (!(mass_kg > 0)) fail("ConfigError", "vehicle.mass_kg must be > 0");
  if (!(frontal_area_m2 > 0)) fail("ConfigError", "vehicle.frontal_area_m2 must be > 0");
  if (!(wheel_radius_m > 0)) fail("ConfigError", "vehicle.wheel_radius_m must be > 0");
  if (!(gearbox_eff > 0 && gearbox_eff <= 1)) fail("ConfigError", "vehicle.gearbox_eff must be in (0,1]");
  for (int i = 0; i < 6; ++i)
    if (!(gear_ratios[i] > 0)) fail("ConfigError", "vehicle.gear_ratios must be positive");
  for (int i = 1; i < 6; ++i)
    if (!(gear_ratios[i] < gear_ratios[i - 1]))
      fail("ConfigError", "vehicle.gear_ratios must be strictly decreasing");
  if (!(accel_min_mps2 < accel_max_mps2)) fail("ConfigError", "vehicle accel bounds inverted");
  if (!(speed_min_mps < speed_max_mps)) fail("ConfigError", "vehicle speed bounds inverted");
  if (!(speed_band_mps > 0)) fail("ConfigError", "vehicle.speed_band_mps must be > 0");
}

void EngineMaps::finalize() {
  fuel_gps = BilinearTable2D(fuel_grid, "engine fuel map");
  exhaust_kgps = BilinearTable2D(exhaust_grid, "engine exhaust map");
  turbine_out_c = BilinearTable2D(tot_grid, "turbine-out temperature map");
  eonox_mgps = BilinearTable2D(eonox_grid, "engine-out NOx map");
  idle_fuel_gps = fuel_gps(std::max(idle_speed_radps, fuel_grid.a[0]), 0.0);
}

void EngineMaps::validate() const {
  if (!(idle_speed_radps > 0 && idle_speed_radps < max_speed_radps))
    fail("ConfigError", "engine.idle_speed_radps must be in (0, max_speed_radps)");
  if (fuel_grid.values.minCoeff() < 0) fail("ConfigError", "engine fuel map must be nonnegative");
  if (exhaust_grid.values.minCoeff() < 0) fail("ConfigError", "engine exhaust map must be nonnegative");
  if (eonox_grid.values.minCoeff() < 0) fail("ConfigError", "engine NOx map must be nonnegative");
  const auto& wgrid = tau_e_max_nm.grid().x;
  for (int i = 0; i < wgrid.size(); ++i) {
    if (tau_e_min_nm(wgrid[i]) > 1e-12) fail("ConfigError", "engine.tau_e_min_curve must be <= 0");
    if (tau_e_max_nm(wgrid[i]) < -1e-12) fail("ConfigError", "engine.tau_e_max_curve must be >= 0");
  }
}

void MotorMaps::finalize() { efficiency = BilinearTable2D(efficiency_grid, "EM efficiency map"); }

void MotorMaps::validate() const {
  if (!(efficiency_grid.values.minCoeff() > 0 && efficiency_grid.values.maxCoeff() <= 1))
    fail("ConfigError", "EM efficiency map must lie in (0,1]");
  const auto& wgrid = tau_m_max_nm.grid().x;
  for (int i = 0; i < wgrid.size(); ++i) {
    if (!(tau_m_min_nm(wgrid[i]) < 0)) fail("ConfigError", "em.tau_m_min_curve must be negative");
    if (!(tau_m_max_nm(wgrid[i]) > 0)) fail("ConfigError", "em.tau_m_max_curve must be positive");
  }
  if (!(max_speed_radps > 0)) fail("ConfigError", "em.max_speed_radps must be > 0");
}

void AftertreatmentParams::finalize() {
  conv_no = BilinearTable2D(conv_no_grid, "NO conversion map");
  conv_no2 = BilinearTable2D(conv_no2_grid, "NO2 conversion map");
}

void AftertreatmentParams::validate() const {
  auto check_stage = [](const AftertreatmentStage& s, const std::string& name) {
    if (!(s.mass_kg > 0)) fail("ConfigError", "aftertreatment." + name + ".mass_kg must be > 0");
    if (!(s.area_m2 > 0)) fail("ConfigError", "aftertreatment." + name + ".area_m2 must be > 0");
    if (!(s.emissivity >= 0 && s.emissivity <= 1))
      fail("ConfigError", "aftertreatment." + name + ".emissivity must be in [0,1]");
  };
  check_stage(doc, "doc");
  check_stage(dpf, "dpf");
  check_stage(scr, "scr");
  if (!(doc.specific_heat_j_per_kgk > 0) || !(dpf.specific_heat_j_per_kgk > 0))
    fail("ConfigError", "aftertreatment stage specific heats must be > 0");
  const auto& tg = scr_specific_heat.grid();
  for (int i = 0; i < tg.x.size(); ++i)
    if (!(tg.y[i] > 0)) fail("ConfigError", "aftertreatment.scr_specific_heat must be positive");
  if (conv_no_grid.values.minCoeff() < 0 || conv_no_grid.values.maxCoeff() > 1 ||
      conv_no2_grid.values.minCoeff() < 0 || conv_no2_grid.values.maxCoeff() > 1)
    fail("ConfigError", "NOx conversion efficiencies must lie in [0,1]");
}

double battery_current(double p_b, double soc, const BatteryParams& bp) {
  const double r0 = bp.r0_ohm(soc);
  const double voc = bp.voc_v(soc);
  const double half = voc / (2.0 * r0);
  const double disc = half * half - p_b / r0;
  if (disc < 0.0)
    fail("InfeasiblePower", "battery cannot deliver " + format_double(p_b) + " W at SOC " +
                                format_double(soc));
  return battery_current_core(p_b, soc, bp, /*extend=*/false);
}

void battery_derivatives(const BatteryState& state, double p_b, const BatteryParams& bp,
                         double* dsoc, double* dtemp) {
  const double i_b = battery_current(p_b, state.soc, bp);
  battery_derivatives_core(state.soc, state.temp_c, i_b, bp, dsoc, dtemp);
}

double traction_force(double v, double a, double grade_rad, const VehicleParams& vp) {
  return traction_force_core(v, a, grade_rad, vp);
}

void driveline_kinematics(double v, double a, int gear, const VehicleParams& vp, double* omega,
                          double* alpha) {
  if (gear < 1 || gear > 6) fail("InvalidGear", "gear " + std::to_string(gear) + " outside {1..6}");
  const double ratio = vp.gear_ratios[gear - 1];
  *omega = ratio * v / vp.wheel_radius_m;
  *alpha = ratio * a / vp.wheel_radius_m;
}

double demand_torque(double f_v, double omega, double alpha, int gear, bool engine_on, double v,
                     const VehicleParams& vp, const EngineMaps& em) {
  if (gear < 1 || gear > 6) fail("InvalidGear", "gear " + std::to_string(gear) + " outside {1..6}");
  if (v == 0.0) return 0.0;  // brakes hold the vehicle at stops
  const double ratio = vp.gear_ratios[gear - 1];
  const double tau_g = driveshaft_torque_core(f_v, ratio, vp);
  return demand_torque_core(tau_g, alpha, engine_on ? 1.0 : 0.0, em.drag_nm(omega), vp);
}

void torque_split(double mu, double tau_total, double omega, bool engine_on,
                  const EngineMaps& em, const MotorMaps& mm, double* tau_e, double* tau_m,
                  double* p_m, double* friction_brake) {
  if (!engine_on || omega <= em.idle_speed_radps || tau_total < 0.0) mu = 1.0;
  MotorViewStrict motor{mm};
  torque_split_core(mu, tau_total, omega, em.idle_speed_radps, motor, tau_e, tau_m, p_m);
  *friction_brake = tau_total < 0.0 ? tau_total - *tau_m : 0.0;
}

void engine_outputs(double omega, double tau_e, bool engine_on, const EngineMaps& em,
                    double ambient_c, double* mdot_f_gps, double* mdot_exh_kgps, double* t_tot_c,
                    double* mdot_eonox_mgps) {
  EngineViewStrict view{em};
  engine_outputs_core(omega, tau_e, engine_on ? 1.0 : 0.0, view, ambient_c, mdot_f_gps,
                      mdot_exh_kgps, t_tot_c, mdot_eonox_mgps);
}

void aftertreatment_derivatives(const AftertreatmentState& state, double mdot_exh_kgps,
                                double t_tot_c, double v, const AftertreatmentParams& at,
                                double* d_predoc, double* d_doc, double* d_dpf, double* d_scr) {
  aftertreatment_derivatives_core(state.t_predoc_c, state.t_doc_c, state.t_dpf_c, state.t_scr_c,
                                  mdot_exh_kgps, t_tot_c, v, at, d_predoc, d_doc, d_dpf, d_scr);
}

double system_out_nox(double mdot_eonox_mgps, double t_scr_c, double mdot_exh_kgps,
                      const AftertreatmentParams& at) {
  ConvViewStrict view{at};
  return system_out_nox_core(mdot_eonox_mgps, t_scr_c, mdot_exh_kgps, view);
}

}  // namespace ps3
