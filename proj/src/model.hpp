#pragma once

#include <array>
#include <cmath>
#include <string>

#include "ad.hpp"
#include "tables.hpp"

// Physical subsystem models: battery electrics/thermal, longitudinal
// vehicle dynamics and driveline, engine/EM maps with torque split, and
// the DOC/DPF/SCR after-treatment chain. Everything here is a pure
// function of value inputs; parameter records are immutable after load.
//
// The core formulas are templated on the scalar so the smooth optimizer
// path (dual numbers over C1 map wrappers) evaluates the exact same
// algebra as the plain-double model path.

namespace ps3 {

struct BatteryParams {
  double nominal_capacity_ah = 0;
  double coulombic_eff_charge = 1;
  double coulombic_eff_discharge = 1;
  double pack_mass_kg = 0;
  double specific_heat_j_per_kgk = 0;
  double conv_coeff_w_per_m2k = 0;
  double surface_area_m2 = 0;
  double ambient_temp_c = 25;
  double aux_load_w = 0;
  CubicTable1D r0_ohm;          // of SOC
  CubicTable1D voc_v;           // of SOC
  CubicTable1D current_min_a;   // of battery temperature, < 0
  CubicTable1D current_max_a;   // of battery temperature, > 0
  double soc_min = 0.3;
  double soc_max = 0.8;
  double soc_boundary = 0.55;

  void validate() const;
};

struct BatteryState {
  double soc = 0.55;
  double temp_c = 25;
};

struct VehicleParams {
  double mass_kg = 0;
  double drag_coeff = 0;
  double air_density_kg_per_m3 = 1.2;
  double frontal_area_m2 = 0;
  double gravity_mps2 = 9.81;
  double rolling_coeff = 0;
  double wheel_radius_m = 0;
  double gearbox_eff = 1;
  std::array<double, 6> gear_ratios{};  // strictly decreasing
  double engine_inertia_kgm2 = 0;
  double motor_inertia_kgm2 = 0;
  double accel_min_mps2 = -2.0;
  double accel_max_mps2 = 1.5;
  double speed_min_mps = 0.0;
  double speed_max_mps = 25.0;
  double speed_band_mps = 1.4;

  void validate() const;
};

struct EngineMaps {
  Grid2 fuel_grid;     // g/s over (omega, tau_e)
  Grid2 exhaust_grid;  // kg/s
  Grid2 tot_grid;      // degC turbine-out temperature
  Grid2 eonox_grid;    // mg/s engine-out NOx
  BilinearTable2D fuel_gps;
  BilinearTable2D exhaust_kgps;
  BilinearTable2D turbine_out_c;
  BilinearTable2D eonox_mgps;
  CubicTable1D tau_e_min_nm;  // of omega, <= 0
  CubicTable1D tau_e_max_nm;  // of omega, >= 0
  CubicTable1D drag_nm;       // motoring friction torque, >= 0
  double idle_speed_radps = 0;
  double max_speed_radps = 0;
  double idle_exhaust_kgps = 0.05752;
  double idle_tot_c = 90.0;
  double idle_eonox_mgps = 8.4;
  double idle_fuel_gps = 0;  // fuel table at (idle_speed, 0), cached at load

  void finalize();  // builds bilinear views and the idle fuel cache
  void validate() const;
};

struct MotorMaps {
  Grid2 efficiency_grid;  // (0,1] over (omega, tau_m)
  BilinearTable2D efficiency;
  CubicTable1D tau_m_min_nm;  // of omega, < 0
  CubicTable1D tau_m_max_nm;  // of omega, > 0
  double max_speed_radps = 0;

  void finalize();
  void validate() const;
};

struct AftertreatmentStage {
  double mass_kg = 0;
  double specific_heat_j_per_kgk = 0;  // ignored for SCR (table below)
  double area_m2 = 0;
  CubicTable1D conv_coeff_w_per_m2k;  // of vehicle speed
  double emissivity = 0;
};

struct AftertreatmentParams {
  AftertreatmentStage doc;
  AftertreatmentStage dpf;
  AftertreatmentStage scr;
  CubicTable1D scr_specific_heat;  // of SCR temperature
  double stefan_boltzmann = 5.670374419e-8;
  double predoc_gain_per_kg = 0.042;
  double cp_air_j_per_kgk = 1005.0;
  Grid2 conv_no_grid;   // efficiency over (T_SCR, mdot_exh)
  Grid2 conv_no2_grid;
  BilinearTable2D conv_no;
  BilinearTable2D conv_no2;
  double ambient_temp_c = 25;

  void finalize();
  void validate() const;
};

struct AftertreatmentState {
  double t_predoc_c = 25;
  double t_doc_c = 25;
  double t_dpf_c = 25;
  double t_scr_c = 25;
};

/// Algebraic intermediates along the driveline for one evaluation point.
struct DrivelineSignals {
  double shaft_speed_radps = 0;
  double shaft_accel_radps2 = 0;
  double traction_force_n = 0;
  double driveshaft_torque_nm = 0;
  double demand_torque_nm = 0;
  double engine_torque_nm = 0;
  double motor_torque_nm = 0;
  double friction_brake_torque_nm = 0;
  double mech_power_w = 0;
  double battery_power_w = 0;
  double battery_current_a = 0;
  double fuel_rate_gps = 0;
  double exhaust_rate_kgps = 0;
  double turbine_out_temp_c = 0;
  double engine_out_nox_mgps = 0;
  double system_out_nox_mgps = 0;
};

// ---------------------------------------------------------------------------
// Templated cores. `T` is double or ad::Dual.

inline constexpr double kKelvinOffset = 273.15;

/// Discharge-positive battery current for terminal power p_b (W).
/// Smaller quadratic root of V_oc I - R0 I^2 = P_b; charging current is
/// scaled by the coulombic efficiency. `extend` keeps the square root
/// alive (C1 linear continuation) for infeasible intermediate iterates.
template <class T>
T battery_current_core(const T& p_b, const T& soc, const BatteryParams& bp, bool extend) {
  using std::sqrt;
  const T r0 = bp.r0_ohm(soc);
  const T voc = bp.voc_v(soc);
  const T half = voc / (2.0 * r0);
  const T disc = half * half - p_b / r0;
  T root;
  if (extend) {
    root = ad::sqrt_extended(disc, 1e-6);
  } else {
    root = sqrt(disc);
  }
  const T current = half - root;
  if (ad::value(p_b) < 0.0) return bp.coulombic_eff_charge * current;
  return bp.coulombic_eff_discharge * current;
}

/// (dSOC/dt, dT_b/dt). Capacity is Ah, converted to Coulombs here.
/// Ohmic loss heats the pack; convection relaxes it toward ambient.
template <class T>
void battery_derivatives_core(const T& soc, const T& temp_c, const T& i_b,
                              const BatteryParams& bp, T* dsoc, T* dtemp) {
  *dsoc = -i_b / (3600.0 * bp.nominal_capacity_ah);
  const T ohmic = i_b * i_b * bp.r0_ohm(soc);
  const T convection = bp.conv_coeff_w_per_m2k * bp.surface_area_m2 * (temp_c - bp.ambient_temp_c);
  *dtemp = (ohmic - convection) / (bp.pack_mass_kg * bp.specific_heat_j_per_kgk);
}

template <class T>
T traction_force_core(const T& v, const T& a, double grade_rad, const VehicleParams& vp) {
  const double cos_g = std::cos(grade_rad);
  const double sin_g = std::sin(grade_rad);
  return vp.mass_kg * a + 0.5 * vp.drag_coeff * vp.air_density_kg_per_m3 * vp.frontal_area_m2 * v * v +
         vp.mass_kg * vp.gravity_mps2 * (vp.rolling_coeff * cos_g + sin_g);
}

/// Driveshaft torque behind the gearbox; sign(0) := +1 so the efficiency
/// sits in the denominator at zero force.
template <class T>
T driveshaft_torque_core(const T& f_v, const T& ratio, const VehicleParams& vp) {
  const T base = f_v * vp.wheel_radius_m / ratio;
  if (ad::value(f_v) >= 0.0) return base / vp.gearbox_eff;
  return base * vp.gearbox_eff;
}

/// Demand torque with the engine-presence fraction blended linearly:
/// integral statuses reproduce the two switch cases exactly.
template <class T>
T demand_torque_core(const T& tau_g, const T& alpha, const T& engine_frac,
                     const T& drag_torque, const VehicleParams& vp) {
  return tau_g + alpha * vp.motor_inertia_kgm2 +
         engine_frac * (drag_torque + alpha * vp.engine_inertia_kgm2);
}

template <class T, class MotorView>
void torque_split_core(const T& mu, const T& tau_total, const T& omega, double idle_speed,
                       const MotorView& motor, T* tau_e, T* tau_m, T* p_m) {
  if (ad::value(tau_total) >= 0.0) {
    if (ad::value(omega) > idle_speed) {
      *tau_e = (1.0 - mu) * tau_total;
      *tau_m = mu * tau_total;
    } else {
      *tau_e = T(0.0);
      *tau_m = tau_total;
    }
    *p_m = omega * *tau_m / motor.efficiency(omega, *tau_m);
  } else {
    *tau_e = T(0.0);
    *tau_m = ad::max(tau_total, motor.tau_min(omega));
    *p_m = omega * *tau_m * motor.efficiency(omega, *tau_m);
  }
}

/// Engine flow quantities scaled by the engine-presence fraction; below
/// idle speed the idle constants replace the maps.
template <class T, class EngineView>
void engine_outputs_core(const T& omega, const T& tau_e, const T& engine_frac,
                         const EngineView& ev, double ambient_c, T* mdot_f, T* mdot_exh,
                         T* t_tot, T* mdot_nox) {
  T base_f, base_exh, base_tot, base_nox;
  if (ad::value(omega) > ev.idle_speed()) {
    base_f = ev.fuel(omega, tau_e);
    base_exh = ev.exhaust(omega, tau_e);
    base_tot = ev.turbine_out(omega, tau_e);
    base_nox = ev.eonox(omega, tau_e);
  } else {
    base_f = T(ev.idle_fuel());
    base_exh = T(ev.idle_exhaust());
    base_tot = T(ev.idle_tot());
    base_nox = T(ev.idle_eonox());
  }
  *mdot_f = engine_frac * base_f;
  *mdot_exh = engine_frac * base_exh;
  *t_tot = ambient_c + engine_frac * (base_tot - ambient_c);
  *mdot_nox = engine_frac * base_nox;
}

template <class T>
void aftertreatment_derivatives_core(const T& t_predoc, const T& t_doc, const T& t_dpf,
                                     const T& t_scr, const T& mdot_exh, const T& t_tot,
                                     const T& v, const AftertreatmentParams& at, T* d_predoc,
                                     T* d_doc, T* d_dpf, T* d_scr) {
  *d_predoc = at.predoc_gain_per_kg * mdot_exh * (t_tot - t_predoc);

  const double t_amb = at.ambient_temp_c;
  const double t_amb_k4 = std::pow(t_amb + kKelvinOffset, 4);
  auto stage_rate = [&](const AftertreatmentStage& stage, const T& t_prev, const T& t_stage,
                        const T& cp_stage) {
    const T q_in = at.cp_air_j_per_kgk * mdot_exh * (t_prev - t_stage);
    const T q_conv = stage.conv_coeff_w_per_m2k(v) * stage.area_m2 * (t_amb - t_stage);
    const T tk = t_stage + kKelvinOffset;
    const T q_rad = stage.emissivity * at.stefan_boltzmann * stage.area_m2 * (t_amb_k4 - tk * tk * tk * tk);
    return (q_in + q_conv + q_rad) / (stage.mass_kg * cp_stage);
  };
  *d_doc = stage_rate(at.doc, t_predoc, t_doc, T(at.doc.specific_heat_j_per_kgk));
  *d_dpf = stage_rate(at.dpf, t_doc, t_dpf, T(at.dpf.specific_heat_j_per_kgk));
  *d_scr = stage_rate(at.scr, t_dpf, t_scr, at.scr_specific_heat(t_scr));
}

/// Tailpipe NOx: engine-out scaled by (1 - mean conversion), the mean
/// reflecting the assumed 1:1 NO/NO2 mole split. Efficiencies clamped to
/// [0,1] so the residue can never exceed engine-out.
template <class T, class ConvView>
T system_out_nox_core(const T& mdot_eonox, const T& t_scr, const T& mdot_exh,
                      const ConvView& conv) {
  T eta = 0.5 * (conv.no(t_scr, mdot_exh) + conv.no2(t_scr, mdot_exh));
  eta = ad::min(ad::max(eta, T(0.0)), T(1.0));
  return mdot_eonox * (1.0 - eta);
}

// ---------------------------------------------------------------------------
// Strict double-typed views over the bilinear tables.

struct EngineViewStrict {
  const EngineMaps& m;
  double fuel(double w, double t) const { return m.fuel_gps(w, t); }
  double exhaust(double w, double t) const { return m.exhaust_kgps(w, t); }
  double turbine_out(double w, double t) const { return m.turbine_out_c(w, t); }
  double eonox(double w, double t) const { return m.eonox_mgps(w, t); }
  double idle_speed() const { return m.idle_speed_radps; }
  double idle_fuel() const { return m.idle_fuel_gps; }
  double idle_exhaust() const { return m.idle_exhaust_kgps; }
  double idle_tot() const { return m.idle_tot_c; }
  double idle_eonox() const { return m.idle_eonox_mgps; }
};

struct MotorViewStrict {
  const MotorMaps& m;
  double efficiency(double w, double t) const { return m.efficiency(w, t); }
  double tau_min(double w) const { return m.tau_m_min_nm(w); }
  double tau_max(double w) const { return m.tau_m_max_nm(w); }
};

struct ConvViewStrict {
  const AftertreatmentParams& at;
  double no(double t, double mdot) const { return at.conv_no(t, mdot); }
  double no2(double t, double mdot) const { return at.conv_no2(t, mdot); }
};

// ---------------------------------------------------------------------------
// Double-typed model operations (the strict path).

/// Positive = discharge. Throws InfeasiblePower when p_b exceeds what the
/// battery can deliver at this SOC.
double battery_current(double p_b, double soc, const BatteryParams& bp);

void battery_derivatives(const BatteryState& state, double p_b, const BatteryParams& bp,
                         double* dsoc, double* dtemp);

double traction_force(double v, double a, double grade_rad, const VehicleParams& vp);

/// Throws InvalidGear outside {1..6}.
void driveline_kinematics(double v, double a, int gear, const VehicleParams& vp, double* omega,
                          double* alpha);

double demand_torque(double f_v, double omega, double alpha, int gear, bool engine_on, double v,
                     const VehicleParams& vp, const EngineMaps& em);

/// mu is forced to 1 when the engine is off, the shaft is below idle
/// speed, or the vehicle brakes; the residual braking torque beyond the
/// EM recuperation clamp goes to ideal friction brakes.
void torque_split(double mu, double tau_total, double omega, bool engine_on,
                  const EngineMaps& em, const MotorMaps& mm, double* tau_e, double* tau_m,
                  double* p_m, double* friction_brake);

void engine_outputs(double omega, double tau_e, bool engine_on, const EngineMaps& em,
                    double ambient_c, double* mdot_f_gps, double* mdot_exh_kgps, double* t_tot_c,
                    double* mdot_eonox_mgps);

void aftertreatment_derivatives(const AftertreatmentState& state, double mdot_exh_kgps,
                                double t_tot_c, double v, const AftertreatmentParams& at,
                                double* d_predoc, double* d_doc, double* d_dpf, double* d_scr);

double system_out_nox(double mdot_eonox_mgps, double t_scr_c, double mdot_exh_kgps,
                      const AftertreatmentParams& at);

}  // namespace ps3
