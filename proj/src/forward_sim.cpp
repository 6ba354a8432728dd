#include "forward_sim.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_odeiv2.h>

#include <cmath>
#include <string>

#include "model.hpp"
#include "util.hpp"

namespace ps3 {

namespace {

struct GslContext {
  std::function<void(double, const double*, double*)> rhs;
  std::string error;
};

int gsl_rhs_trampoline(double t, const double y[], double dydt[], void* params) {
  auto* ctx = static_cast<GslContext*>(params);
  try {
    ctx->rhs(t, y, dydt);
    return GSL_SUCCESS;
  } catch (const std::exception& e) {
    ctx->error = e.what();
    return GSL_EBADFUNC;
  }
}

struct GslHandlerSilencer {
  GslHandlerSilencer() { gsl_set_error_handler_off(); }
};

void drive_segment(const std::function<void(double, const double*, double*)>& rhs,
                   std::vector<double>* y, double t0, double t1, double rel_tol) {
  static GslHandlerSilencer silencer;
  GslContext ctx{rhs, {}};
  gsl_odeiv2_system sys{gsl_rhs_trampoline, nullptr, y->size(), &ctx};
  gsl_odeiv2_driver* driver =
      gsl_odeiv2_driver_alloc_y_new(&sys, gsl_odeiv2_step_rkf45, 1e-3, 1e-12, rel_tol);
  gsl_odeiv2_driver_set_hmin(driver, 1e-14);
  double t = t0;
  const int status = gsl_odeiv2_driver_apply(driver, &t, t1, y->data());
  gsl_odeiv2_driver_free(driver);
  if (status != GSL_SUCCESS) {
    if (!ctx.error.empty()) fail("StiffnessFailure", "integration aborted: " + ctx.error);
    fail("StiffnessFailure", std::string("integration failed: ") + gsl_strerror(status));
  }
}

}  // namespace

std::vector<double> integrate_ode(const std::function<void(double, const double*, double*)>& rhs,
                                  std::vector<double> y0, double t0, double t1, double rel_tol) {
  drive_segment(rhs, &y0, t0, t1, rel_tol);
  return y0;
}

ForwardSimResult forward_simulate(const PowertrainConfig& config, const DriveCycle& cycle,
                                  const ControlSchedule& controls) {
  const int n_steps = static_cast<int>(controls.mu.size());
  if (static_cast<int>(controls.gear.size()) != n_steps ||
      static_cast<int>(controls.engine.size()) != n_steps ||
      static_cast<int>(controls.a.size()) != n_steps ||
      static_cast<int>(controls.v.size()) != n_steps + 1)
    fail("DimensionMismatch", "control schedule sizes inconsistent");
  if (n_steps > cycle.duration_s()) fail("DimensionMismatch", "schedule longer than cycle");

  const auto& bp = config.battery;
  const double ambient = config.aftertreatment.ambient_temp_c;

  // y = [soc, T_b, m_f, T_predoc, T_doc, T_dpf, T_scr,
  //      nox_out_mg, nox_engine_mg, E_pb, E_ohmic, E_chem, E_mech]
  std::vector<double> y{bp.soc_boundary, bp.ambient_temp_c, 0.0, ambient, ambient,
                        ambient,         ambient,           0.0, 0.0,     0.0,
                        0.0,             0.0,               0.0};

  std::vector<double> times(static_cast<std::size_t>(n_steps) + 1);
  for (int k = 0; k <= n_steps; ++k) times[static_cast<std::size_t>(k)] = k;
  Trajectory traj(times);

  auto record_row = [&](int k, const std::vector<double>& state) {
    const int ctrl = std::min(k, n_steps - 1);
    const double v = controls.v[static_cast<std::size_t>(k)];
    const double a = controls.a[static_cast<std::size_t>(ctrl)];
    const int gear = controls.gear[static_cast<std::size_t>(ctrl)];
    const bool engine = controls.engine[static_cast<std::size_t>(ctrl)] != 0;
    const double mu = controls.mu[static_cast<std::size_t>(ctrl)];

    double omega, alpha;
    driveline_kinematics(v, a, gear, config.vehicle, &omega, &alpha);
    const double f_v = traction_force(v, a, cycle.grade_at(k), config.vehicle);
    const double tau_total =
        demand_torque(f_v, omega, alpha, gear, engine, v, config.vehicle, config.engine);
    double tau_e, tau_m, p_m, brake;
    torque_split(mu, tau_total, omega, engine, config.engine, config.em, &tau_e, &tau_m, &p_m,
                 &brake);
    double mdot_f, mdot_exh, t_tot, mdot_nox;
    engine_outputs(omega, tau_e, engine, config.engine, ambient, &mdot_f, &mdot_exh, &t_tot,
                   &mdot_nox);
    const double p_b = p_m + bp.aux_load_w;
    const double i_b = battery_current(p_b, state[0], bp);
    const double mdot_s = system_out_nox(mdot_nox, state[6], mdot_exh, config.aftertreatment);

    const std::size_t row = static_cast<std::size_t>(k);
    traj.column("soc")[row] = state[0];
    traj.column("temp_b_c")[row] = state[1];
    traj.column("fuel_g")[row] = state[2];
    traj.column("t_predoc_c")[row] = state[3];
    traj.column("t_doc_c")[row] = state[4];
    traj.column("t_dpf_c")[row] = state[5];
    traj.column("t_scr_c")[row] = state[6];
    traj.column("v_mps")[row] = v;
    traj.column("accel_mps2")[row] = a;
    traj.column("gear")[row] = gear;
    traj.column("engine")[row] = engine ? 1.0 : 0.0;
    traj.column("mu")[row] = mu;
    traj.column("omega_radps")[row] = omega;
    traj.column("tau_total_nm")[row] = tau_total;
    traj.column("tau_e_nm")[row] = tau_e;
    traj.column("tau_m_nm")[row] = tau_m;
    traj.column("p_m_w")[row] = p_m;
    traj.column("p_b_w")[row] = p_b;
    traj.column("i_b_a")[row] = i_b;
    traj.column("mdot_f_gps")[row] = mdot_f;
    traj.column("mdot_exh_kgps")[row] = mdot_exh;
    traj.column("t_tot_c")[row] = t_tot;
    traj.column("mdot_eonox_mgps")[row] = mdot_nox;
    traj.column("mdot_snox_mgps")[row] = mdot_s;
  };

  for (int k = 0; k < n_steps; ++k) {
    record_row(k, y);

    const double v0 = controls.v[static_cast<std::size_t>(k)];
    const double v1 = controls.v[static_cast<std::size_t>(k) + 1];
    const double a = controls.a[static_cast<std::size_t>(k)];
    const int gear = controls.gear[static_cast<std::size_t>(k)];
    const bool engine = controls.engine[static_cast<std::size_t>(k)] != 0;
    const double mu = controls.mu[static_cast<std::size_t>(k)];

    auto rhs = [&](double t, const double* state, double* deriv) {
      const double frac = t - k;
      const double v = v0 + frac * (v1 - v0);
      double omega, alpha;
      driveline_kinematics(v, a, gear, config.vehicle, &omega, &alpha);
      const double f_v = traction_force(v, a, cycle.grade_at(t), config.vehicle);
      const double tau_total =
          demand_torque(f_v, omega, alpha, gear, engine, v, config.vehicle, config.engine);
      double tau_e, tau_m, p_m, brake;
      torque_split(mu, tau_total, omega, engine, config.engine, config.em, &tau_e, &tau_m, &p_m,
                   &brake);
      double mdot_f, mdot_exh, t_tot, mdot_nox;
      engine_outputs(omega, tau_e, engine, config.engine, ambient, &mdot_f, &mdot_exh, &t_tot,
                     &mdot_nox);
      const double p_b = p_m + bp.aux_load_w;
      const double i_b = battery_current(p_b, state[0], bp);
      double dsoc, dtemp;
      battery_derivatives_core(state[0], state[1], i_b, bp, &dsoc, &dtemp);
      double d_predoc, d_doc, d_dpf, d_scr;
      aftertreatment_derivatives({state[3], state[4], state[5], state[6]}, mdot_exh, t_tot, v,
                                 config.aftertreatment, &d_predoc, &d_doc, &d_dpf, &d_scr);
      const double mdot_s = system_out_nox(mdot_nox, state[6], mdot_exh, config.aftertreatment);

      deriv[0] = dsoc;
      deriv[1] = dtemp;
      deriv[2] = mdot_f;
      deriv[3] = d_predoc;
      deriv[4] = d_doc;
      deriv[5] = d_dpf;
      deriv[6] = d_scr;
      deriv[7] = mdot_s;
      deriv[8] = mdot_nox;
      deriv[9] = p_b;
      deriv[10] = i_b * i_b * bp.r0_ohm(state[0]);
      deriv[11] = bp.voc_v(state[0]) * i_b;
      deriv[12] = p_m;
    };
    drive_segment(rhs, &y, k, k + 1.0, 1e-9);
  }
  record_row(n_steps, y);

  ForwardSimResult result;
  result.states = std::move(traj);
  result.total_fuel_g = y[2];
  result.total_system_nox_mg = y[7];
  result.total_engine_nox_mg = y[8];
  result.battery_terminal_energy_j = y[9];
  result.ohmic_loss_j = y[10];
  result.chemical_energy_j = y[11];
  result.mech_energy_j = y[12];
  result.aux_energy_j = bp.aux_load_w * n_steps;
  return result;
}

}  // namespace ps3
