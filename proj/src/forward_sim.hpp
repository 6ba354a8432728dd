#pragma once

#include <functional>
#include <vector>

#include "config.hpp"
#include "cycle.hpp"
#include "trajectory.hpp"

namespace ps3 {

/// Re-simulation verdict inputs: controls sampled at 1 Hz.
struct ControlSchedule {
  std::vector<double> mu;      // per interval
  std::vector<int> gear;       // per interval, 1..6
  std::vector<int> engine;     // per interval, 0/1
  std::vector<double> v;       // speed at sample points (size N+1)
  std::vector<double> a;       // accel per interval (size N)
};

/// High-accuracy forward integration of the seven continuous states
/// (SOC, fuel, battery temperature, four after-treatment temperatures)
/// under the given controls, using an adaptive embedded Runge-Kutta
/// driver at 1e-9 relative tolerance. Returns dense per-second states
/// plus derived signals and energy bookkeeping integrals.
struct ForwardSimResult {
  Trajectory states;            // per-second rows
  double total_fuel_g = 0;
  double total_system_nox_mg = 0;
  double total_engine_nox_mg = 0;
  double battery_terminal_energy_j = 0;  // integral of P_b
  double ohmic_loss_j = 0;               // integral of I^2 R0
  double chemical_energy_j = 0;          // integral of Voc * I
  double aux_energy_j = 0;
  double mech_energy_j = 0;              // integral of P_m
};

ForwardSimResult forward_simulate(const PowertrainConfig& config, const DriveCycle& cycle,
                                  const ControlSchedule& controls);

/// Generic scalar-system driver used by tests to validate the integrator
/// against closed forms independently of the powertrain models.
std::vector<double> integrate_ode(const std::function<void(double, const double*, double*)>& rhs,
                                  std::vector<double> y0, double t0, double t1,
                                  double rel_tol = 1e-9);

}  // namespace ps3
