#pragma once

#include <initializer_list>

#include "config.hpp"
#include "model.hpp"

#ifndef PS3_DATA_DIR
#define PS3_DATA_DIR "data"
#endif

namespace ps3::testing {

inline Grid1 grid1(std::initializer_list<double> xs, std::initializer_list<double> ys) {
  Grid1 g;
  g.x = Eigen::Map<const Eigen::VectorXd>(xs.begin(), static_cast<int>(xs.size()));
  g.y = Eigen::Map<const Eigen::VectorXd>(ys.begin(), static_cast<int>(ys.size()));
  return g;
}

inline CubicTable1D constant_curve(double value, double x0 = -1e3, double x1 = 1e3) {
  return CubicTable1D(grid1({x0, x1}, {value, value}));
}

/// Battery with flat R0/Voc curves so hand oracles stay closed-form.
inline BatteryParams flat_battery(double r0, double voc, double eta_charge = 0.9) {
  BatteryParams p;
  p.nominal_capacity_ah = 31.0;
  p.coulombic_eff_charge = eta_charge;
  p.coulombic_eff_discharge = 1.0;
  p.pack_mass_kg = 100.0;
  p.specific_heat_j_per_kgk = 1000.0;
  p.conv_coeff_w_per_m2k = 15.0;
  p.surface_area_m2 = 1.8;
  p.ambient_temp_c = 25.0;
  p.aux_load_w = 500.0;
  p.r0_ohm = constant_curve(r0, 0.0, 1.0);
  p.voc_v = constant_curve(voc, 0.0, 1.0);
  p.current_min_a = constant_curve(-300.0, -20.0, 60.0);
  p.current_max_a = constant_curve(400.0, -20.0, 60.0);
  return p;
}

inline const PowertrainConfig& default_config() {
  static const PowertrainConfig config = load_config(std::string(PS3_DATA_DIR) + "/config.json");
  return config;
}

}  // namespace ps3::testing
