#pragma once

#include <cstdint>
#include <string>

#include "model.hpp"

namespace ps3 {

/// Every physical constant, limit, map, and dwell parameter in one
/// immutable record. Loaded from a JSON document (// comments allowed);
/// 2-D maps come from CSV grid files referenced by the config.
struct PowertrainConfig {
  BatteryParams battery;
  VehicleParams vehicle;
  EngineMaps engine;
  MotorMaps em;
  AftertreatmentParams aftertreatment;
  int dwell_gear_s = 3;
  int dwell_engine_s = 2;
  double mu_min = -2.0;

  CubicTable1D gear_ratio_of_relaxed;  // monotone C1 map from relaxed gear in [1,6]

  std::uint64_t digest = 0;  // of the config file bytes
  std::string source_path;

  void validate() const;
};

PowertrainConfig load_config(const std::string& path);

}  // namespace ps3
