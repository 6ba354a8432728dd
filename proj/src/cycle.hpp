#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ps3 {

/// Reference drive cycle sampled at 1 Hz starting at t = 0. Speeds must
/// be exactly zero at stops; grade is interpolated linearly between
/// samples.
struct DriveCycle {
  std::vector<double> v_org_mps;
  std::vector<double> grade_rad;
  std::uint64_t digest = 0;
  std::string source_path;

  int duration_s() const { return static_cast<int>(v_org_mps.size()) - 1; }

  double speed_at(double t) const;
  double grade_at(double t) const;

  /// Trapezoid distance of the reference profile up to t (whole seconds).
  double distance_at(int t) const;
  double total_distance() const { return distance_at(duration_s()); }

  /// True when samples t and t+1 are both stopped.
  bool interval_stopped(int t) const;

  void validate() const;
};

DriveCycle load_cycle(const std::string& path);
DriveCycle make_cycle(std::vector<double> speeds, std::vector<double> grades);

}  // namespace ps3
