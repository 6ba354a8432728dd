#pragma once

#include <map>
#include <string>
#include <vector>

namespace ps3 {

/// Named time series sharing one time grid. Columns are created on first
/// write and must match the grid length when read back.
class Trajectory {
 public:
  Trajectory() = default;
  explicit Trajectory(std::vector<double> time) : time_(std::move(time)) {}

  const std::vector<double>& time() const { return time_; }
  std::size_t size() const { return time_.size(); }

  bool has(const std::string& name) const { return columns_.count(name) != 0; }
  std::vector<double>& column(const std::string& name);
  const std::vector<double>& column(const std::string& name) const;
  void set(const std::string& name, std::vector<double> values);

  std::vector<std::string> column_names() const;

  /// Linear interpolation within the grid (used for 1 Hz resampling of
  /// derived signals; collocation-exact resampling lives in colloc).
  double interpolate(const std::string& name, double t) const;

  std::string to_csv(const std::string& meta_comment) const;
  static Trajectory from_csv_text(const std::string& text);

 private:
  std::vector<double> time_;
  std::map<std::string, std::vector<double>> columns_;
  std::vector<std::string> order_;  // column emission order
};

}  // namespace ps3
