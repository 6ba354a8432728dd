#include "cycle.hpp"

#include <algorithm>
#include <cmath>

#include "util.hpp"

namespace ps3 {

namespace {
double interp(const std::vector<double>& samples, double t) {
  const int n = static_cast<int>(samples.size());
  if (t <= 0.0) return samples.front();
  if (t >= n - 1) return samples.back();
  const int k = static_cast<int>(std::floor(t));
  const double frac = t - k;
  return samples[k] + frac * (samples[k + 1] - samples[k]);
}
}  // namespace

double DriveCycle::speed_at(double t) const { return interp(v_org_mps, t); }
double DriveCycle::grade_at(double t) const { return interp(grade_rad, t); }

double DriveCycle::distance_at(int t) const {
  double d = 0.0;
  for (int k = 0; k < std::min(t, duration_s()); ++k)
    d += 0.5 * (v_org_mps[k] + v_org_mps[k + 1]);
  return d;
}

bool DriveCycle::interval_stopped(int t) const {
  return v_org_mps[t] == 0.0 && v_org_mps[t + 1] == 0.0;
}

void DriveCycle::validate() const {
  if (v_org_mps.size() < 2) fail("CycleError", "cycle needs at least 2 samples");
  if (v_org_mps.size() != grade_rad.size())
    fail("CycleError", "speed and grade sample counts differ");
  for (std::size_t k = 0; k < v_org_mps.size(); ++k) {
    if (!std::isfinite(v_org_mps[k]) || !std::isfinite(grade_rad[k]))
      fail("CycleError", "non-finite cycle sample at t=" + std::to_string(k));
    if (v_org_mps[k] < 0.0) fail("CycleError", "negative reference speed at t=" + std::to_string(k));
  }
}

DriveCycle load_cycle(const std::string& path) {
  const auto rows = read_numeric_csv_with_header(path);
  DriveCycle cycle;
  cycle.source_path = path;
  const std::string text = read_text_file(path);
  cycle.digest = fnv1a64(text.data(), text.size());
  int expected_t = 0;
  for (const auto& row : rows) {
    if (row.size() != 3) fail("CycleError", path + ": rows must be t_s,v_org_mps,grade_rad");
    if (std::llround(row[0]) != expected_t)
      fail("CycleError", path + ": time column must run 0,1,2,... (got " + format_double(row[0]) +
                             " at index " + std::to_string(expected_t) + ")");
    ++expected_t;
    cycle.v_org_mps.push_back(row[1]);
    cycle.grade_rad.push_back(row[2]);
  }
  cycle.validate();
  return cycle;
}

DriveCycle make_cycle(std::vector<double> speeds, std::vector<double> grades) {
  DriveCycle cycle;
  cycle.v_org_mps = std::move(speeds);
  if (grades.empty()) grades.assign(cycle.v_org_mps.size(), 0.0);
  cycle.grade_rad = std::move(grades);
  cycle.validate();
  std::string blob;
  for (std::size_t i = 0; i < cycle.v_org_mps.size(); ++i)
    blob += format_double(cycle.v_org_mps[i]) + "," + format_double(cycle.grade_rad[i]) + "\n";
  cycle.digest = fnv1a64(blob.data(), blob.size());
  cycle.source_path = "<memory>";
  return cycle;
}

}  // namespace ps3
