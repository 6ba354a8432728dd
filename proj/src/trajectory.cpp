#include "trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "util.hpp"

namespace ps3 {

std::vector<double>& Trajectory::column(const std::string& name) {
  auto it = columns_.find(name);
  if (it == columns_.end()) {
    order_.push_back(name);
    it = columns_.emplace(name, std::vector<double>(time_.size(), 0.0)).first;
  }
  return it->second;
}

const std::vector<double>& Trajectory::column(const std::string& name) const {
  auto it = columns_.find(name);
  if (it == columns_.end()) fail("TrajectoryError", "missing column " + name);
  return it->second;
}

void Trajectory::set(const std::string& name, std::vector<double> values) {
  if (values.size() != time_.size())
    fail("TrajectoryError", "column " + name + " length mismatch");
  if (!columns_.count(name)) order_.push_back(name);
  columns_[name] = std::move(values);
}

std::vector<std::string> Trajectory::column_names() const { return order_; }

double Trajectory::interpolate(const std::string& name, double t) const {
  const auto& values = column(name);
  if (time_.empty()) fail("TrajectoryError", "empty trajectory");
  if (t <= time_.front()) return values.front();
  if (t >= time_.back()) return values.back();
  const auto it = std::upper_bound(time_.begin(), time_.end(), t);
  const std::size_t hi = static_cast<std::size_t>(it - time_.begin());
  const std::size_t lo = hi - 1;
  const double span = time_[hi] - time_[lo];
  const double frac = span > 0 ? (t - time_[lo]) / span : 0.0;
  return values[lo] + frac * (values[hi] - values[lo]);
}

std::string Trajectory::to_csv(const std::string& meta_comment) const {
  std::ostringstream out;
  if (!meta_comment.empty()) out << "# " << meta_comment << "\n";
  out << "t_s";
  for (const auto& name : order_) out << "," << name;
  out << "\n";
  for (std::size_t i = 0; i < time_.size(); ++i) {
    out << format_double(time_[i]);
    for (const auto& name : order_) out << "," << format_double(columns_.at(name)[i]);
    out << "\n";
  }
  return out.str();
}

Trajectory Trajectory::from_csv_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (header.empty()) {
      header = split_csv_line(line);
      continue;
    }
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) fail("TrajectoryError", "ragged CSV row");
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) row.push_back(std::stod(f));
    rows.push_back(std::move(row));
  }
  if (header.empty() || header[0] != "t_s") fail("TrajectoryError", "first column must be t_s");
  std::vector<double> time;
  time.reserve(rows.size());
  for (const auto& r : rows) time.push_back(r[0]);
  Trajectory traj(std::move(time));
  for (std::size_t c = 1; c < header.size(); ++c) {
    std::vector<double> col;
    col.reserve(rows.size());
    for (const auto& r : rows) col.push_back(r[c]);
    traj.set(header[c], std::move(col));
  }
  return traj;
}

}  // namespace ps3
