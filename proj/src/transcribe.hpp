#pragma once

#include <memory>
#include <string>
#include <vector>

#include "nlp_problem.hpp"
#include "ocp.hpp"
#include "radau.hpp"
#include "trajectory.hpp"

namespace ps3 {

/// Sparse NLP produced by stamping an OCP onto Radau collocation
/// intervals: d collocated state vectors and one constant control vector
/// per interval, defect constraints at every point (scaled by 1/h),
/// path constraints at every point, quadrature objective, and terminal
/// equality rows. Interval continuity is implicit: the last Radau point
/// sits at the interval end and doubles as the next interval's start.
class TranscribedNlp : public NlpProblem {
 public:
  TranscribedNlp(OcpDefinition ocp, CollocationScheme scheme,
                 std::vector<std::string> state_names = {},
                 std::vector<std::string> control_names = {});

  int num_variables() const override { return num_vars_; }
  int num_constraints() const override { return num_cons_; }
  void variable_bounds(Eigen::VectorXd* lo, Eigen::VectorXd* hi) const override;
  void constraint_bounds(Eigen::VectorXd* lo, Eigen::VectorXd* hi) const override;
  double objective(const Eigen::VectorXd& z) const override;
  void objective_gradient(const Eigen::VectorXd& z, Eigen::VectorXd* grad) const override;
  void constraints(const Eigen::VectorXd& z, Eigen::VectorXd* c) const override;
  const std::vector<std::pair<int, int>>& jacobian_pattern() const override { return pattern_; }
  void jacobian_values(const Eigen::VectorXd& z, Eigen::VectorXd* values) const override;
  std::vector<std::pair<int, int>> hessian_groups() const override;

  const OcpDefinition& ocp() const { return ocp_; }
  const CollocationScheme& scheme() const { return scheme_; }
  int intervals() const { return intervals_; }

  // Flat-index name map. `point` runs 1..d; point 0 of interval k aliases
  // the previous interval's endpoint (or the start state for k = 0).
  int start_state_index(int state) const { return state; }
  int state_index(int interval, int point, int state) const;
  int control_index(int interval, int control) const;
  /// State index of the 1 Hz sample at t = second (0..N).
  int sample_state_index(int second, int state) const;
  double time_at(int interval, int point) const;

  /// Scaled decision vector from natural-unit callbacks.
  Eigen::VectorXd pack(const std::function<double(double t, int s)>& state_fn,
                       const std::function<double(int k, int j)>& control_fn) const;

  /// States and controls at all collocation times, natural units.
  Trajectory extract(const Eigen::VectorXd& z) const;

  /// Barycentric (collocation-exact) state resampling within the horizon.
  Eigen::VectorXd resample_states(const Eigen::VectorXd& z, double t) const;

  const std::vector<std::string>& state_names() const { return state_names_; }
  const std::vector<std::string>& control_names() const { return control_names_; }

 private:
  struct RowRange {
    int begin = 0;
    int count = 0;
  };

  void build_pattern();
  void eval_point_duals(const Eigen::VectorXd& z, int interval, int point, bool with_grad,
                        std::vector<ad::Dual>* x, std::vector<ad::Dual>* u) const;

  OcpDefinition ocp_;
  CollocationScheme scheme_;
  std::vector<std::string> state_names_;
  std::vector<std::string> control_names_;

  int n_ = 0, m_ = 0, d_ = 0, intervals_ = 0;
  double h_ = 1.0;
  int block_ = 0;  // per-interval variable count d*n + m
  int num_vars_ = 0, num_cons_ = 0;
  int path_rows_per_point_ = 0;

  std::vector<std::pair<int, int>> pattern_;
  Eigen::VectorXd bary_;  // barycentric weights over {0, points...}
};

/// Thrown-on-mismatch convenience used by the examples and tests.
Trajectory extract_trajectory(const Eigen::VectorXd& solution, const TranscribedNlp& problem);

}  // namespace ps3
