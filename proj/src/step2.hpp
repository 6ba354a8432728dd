#pragma once

#include <Eigen/Core>
#include <array>
#include <string>
#include <vector>

#include "config.hpp"
#include "cycle.hpp"

namespace ps3 {

/// Discrete gear/engine scheduling instance: relaxed trajectories to
/// track, per-step gear feasibility for engine off/on, and minimum
/// dwell times. Steps are the N one-second intervals of the cycle.
struct Step2Problem {
  int horizon = 0;                 // N
  Eigen::MatrixXd relaxed_gear;    // N x 6 one-hot encoding, rows sum to 1
  Eigen::VectorXd relaxed_engine;  // N entries in [0,1]
  Eigen::MatrixXi feas_off;        // B0, N x 6 in {0,1}
  Eigen::MatrixXi feas_on;         // B1, N x 6 in {0,1}
  int dwell_gear = 3;              // L, seconds a gear must hold after a shift
  int dwell_engine = 2;            // L_e
  int initial_gear = 1;            // value held before step 0
  int initial_engine = 1;

  void validate() const;
  std::string to_json() const;
  static Step2Problem from_json_text(const std::string& text);

  /// Tracking cost of choosing gear j (1..6) with engine status e at
  /// step k: (e - e~)^2 + sum_j (b_j - r'_j)^2 with b one-hot.
  double stage_cost(int k, int gear, int engine) const;
  bool feasible(int k, int gear, int engine) const;
};

/// Integer schedule plus replayed dwell counters. The counter value is
/// the number of consecutive samples the current value has been held
/// (including the current one), saturating at dwell+1; a change at step
/// k is legal exactly when the counter before k is saturated, and the
/// counter restarts at 1 on the change. This reproduces the minimum
/// separation dwell+1 between consecutive changes.
struct DiscreteSchedule {
  std::vector<int> gear;
  std::vector<int> engine;
  std::vector<int> sigma_gear;
  std::vector<int> sigma_engine;
  double objective = 0;
};

struct Step2Stats {
  long nodes_explored = 0;
  double root_bound = 0;
  std::vector<double> node_bounds;  // recorded while small instances run
};

/// Triangular-hat one-hot encoding of a relaxed scalar gear.
Eigen::MatrixXd hat_encode_gear(const std::vector<double>& relaxed_gear);

/// Gear-feasibility matrices B0/B1 from a consistent (v, a) trajectory
/// at the 1 Hz grid. A gear is infeasible when its shaft speed exceeds
/// the redline or the demand torque exceeds the available budget
/// (EM only when the engine is off, EM + engine when on).
void build_feasibility(const std::vector<double>& v, const std::vector<double>& a,
                       const DriveCycle& cycle, const PowertrainConfig& config,
                       Eigen::MatrixXi* feas_off, Eigen::MatrixXi* feas_on);

/// Branch-and-bound on the quadratic tracking objective. Nodes branch
/// chronologically on the joint (gear, engine) choice; pruning uses the
/// exact prefix cost plus a dwell-relaxed separable suffix bound, which
/// lower-bounds every completion. Returns a certified global optimum.
/// Throws Infeasible when no dwell-feasible schedule exists.
DiscreteSchedule solve_miqp(const Step2Problem& problem, Step2Stats* stats = nullptr);

/// Exact dynamic program over (gear, engine, both dwell counters).
DiscreteSchedule solve_dp(const Step2Problem& problem);

/// Exhaustive enumeration of all dwell-feasible schedules (N <= 8).
double enumerate_schedules(const Step2Problem& problem);

struct EquivalenceReport {
  double miqp_objective = 0;
  double dp_objective = 0;
  double miqp_seconds = 0;
  double dp_seconds = 0;
  bool equal = false;
};

/// Runs both solvers and asserts objective agreement to 1e-9. On
/// divergence the instance is serialized next to `dump_dir` for
/// regression and EquivalenceFailure is thrown.
EquivalenceReport check_equivalence(const Step2Problem& problem,
                                    const std::string& dump_dir = "/tmp");

/// Replays the counter difference equations along a schedule; throws on
/// any dwell or feasibility violation.
void replay_counters(const Step2Problem& problem, DiscreteSchedule* schedule);

/// Validates one-gear-at-a-time, dwell separations and B-feasibility.
void validate_schedule(const Step2Problem& problem, const DiscreteSchedule& schedule);

/// Deterministic random instance generator for benchmarks and tests.
Step2Problem random_instance(int horizon, unsigned seed, bool adversarial = false);

}  // namespace ps3
