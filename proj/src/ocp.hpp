#pragma once

#include <Eigen/Core>
#include <functional>
#include <string>
#include <vector>

#include "ad.hpp"

namespace ps3 {

/// Continuous optimal control problem over a fixed horizon with
/// piecewise-constant controls on 1-interval blocks. All callables work
/// on dual numbers so the transcription can assemble exact first
/// derivatives; values are in natural units, per-variable scales map
/// them onto O(1) decision variables.
struct OcpDefinition {
  int state_dim = 0;
  int control_dim = 0;
  double horizon_s = 0;
  double control_interval_s = 1.0;

  Eigen::VectorXd state_scale;    // defaults to ones
  Eigen::VectorXd control_scale;  // defaults to ones

  std::function<void(double t, const ad::Dual* x, const ad::Dual* u, ad::Dual* xdot)> dynamics;
  std::function<ad::Dual(double t, const ad::Dual* x, const ad::Dual* u)> running_cost;

  struct PathBlock {
    std::string name;
    int dim = 1;
    std::function<void(double t, const ad::Dual* x, const ad::Dual* u, ad::Dual* g)> eval;
    std::function<void(double t, double* lo, double* hi)> bounds;
    std::vector<double> row_scales;  // empty -> all ones
  };
  std::vector<PathBlock> path_constraints;

  /// Time-varying variable boxes (natural units); null means unbounded.
  std::function<void(double t, double* lo, double* hi)> state_bounds;
  std::function<void(int interval, double* lo, double* hi)> control_bounds;

  Eigen::VectorXd x0_lo, x0_hi;  // initial-state box; equal entries pin

  struct TerminalCondition {
    int state_index = 0;
    double value = 0;
  };
  std::vector<TerminalCondition> terminal_equalities;

  int intervals() const;
  void validate() const;
};

}  // namespace ps3
