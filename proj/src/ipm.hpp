#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "nlp_problem.hpp"

namespace ps3 {

struct SolverOptions {
  double kkt_tolerance = 1e-6;
  int max_iterations = 3000;
  double barrier_init = 0.1;
  bool warm_start = false;
  double bound_relaxation = 1e-4;  // applied to variable bounds and inequality rows
  std::ostream* log = nullptr;     // optional line-oriented iteration log
};

enum class SolveStatus { Optimal, MaxIter, Infeasible, Diverged };

const char* to_string(SolveStatus status);

struct IterationRecord {
  int iteration = 0;
  double objective = 0;
  double primal_inf = 0;
  double dual_inf = 0;
  double mu = 0;
  double step = 0;
};

struct SolveReport {
  SolveStatus status = SolveStatus::Diverged;
  double kkt_residual = 0;
  int iterations = 0;
  double objective = 0;
  Eigen::VectorXd solution;
  Eigen::VectorXd constraint_multipliers;
  Eigen::VectorXd bound_multipliers_lower;
  Eigen::VectorXd bound_multipliers_upper;
  double constraint_violation = 0;  // unrelaxed infinity norm at the solution
  std::vector<IterationRecord> history;
};

/// Primal-dual interior-point solve with damped block-BFGS Lagrangian
/// Hessian, an l1 penalty line search, inertia-corrected LDLT steps and
/// a monotone barrier schedule. Infeasibility is declared through an
/// elastic phase that minimizes the l1 constraint violation.
SolveReport solve(const NlpProblem& problem, const Eigen::VectorXd& initial_guess,
                  const SolverOptions& options);

/// Worst relative deviation between the problem's derivatives and central
/// finite differences at `point` (objective gradient and Jacobian).
double gradient_check(const NlpProblem& problem, const Eigen::VectorXd& point);

}  // namespace ps3
