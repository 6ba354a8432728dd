#pragma once

#include <Eigen/Core>
#include <utility>
#include <vector>

namespace ps3 {

inline constexpr double kInfinity = 1e20;

/// Smooth NLP in the form
///   min f(x)  s.t.  c_lo <= c(x) <= c_hi,  x_lo <= x <= x_hi,
/// with exact first derivatives and a fixed Jacobian sparsity pattern.
/// `hessian_groups` returns contiguous variable ranges such that the
/// Lagrangian Hessian has no nonzeros across two different ranges; the
/// solver maintains one dense quasi-Newton block per range.
class NlpProblem {
 public:
  virtual ~NlpProblem() = default;

  virtual int num_variables() const = 0;
  virtual int num_constraints() const = 0;

  virtual void variable_bounds(Eigen::VectorXd* lo, Eigen::VectorXd* hi) const = 0;
  virtual void constraint_bounds(Eigen::VectorXd* lo, Eigen::VectorXd* hi) const = 0;

  virtual double objective(const Eigen::VectorXd& x) const = 0;
  virtual void objective_gradient(const Eigen::VectorXd& x, Eigen::VectorXd* grad) const = 0;
  virtual void constraints(const Eigen::VectorXd& x, Eigen::VectorXd* c) const = 0;

  virtual const std::vector<std::pair<int, int>>& jacobian_pattern() const = 0;
  virtual void jacobian_values(const Eigen::VectorXd& x, Eigen::VectorXd* values) const = 0;

  virtual std::vector<std::pair<int, int>> hessian_groups() const {
    return {{0, num_variables()}};
  }
};

}  // namespace ps3
