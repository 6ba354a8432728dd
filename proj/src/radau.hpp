#pragma once

#include <Eigen/Core>

namespace ps3 {

/// Flipped Legendre-Gauss-Radau collocation data on (0, 1], right
/// endpoint included. `diff` maps the d+1 values {interval start, values
/// at the d points} to derivatives at the d points:
///   xdot(tau_i) = (1/h) * sum_j diff(i, j) * x_j,  j = 0..d.
struct CollocationScheme {
  int degree = 0;
  Eigen::VectorXd points;   // strictly increasing, last = 1
  Eigen::VectorXd weights;  // positive, sum to 1
  Eigen::MatrixXd diff;     // d x (d+1)
};

/// Throws UnsupportedDegree outside [1, 9]. Nodes come from root-finding
/// on the Radau polynomial; degree <= 3 values are exact textbook anchors
/// used as regression checks in the tests.
CollocationScheme radau_points(int degree);

}  // namespace ps3
