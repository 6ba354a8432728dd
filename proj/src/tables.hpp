#pragma once

#include <Eigen/Core>
#include <string>

#include "ad.hpp"

namespace ps3 {

/// Strictly increasing abscissae with one value per node.
struct Grid1 {
  Eigen::VectorXd x;
  Eigen::VectorXd y;

  void validate(const std::string& name) const;
};

/// Rectangular grid: `a` runs along columns (the file's first row),
/// `b` along rows (the file's first column). values(i, j) = f(a[j], b[i]).
struct Grid2 {
  Eigen::VectorXd a;
  Eigen::VectorXd b;
  Eigen::MatrixXd values;

  void validate(const std::string& name) const;
};

Grid2 load_grid2_csv(const std::string& path);

/// Piecewise-linear 1-D table, constant-slope extension beyond the ends.
class LinearTable1D {
 public:
  LinearTable1D() = default;
  explicit LinearTable1D(Grid1 grid);

  double operator()(double x) const;
  double min_value() const { return grid_.y.minCoeff(); }
  double max_value() const { return grid_.y.maxCoeff(); }
  const Grid1& grid() const { return grid_; }

 private:
  Grid1 grid_;
};

/// C1 monotone cubic Hermite (Fritsch-Carlson slopes); linear extension
/// beyond the ends keeps it C1 on all of R.
class CubicTable1D {
 public:
  CubicTable1D() = default;
  explicit CubicTable1D(Grid1 grid);

  double operator()(double x) const;
  double derivative(double x) const;
  ad::Dual operator()(const ad::Dual& x) const;
  const Grid1& grid() const { return grid_; }

 private:
  void locate(double x, int* cell, double* t) const;

  Grid1 grid_;
  Eigen::VectorXd slope_;
};

/// C0 bilinear interpolation, strict about its domain: queries outside
/// the tabulated rectangle (beyond a tiny tolerance) raise
/// MapDomainViolation.
class BilinearTable2D {
 public:
  BilinearTable2D() = default;
  BilinearTable2D(Grid2 grid, std::string name);

  double operator()(double a, double b) const;
  const Grid2& grid() const { return grid_; }

 private:
  Grid2 grid_;
  std::string name_;
};

/// C1 tensor-product cubic Hermite over the same grid data. Node partial
/// slopes use the Fritsch-Carlson rule per axis with zero cross terms,
/// which keeps adjacent patches C1. Outside the rectangle the surface
/// continues linearly from the clamped boundary point; gradients there
/// are the boundary gradients (good enough for solver iterates that
/// stray off-map, not a fitting surface).
class BicubicTable2D {
 public:
  BicubicTable2D() = default;
  explicit BicubicTable2D(Grid2 grid);

  double operator()(double a, double b) const;
  void gradient(double a, double b, double* da, double* db) const;
  ad::Dual operator()(const ad::Dual& a, const ad::Dual& b) const;
  const Grid2& grid() const { return grid_; }

 private:
  void eval_clamped(double a, double b, double* value, double* da, double* db) const;

  Grid2 grid_;
  Eigen::MatrixXd slope_a_;  // df/da at nodes
  Eigen::MatrixXd slope_b_;  // df/db at nodes
};

/// Fritsch-Carlson shape-preserving node slopes for data (x, y).
Eigen::VectorXd pchip_slopes(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

}  // namespace ps3
