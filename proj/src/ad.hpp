#pragma once

#include <Eigen/Core>
#include <cassert>
#include <cmath>

// Forward-mode scalar with a fixed-capacity gradient vector. Seed width
// is the number of independent inputs of the expression being evaluated
// (states + controls of one collocation point); 24 covers every problem
// built here. A zero-length gradient denotes an exact constant, so
// constants never allocate or propagate zeros.

namespace ps3::ad {

inline constexpr int kMaxSeeds = 24;

using Grad = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxSeeds, 1>;

struct Dual {
  double v = 0.0;
  Grad g;  // empty == constant

  Dual() = default;
  Dual(double value) : v(value) {}  // NOLINT: implicit by design
  Dual(double value, Grad grad) : v(value), g(std::move(grad)) {}

  static Dual seeded(double value, int width, int index) {
    Dual d(value);
    d.g = Grad::Zero(width);
    d.g[index] = 1.0;
    return d;
  }

  bool is_const() const { return g.size() == 0; }
};

namespace detail {
inline Grad combine(const Grad& a, double ca, const Grad& b, double cb) {
  if (a.size() == 0 && b.size() == 0) return Grad();
  if (a.size() == 0) return cb * b;
  if (b.size() == 0) return ca * a;
  assert(a.size() == b.size());
  return ca * a + cb * b;
}
inline Grad scale(const Grad& a, double c) {
  if (a.size() == 0) return Grad();
  return c * a;
}
}  // namespace detail

inline Dual operator+(const Dual& a, const Dual& b) {
  return {a.v + b.v, detail::combine(a.g, 1.0, b.g, 1.0)};
}
inline Dual operator-(const Dual& a, const Dual& b) {
  return {a.v - b.v, detail::combine(a.g, 1.0, b.g, -1.0)};
}
inline Dual operator-(const Dual& a) { return {-a.v, detail::scale(a.g, -1.0)}; }
inline Dual operator*(const Dual& a, const Dual& b) {
  return {a.v * b.v, detail::combine(a.g, b.v, b.g, a.v)};
}
inline Dual operator/(const Dual& a, const Dual& b) {
  const double inv = 1.0 / b.v;
  return {a.v * inv, detail::combine(a.g, inv, b.g, -a.v * inv * inv)};
}

inline Dual& operator+=(Dual& a, const Dual& b) { return a = a + b; }
inline Dual& operator-=(Dual& a, const Dual& b) { return a = a - b; }
inline Dual& operator*=(Dual& a, const Dual& b) { return a = a * b; }
inline Dual& operator/=(Dual& a, const Dual& b) { return a = a / b; }

inline bool operator<(const Dual& a, const Dual& b) { return a.v < b.v; }
inline bool operator>(const Dual& a, const Dual& b) { return a.v > b.v; }
inline bool operator<=(const Dual& a, const Dual& b) { return a.v <= b.v; }
inline bool operator>=(const Dual& a, const Dual& b) { return a.v >= b.v; }

inline Dual sqrt(const Dual& a) {
  const double r = std::sqrt(a.v);
  return {r, detail::scale(a.g, 0.5 / r)};
}

/// sqrt with a C1 linear extension below `floor`, so iterates that wander
/// outside the feasible region keep finite values and live derivatives.
inline Dual sqrt_extended(const Dual& a, double floor) {
  if (a.v >= floor) return sqrt(a);
  const double r = std::sqrt(floor);
  const double slope = 0.5 / r;
  return {r + slope * (a.v - floor), detail::scale(a.g, slope)};
}

inline Dual exp(const Dual& a) {
  const double e = std::exp(a.v);
  return {e, detail::scale(a.g, e)};
}
inline Dual log(const Dual& a) { return {std::log(a.v), detail::scale(a.g, 1.0 / a.v)}; }
inline Dual pow(const Dual& a, double p) {
  return {std::pow(a.v, p), detail::scale(a.g, p * std::pow(a.v, p - 1.0))};
}
inline Dual sin(const Dual& a) { return {std::sin(a.v), detail::scale(a.g, std::cos(a.v))}; }
inline Dual cos(const Dual& a) { return {std::cos(a.v), detail::scale(a.g, -std::sin(a.v))}; }

// Branch-selecting min/max: derivative follows the active side.
inline Dual max(const Dual& a, const Dual& b) { return a.v >= b.v ? a : b; }
inline Dual min(const Dual& a, const Dual& b) { return a.v <= b.v ? a : b; }
inline Dual abs(const Dual& a) { return a.v >= 0.0 ? a : -a; }

inline double value(const Dual& a) { return a.v; }
inline double value(double a) { return a; }

// Plain-double counterparts so physics templates instantiate for both.
inline double max(double a, double b) { return a >= b ? a : b; }
inline double min(double a, double b) { return a <= b ? a : b; }
inline double abs(double a) { return std::abs(a); }
inline double sqrt_extended(double a, double floor) {
  if (a >= floor) return std::sqrt(a);
  const double r = std::sqrt(floor);
  return r + 0.5 / r * (a - floor);
}

}  // namespace ps3::ad
