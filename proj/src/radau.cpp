#include "radau.hpp"

#include <cmath>
#include <vector>

#include "util.hpp"

namespace ps3 {

namespace {

double legendre(int n, double x) {
  if (n == 0) return 1.0;
  double pm1 = 1.0, p = x;
  for (int k = 1; k < n; ++k) {
    const double next = ((2.0 * k + 1.0) * x * p - k * pm1) / (k + 1.0);
    pm1 = p;
    p = next;
  }
  return p;
}

// Roots of P_{d-1} + P_d on (-1, 1): the left-Radau interior nodes.
std::vector<double> radau_interior_roots(int d) {
  auto f = [&](double x) { return legendre(d - 1, x) + legendre(d, x); };
  std::vector<double> roots;
  const int scan = 2000 * d;
  double prev_x = -1.0 + 1e-12;
  double prev_f = f(prev_x);
  for (int i = 1; i <= scan; ++i) {
    const double x = -1.0 + 2.0 * static_cast<double>(i) / scan;
    const double fx = f(x);
    if (prev_f == 0.0) {
      roots.push_back(prev_x);
    } else if (prev_f * fx < 0.0) {
      double lo = prev_x, hi = x, flo = prev_f;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) {
          lo = hi = mid;
          break;
        }
        if (flo * fm < 0.0) {
          hi = mid;
        } else {
          lo = mid;
          flo = fm;
        }
      }
      roots.push_back(0.5 * (lo + hi));
    }
    prev_x = x;
    prev_f = fx;
  }
  if (static_cast<int>(roots.size()) != d - 1)
    fail("InternalError", "Radau root scan found " + std::to_string(roots.size()) +
                              " interior roots for degree " + std::to_string(d));
  return roots;
}

}  // namespace

CollocationScheme radau_points(int degree) {
  if (degree < 1 || degree > 9)
    fail("UnsupportedDegree", "collocation degree must be in [1, 9], got " + std::to_string(degree));

  CollocationScheme scheme;
  scheme.degree = degree;
  const int d = degree;

  // Left-Radau nodes on [-1, 1] are {-1} plus the interior roots; the
  // flipped set negates them so the right endpoint is included.
  std::vector<double> x{-1.0};
  for (double r : radau_interior_roots(d)) x.push_back(r);

  std::vector<std::pair<double, double>> flipped;  // (node in (0,1], weight)
  for (double xi : x) {
    double w;
    if (xi == -1.0) {
      w = 2.0 / (d * d);
    } else {
      const double p = legendre(d - 1, xi);
      w = (1.0 - xi) / (d * d * p * p);
    }
    flipped.emplace_back((1.0 - xi) / 2.0, w / 2.0);
  }
  std::sort(flipped.begin(), flipped.end());

  scheme.points.resize(d);
  scheme.weights.resize(d);
  for (int i = 0; i < d; ++i) {
    scheme.points[i] = flipped[static_cast<std::size_t>(i)].first;
    scheme.weights[i] = flipped[static_cast<std::size_t>(i)].second;
  }
  scheme.points[d - 1] = 1.0;  // exact endpoint

  // Lagrange differentiation over nodes {0, points...} via barycentric
  // weights; row i gives the derivative at points[i].
  const int m = d + 1;
  Eigen::VectorXd nodes(m);
  nodes[0] = 0.0;
  for (int i = 0; i < d; ++i) nodes[i + 1] = scheme.points[i];
  Eigen::VectorXd bary(m);
  for (int j = 0; j < m; ++j) {
    double prod = 1.0;
    for (int k = 0; k < m; ++k)
      if (k != j) prod *= nodes[j] - nodes[k];
    bary[j] = 1.0 / prod;
  }
  scheme.diff.resize(d, m);
  for (int i = 1; i < m; ++i) {
    double diag = 0.0;
    for (int j = 0; j < m; ++j) {
      if (j == i) continue;
      const double entry = (bary[j] / bary[i]) / (nodes[i] - nodes[j]);
      scheme.diff(i - 1, j) = entry;
      diag -= entry;
    }
    scheme.diff(i - 1, i) = diag;
  }
  return scheme;
}

}  // namespace ps3
