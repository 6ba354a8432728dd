#include "tables.hpp"

#include <algorithm>
#include <cmath>

#include "util.hpp"

namespace ps3 {

namespace {

int find_cell(const Eigen::VectorXd& x, double q) {
  // Largest i with x[i] <= q, clamped to [0, n-2].
  const int n = static_cast<int>(x.size());
  if (q <= x[0]) return 0;
  if (q >= x[n - 1]) return n - 2;
  int lo = 0, hi = n - 1;
  while (hi - lo > 1) {
    const int mid = (lo + hi) / 2;
    (x[mid] <= q ? lo : hi) = mid;
  }
  return lo;
}

double endpoint_slope(double h0, double h1, double d0, double d1) {
  // Three-point estimate with the usual monotonicity safeguards.
  double m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
  if (m * d0 <= 0.0) {
    m = 0.0;
  } else if (d0 * d1 < 0.0 && std::abs(m) > 3.0 * std::abs(d0)) {
    m = 3.0 * d0;
  }
  return m;
}

}  // namespace

void Grid1::validate(const std::string& name) const {
  if (x.size() < 2 || x.size() != y.size())
    fail("ConfigError", name + ": 1-D table needs >= 2 equally sized x/y arrays");
  for (int i = 1; i < x.size(); ++i)
    if (!(x[i] > x[i - 1])) fail("ConfigError", name + ": x grid must be strictly increasing");
  for (int i = 0; i < x.size(); ++i)
    if (!std::isfinite(x[i]) || !std::isfinite(y[i]))
      fail("ConfigError", name + ": non-finite table entry");
}

void Grid2::validate(const std::string& name) const {
  if (a.size() < 2 || b.size() < 2)
    fail("ConfigError", name + ": 2-D table needs >= 2 nodes per axis");
  if (values.rows() != b.size() || values.cols() != a.size())
    fail("ConfigError", name + ": value matrix shape does not match axes");
  for (int i = 1; i < a.size(); ++i)
    if (!(a[i] > a[i - 1])) fail("ConfigError", name + ": column axis must be strictly increasing");
  for (int i = 1; i < b.size(); ++i)
    if (!(b[i] > b[i - 1])) fail("ConfigError", name + ": row axis must be strictly increasing");
  if (!values.allFinite()) fail("ConfigError", name + ": non-finite table entry");
}

Grid2 load_grid2_csv(const std::string& path) {
  const auto rows = read_numeric_csv(path);
  if (rows.size() < 3) fail("ConfigError", path + ": map file needs an axis row plus >= 2 data rows");
  const std::size_t data_cols = rows[1].size();
  std::size_t axis_offset;
  if (rows[0].size() == data_cols - 1) {
    axis_offset = 0;  // bare axis row
  } else if (rows[0].size() == data_cols) {
    axis_offset = 1;  // padded corner cell
  } else {
    fail("ConfigError", path + ": first row length does not match data rows");
  }

  Grid2 g;
  const std::size_t na = data_cols - 1;
  const std::size_t nb = rows.size() - 1;
  g.a.resize(static_cast<int>(na));
  for (std::size_t j = 0; j < na; ++j) g.a[static_cast<int>(j)] = rows[0][axis_offset + j];
  g.b.resize(static_cast<int>(nb));
  g.values.resize(static_cast<int>(nb), static_cast<int>(na));
  for (std::size_t i = 0; i < nb; ++i) {
    const auto& row = rows[i + 1];
    if (row.size() != data_cols) fail("ConfigError", path + ": ragged data row");
    g.b[static_cast<int>(i)] = row[0];
    for (std::size_t j = 0; j < na; ++j)
      g.values(static_cast<int>(i), static_cast<int>(j)) = row[1 + j];
  }
  g.validate(path);
  return g;
}

Eigen::VectorXd pchip_slopes(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  const int n = static_cast<int>(x.size());
  Eigen::VectorXd m(n);
  if (n == 2) {
    m.setConstant((y[1] - y[0]) / (x[1] - x[0]));
    return m;
  }
  Eigen::VectorXd h(n - 1), d(n - 1);
  for (int i = 0; i < n - 1; ++i) {
    h[i] = x[i + 1] - x[i];
    d[i] = (y[i + 1] - y[i]) / h[i];
  }
  m[0] = endpoint_slope(h[0], h[1], d[0], d[1]);
  m[n - 1] = endpoint_slope(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
  for (int i = 1; i < n - 1; ++i) {
    if (d[i - 1] == 0.0 || d[i] == 0.0 || (d[i - 1] > 0.0) != (d[i] > 0.0)) {
      m[i] = 0.0;
    } else {
      const double w1 = 2.0 * h[i] + h[i - 1];
      const double w2 = h[i] + 2.0 * h[i - 1];
      m[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
    }
  }
  return m;
}

LinearTable1D::LinearTable1D(Grid1 grid) : grid_(std::move(grid)) {
  grid_.validate("linear table");
}

double LinearTable1D::operator()(double x) const {
  const int i = find_cell(grid_.x, x);
  const double t = (x - grid_.x[i]) / (grid_.x[i + 1] - grid_.x[i]);
  return grid_.y[i] + t * (grid_.y[i + 1] - grid_.y[i]);
}

CubicTable1D::CubicTable1D(Grid1 grid) : grid_(std::move(grid)) {
  grid_.validate("cubic table");
  slope_ = pchip_slopes(grid_.x, grid_.y);
}

void CubicTable1D::locate(double x, int* cell, double* t) const {
  *cell = find_cell(grid_.x, x);
  *t = (x - grid_.x[*cell]) / (grid_.x[*cell + 1] - grid_.x[*cell]);
}

double CubicTable1D::operator()(double x) const {
  const int n = static_cast<int>(grid_.x.size());
  if (x < grid_.x[0]) return grid_.y[0] + slope_[0] * (x - grid_.x[0]);
  if (x > grid_.x[n - 1]) return grid_.y[n - 1] + slope_[n - 1] * (x - grid_.x[n - 1]);
  int i;
  double t;
  locate(x, &i, &t);
  const double h = grid_.x[i + 1] - grid_.x[i];
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * grid_.y[i] + (t3 - 2 * t2 + t) * h * slope_[i] +
         (-2 * t3 + 3 * t2) * grid_.y[i + 1] + (t3 - t2) * h * slope_[i + 1];
}

double CubicTable1D::derivative(double x) const {
  const int n = static_cast<int>(grid_.x.size());
  if (x < grid_.x[0]) return slope_[0];
  if (x > grid_.x[n - 1]) return slope_[n - 1];
  int i;
  double t;
  locate(x, &i, &t);
  const double h = grid_.x[i + 1] - grid_.x[i];
  const double t2 = t * t;
  const double dv = (6 * t2 - 6 * t) * grid_.y[i] + (3 * t2 - 4 * t + 1) * h * slope_[i] +
                    (-6 * t2 + 6 * t) * grid_.y[i + 1] + (3 * t2 - 2 * t) * h * slope_[i + 1];
  return dv / h;
}

ad::Dual CubicTable1D::operator()(const ad::Dual& x) const {
  return {(*this)(x.v), ad::detail::scale(x.g, derivative(x.v))};
}

BilinearTable2D::BilinearTable2D(Grid2 grid, std::string name)
    : grid_(std::move(grid)), name_(std::move(name)) {
  grid_.validate(name_);
}

double BilinearTable2D::operator()(double a, double b) const {
  const int na = static_cast<int>(grid_.a.size());
  const int nb = static_cast<int>(grid_.b.size());
  const double tol_a = 1e-9 * std::max(1.0, std::abs(grid_.a[na - 1]));
  const double tol_b = 1e-9 * std::max(1.0, std::abs(grid_.b[nb - 1]));
  if (a < grid_.a[0] - tol_a || a > grid_.a[na - 1] + tol_a || b < grid_.b[0] - tol_b ||
      b > grid_.b[nb - 1] + tol_b) {
    fail("MapDomainViolation", name_ + ": query (" + format_double(a) + ", " + format_double(b) +
                                   ") outside tabulated rectangle");
  }
  const int j = find_cell(grid_.a, a);
  const int i = find_cell(grid_.b, b);
  const double u = std::clamp((a - grid_.a[j]) / (grid_.a[j + 1] - grid_.a[j]), 0.0, 1.0);
  const double w = std::clamp((b - grid_.b[i]) / (grid_.b[i + 1] - grid_.b[i]), 0.0, 1.0);
  return (1 - u) * (1 - w) * grid_.values(i, j) + u * (1 - w) * grid_.values(i, j + 1) +
         (1 - u) * w * grid_.values(i + 1, j) + u * w * grid_.values(i + 1, j + 1);
}

BicubicTable2D::BicubicTable2D(Grid2 grid) : grid_(std::move(grid)) {
  grid_.validate("bicubic table");
  const int nb = static_cast<int>(grid_.b.size());
  const int na = static_cast<int>(grid_.a.size());
  slope_a_.resize(nb, na);
  slope_b_.resize(nb, na);
  for (int i = 0; i < nb; ++i)
    slope_a_.row(i) = pchip_slopes(grid_.a, grid_.values.row(i).transpose()).transpose();
  for (int j = 0; j < na; ++j) slope_b_.col(j) = pchip_slopes(grid_.b, grid_.values.col(j));
}

namespace {
inline void hermite_basis(double t, double* h0, double* h1, double* k0, double* k1) {
  const double t2 = t * t, t3 = t2 * t;
  *h0 = 2 * t3 - 3 * t2 + 1;
  *h1 = -2 * t3 + 3 * t2;
  *k0 = t3 - 2 * t2 + t;
  *k1 = t3 - t2;
}
inline void hermite_basis_d(double t, double* h0, double* h1, double* k0, double* k1) {
  const double t2 = t * t;
  *h0 = 6 * t2 - 6 * t;
  *h1 = -6 * t2 + 6 * t;
  *k0 = 3 * t2 - 4 * t + 1;
  *k1 = 3 * t2 - 2 * t;
}
}  // namespace

void BicubicTable2D::eval_clamped(double a, double b, double* value, double* da,
                                  double* db) const {
  const int j = find_cell(grid_.a, a);
  const int i = find_cell(grid_.b, b);
  const double ha = grid_.a[j + 1] - grid_.a[j];
  const double hb = grid_.b[i + 1] - grid_.b[i];
  const double u = (a - grid_.a[j]) / ha;
  const double w = (b - grid_.b[i]) / hb;

  double hu0, hu1, ku0, ku1, hw0, hw1, kw0, kw1;
  double du0, du1, eu0, eu1, dw0, dw1, ew0, ew1;
  hermite_basis(u, &hu0, &hu1, &ku0, &ku1);
  hermite_basis(w, &hw0, &hw1, &kw0, &kw1);
  hermite_basis_d(u, &du0, &du1, &eu0, &eu1);
  hermite_basis_d(w, &dw0, &dw1, &ew0, &ew1);

  const double f[2][2] = {{grid_.values(i, j), grid_.values(i, j + 1)},
                          {grid_.values(i + 1, j), grid_.values(i + 1, j + 1)}};
  const double fa[2][2] = {{slope_a_(i, j), slope_a_(i, j + 1)},
                           {slope_a_(i + 1, j), slope_a_(i + 1, j + 1)}};
  const double fb[2][2] = {{slope_b_(i, j), slope_b_(i, j + 1)},
                           {slope_b_(i + 1, j), slope_b_(i + 1, j + 1)}};

  const double HU[2] = {hu0, hu1}, KU[2] = {ku0, ku1};
  const double HW[2] = {hw0, hw1}, KW[2] = {kw0, kw1};
  const double DU[2] = {du0, du1}, EU[2] = {eu0, eu1};
  const double DW[2] = {dw0, dw1}, EW[2] = {ew0, ew1};

  double v = 0, va = 0, vb = 0;
  for (int bi = 0; bi < 2; ++bi) {
    for (int ai = 0; ai < 2; ++ai) {
      v += HU[ai] * HW[bi] * f[bi][ai] + KU[ai] * HW[bi] * ha * fa[bi][ai] +
           HU[ai] * KW[bi] * hb * fb[bi][ai];
      va += DU[ai] * HW[bi] * f[bi][ai] + EU[ai] * HW[bi] * ha * fa[bi][ai] +
            DU[ai] * KW[bi] * hb * fb[bi][ai];
      vb += HU[ai] * DW[bi] * f[bi][ai] + KU[ai] * DW[bi] * ha * fa[bi][ai] +
            HU[ai] * EW[bi] * hb * fb[bi][ai];
    }
  }
  *value = v;
  *da = va / ha;
  *db = vb / hb;
}

double BicubicTable2D::operator()(double a, double b) const {
  double v, da, db;
  const double ac = std::clamp(a, grid_.a[0], grid_.a[grid_.a.size() - 1]);
  const double bc = std::clamp(b, grid_.b[0], grid_.b[grid_.b.size() - 1]);
  eval_clamped(ac, bc, &v, &da, &db);
  return v + da * (a - ac) + db * (b - bc);
}

void BicubicTable2D::gradient(double a, double b, double* da, double* db) const {
  double v;
  const double ac = std::clamp(a, grid_.a[0], grid_.a[grid_.a.size() - 1]);
  const double bc = std::clamp(b, grid_.b[0], grid_.b[grid_.b.size() - 1]);
  eval_clamped(ac, bc, &v, da, db);
}

ad::Dual BicubicTable2D::operator()(const ad::Dual& a, const ad::Dual& b) const {
  double v, da, db;
  const double ac = std::clamp(a.v, grid_.a[0], grid_.a[grid_.a.size() - 1]);
  const double bc = std::clamp(b.v, grid_.b[0], grid_.b[grid_.b.size() - 1]);
  eval_clamped(ac, bc, &v, &da, &db);
  ad::Dual out(v + da * (a.v - ac) + db * (b.v - bc));
  out.g = ad::detail::combine(a.g, da, b.g, db);
  return out;
}

}  // namespace ps3
