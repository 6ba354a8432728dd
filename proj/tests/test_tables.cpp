#include <doctest.h>

#include <cmath>
#include <random>

#include "tables.hpp"
#include "util.hpp"

using namespace ps3;

namespace {
Grid1 make_grid1(std::initializer_list<double> xs, std::initializer_list<double> ys) {
  Grid1 g;
  g.x = Eigen::Map<const Eigen::VectorXd>(xs.begin(), static_cast<int>(xs.size()));
  g.y = Eigen::Map<const Eigen::VectorXd>(ys.begin(), static_cast<int>(ys.size()));
  return g;
}

Grid2 make_grid2(int na, int nb, const std::function<double(double, double)>& fn) {
  Grid2 g;
  g.a = Eigen::VectorXd::LinSpaced(na, 0.0, 10.0);
  g.b = Eigen::VectorXd::LinSpaced(nb, -5.0, 5.0);
  g.values.resize(nb, na);
  for (int i = 0; i < nb; ++i)
    for (int j = 0; j < na; ++j) g.values(i, j) = fn(g.a[j], g.b[i]);
  return g;
}
}  // namespace

TEST_CASE("pchip cubic interpolates nodes and preserves monotone data") {
  CubicTable1D table(make_grid1({0, 1, 2, 4, 7}, {1.0, 2.0, 2.5, 6.0, 6.5}));
  CHECK(table(0.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(table(4.0) == doctest::Approx(6.0).epsilon(1e-14));
  double prev = table(0.0);
  for (double x = 0.01; x <= 7.0; x += 0.01) {
    const double v = table(x);
    CHECK(v >= prev - 1e-12);
    prev = v;
  }
}

TEST_CASE("cubic derivative matches finite differences") {
  CubicTable1D table(make_grid1({0, 1, 3, 4, 6}, {0.0, 1.0, -0.5, 2.0, 1.0}));
  for (double x : {0.3, 1.7, 3.5, 5.2}) {
    const double fd = (table(x + 1e-7) - table(x - 1e-7)) / 2e-7;
    CHECK(table.derivative(x) == doctest::Approx(fd).epsilon(1e-5));
  }
  // Dual propagation uses the same slope.
  ad::Dual x = ad::Dual::seeded(2.2, 1, 0);
  const ad::Dual y = table(x);
  CHECK(y.g[0] == doctest::Approx(table.derivative(2.2)).epsilon(1e-13));
}

TEST_CASE("bilinear is exact at nodes and within the cell hull") {
  auto fn = [](double a, double b) { return std::sin(a) * (b + 6.0); };
  const Grid2 grid = make_grid2(9, 7, fn);
  BilinearTable2D table(grid, "test map");

  for (int i = 0; i < grid.b.size(); ++i)
    for (int j = 0; j < grid.a.size(); ++j)
      CHECK(table(grid.a[j], grid.b[i]) == doctest::Approx(grid.values(i, j)).epsilon(1e-14));

  std::mt19937 rng(7);
  std::uniform_real_distribution<double> ua(0.0, 10.0), ub(-5.0, 5.0);
  for (int trial = 0; trial < 500; ++trial) {
    const double a = ua(rng), b = ub(rng);
    int j = 0, i = 0;
    while (j + 2 < grid.a.size() && grid.a[j + 1] <= a) ++j;
    while (i + 2 < grid.b.size() && grid.b[i + 1] <= b) ++i;
    const double v = table(a, b);
    const double lo = std::min({grid.values(i, j), grid.values(i, j + 1), grid.values(i + 1, j),
                                grid.values(i + 1, j + 1)});
    const double hi = std::max({grid.values(i, j), grid.values(i, j + 1), grid.values(i + 1, j),
                                grid.values(i + 1, j + 1)});
    CHECK(v >= lo - 1e-12);
    CHECK(v <= hi + 1e-12);
  }
}

TEST_CASE("bilinear rejects queries outside the rectangle") {
  BilinearTable2D table(make_grid2(4, 4, [](double a, double b) { return a + b; }), "m");
  CHECK_THROWS_AS(table(11.0, 0.0), Error);
  CHECK_THROWS_AS(table(5.0, -5.2), Error);
}

TEST_CASE("bicubic agrees with bilinear at nodes and has exact ad gradients") {
  auto fn = [](double a, double b) { return a * a * 0.1 + std::cos(b) + 0.02 * a * b; };
  const Grid2 grid = make_grid2(8, 9, fn);
  BilinearTable2D bilinear(grid, "m");
  BicubicTable2D bicubic(grid);

  for (int i = 0; i < grid.b.size(); ++i)
    for (int j = 0; j < grid.a.size(); ++j)
      CHECK(bicubic(grid.a[j], grid.b[i]) ==
            doctest::Approx(bilinear(grid.a[j], grid.b[i])).epsilon(1e-12));

  std::mt19937 rng(3);
  std::uniform_real_distribution<double> ua(0.2, 9.8), ub(-4.8, 4.8);
  for (int trial = 0; trial < 50; ++trial) {
    const double a = ua(rng), b = ub(rng);
    const double eps = 1e-6;
    const double fda = (bicubic(a + eps, b) - bicubic(a - eps, b)) / (2 * eps);
    const double fdb = (bicubic(a, b + eps) - bicubic(a, b - eps)) / (2 * eps);
    double da, db;
    bicubic.gradient(a, b, &da, &db);
    CHECK(da == doctest::Approx(fda).epsilon(1e-5));
    CHECK(db == doctest::Approx(fdb).epsilon(1e-5));
  }

  // C1 across cell edges: gradient approached from both sides agrees.
  const double edge = grid.a[3];
  double dl, dr, dummy;
  bicubic.gradient(edge - 1e-9, 1.3, &dl, &dummy);
  bicubic.gradient(edge + 1e-9, 1.3, &dr, &dummy);
  CHECK(dl == doctest::Approx(dr).epsilon(1e-6));
}

TEST_CASE("bicubic extends linearly outside the rectangle") {
  const Grid2 grid = make_grid2(5, 5, [](double a, double b) { return a + 2 * b; });
  BicubicTable2D table(grid);
  const double inside = table(10.0, 2.0);
  const double outside = table(12.0, 2.0);
  double da, db;
  table.gradient(10.0, 2.0, &da, &db);
  CHECK(outside == doctest::Approx(inside + 2.0 * da).epsilon(1e-10));
}

TEST_CASE("grid csv loader accepts bare and padded axis rows") {
  const std::string dir = "/tmp/ps3_table_test";
  std::system(("mkdir -p " + dir).c_str());
  write_text_file(dir + "/bare.csv", "1,2\n10,5,6\n20,7,8\n");
  write_text_file(dir + "/padded.csv", "0,1,2\n10,5,6\n20,7,8\n");
  const Grid2 bare = load_grid2_csv(dir + "/bare.csv");
  const Grid2 padded = load_grid2_csv(dir + "/padded.csv");
  CHECK(bare.a == padded.a);
  CHECK(bare.values == padded.values);
  CHECK(bare.values(1, 0) == 7.0);
}
