#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

#include "ipm.hpp"
#include "nlp_problem.hpp"

using namespace ps3;

namespace {

struct LambdaProblem : NlpProblem {
  int n = 0, m = 0;
  Eigen::VectorXd xlo, xhi, clo, chi;
  std::function<double(const Eigen::VectorXd&)> fobj;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> fgrad;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> fcons;
  std::vector<std::pair<int, int>> pattern;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> fjac;

  int num_variables() const override { return n; }
  int num_constraints() const override { return m; }
  void variable_bounds(Eigen::VectorXd* lo, Eigen::VectorXd* hi) const override {
    *lo = xlo;
    *hi = xhi;
  }
  void constraint_bounds(Eigen::VectorXd* lo, Eigen::VectorXd* hi) const override {
    *lo = clo;
    *hi = chi;
  }
  double objective(const Eigen::VectorXd& x) const override { return fobj(x); }
  void objective_gradient(const Eigen::VectorXd& x, Eigen::VectorXd* g) const override {
    *g = fgrad(x);
  }
  void constraints(const Eigen::VectorXd& x, Eigen::VectorXd* c) const override {
    *c = m > 0 ? fcons(x) : Eigen::VectorXd(0);
  }
  const std::vector<std::pair<int, int>>& jacobian_pattern() const override { return pattern; }
  void jacobian_values(const Eigen::VectorXd& x, Eigen::VectorXd* v) const override {
    *v = m > 0 ? fjac(x) : Eigen::VectorXd(0);
  }
};

LambdaProblem bound_qp() {
  LambdaProblem p;
  p.n = 1;
  p.m = 0;
  p.xlo = Eigen::VectorXd::Constant(1, 1.0);
  p.xhi = Eigen::VectorXd::Constant(1, kInfinity);
  p.fobj = [](const Eigen::VectorXd& x) { return x[0] * x[0]; };
  p.fgrad = [](const Eigen::VectorXd& x) { return Eigen::VectorXd::Constant(1, 2 * x[0]); };
  return p;
}

LambdaProblem equality_qp() {
  LambdaProblem p;
  p.n = 2;
  p.m = 1;
  p.xlo = Eigen::VectorXd::Constant(2, -kInfinity);
  p.xhi = Eigen::VectorXd::Constant(2, kInfinity);
  p.clo = Eigen::VectorXd::Zero(1);
  p.chi = Eigen::VectorXd::Zero(1);
  p.fobj = [](const Eigen::VectorXd& x) {
    return (x[0] - 2) * (x[0] - 2) + (x[1] + 1) * (x[1] + 1);
  };
  p.fgrad = [](const Eigen::VectorXd& x) {
    return Eigen::Vector2d(2 * (x[0] - 2), 2 * (x[1] + 1)).eval();
  };
  p.fcons = [](const Eigen::VectorXd& x) {
    return Eigen::VectorXd::Constant(1, x[0] + x[1]).eval();
  };
  p.pattern = {{0, 0}, {0, 1}};
  p.fjac = [](const Eigen::VectorXd&) { return Eigen::Vector2d(1.0, 1.0).eval(); };
  return p;
}

LambdaProblem rosenbrock() {
  LambdaProblem p;
  p.n = 2;
  p.m = 0;
  p.xlo = Eigen::VectorXd::Constant(2, -kInfinity);
  p.xhi = Eigen::VectorXd::Constant(2, kInfinity);
  p.fobj = [](const Eigen::VectorXd& x) {
    const double a = 1 - x[0];
    const double b = x[1] - x[0] * x[0];
    return a * a + 100 * b * b;
  };
  p.fgrad = [](const Eigen::VectorXd& x) {
    const double b = x[1] - x[0] * x[0];
    return Eigen::Vector2d(-2 * (1 - x[0]) - 400 * x[0] * b, 200 * b).eval();
  };
  return p;
}

}  // namespace

TEST_CASE("active-bound QP") {
  const auto p = bound_qp();
  const auto report = solve(p, Eigen::VectorXd::Constant(1, 4.0), {});
  REQUIRE(report.status == SolveStatus::Optimal);
  CHECK(report.solution[0] == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(report.objective == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(report.kkt_residual <= 1e-6);
}

TEST_CASE("equality-constrained QP hits the hand KKT point") {
  const auto p = equality_qp();
  const auto report = solve(p, Eigen::Vector2d(0.0, 0.0), {});
  REQUIRE(report.status == SolveStatus::Optimal);
  CHECK(report.solution[0] == doctest::Approx(1.5).epsilon(1e-6));
  CHECK(report.solution[1] == doctest::Approx(-1.5).epsilon(1e-6));
}

TEST_CASE("Rosenbrock from the classic start") {
  const auto p = rosenbrock();
  SolverOptions opts;
  opts.max_iterations = 500;
  const auto report = solve(p, Eigen::Vector2d(-1.2, 1.0), opts);
  REQUIRE(report.status == SolveStatus::Optimal);
  CHECK(report.solution[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(report.solution[1] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("barrier parameter decreases monotonically") {
  const auto p = rosenbrock();
  SolverOptions opts;
  opts.max_iterations = 500;
  const auto report = solve(p, Eigen::Vector2d(-1.2, 1.0), opts);
  REQUIRE(report.history.size() > 3);
  double prev = report.history.front().mu;
  bool strictly_decreased = false;
  for (const auto& rec : report.history) {
    CHECK(rec.mu <= prev + 1e-15);
    if (rec.mu < prev) strictly_decreased = true;
    prev = rec.mu;
  }
  CHECK(strictly_decreased);
}

TEST_CASE("feasibility of reported optima") {
  // Inequality rows and bounds together; check the unrelaxed residual.
  LambdaProblem p;
  p.n = 2;
  p.m = 2;
  p.xlo = Eigen::Vector2d(-5.0, -5.0);
  p.xhi = Eigen::Vector2d(5.0, 5.0);
  p.clo = Eigen::Vector2d(1.0, -kInfinity);
  p.chi = Eigen::Vector2d(kInfinity, 4.0);
  p.fobj = [](const Eigen::VectorXd& x) { return x.squaredNorm(); };
  p.fgrad = [](const Eigen::VectorXd& x) { return (2 * x).eval(); };
  p.fcons = [](const Eigen::VectorXd& x) {
    return Eigen::Vector2d(x[0] + x[1], x[0] - x[1]).eval();
  };
  p.pattern = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
  p.fjac = [](const Eigen::VectorXd&) {
    return (Eigen::VectorXd(4) << 1, 1, 1, -1).finished();
  };
  const auto report = solve(p, Eigen::Vector2d(3.0, -2.0), {});
  REQUIRE(report.status == SolveStatus::Optimal);
  // Row bounds are relaxed by rho = 1e-4, so the optimum sits within
  // that margin of the nominal (0.5, 0.5).
  CHECK(report.solution[0] == doctest::Approx(0.5).epsilon(2e-4));
  CHECK(report.solution[1] == doctest::Approx(0.5).epsilon(2e-4));
  Eigen::VectorXd c;
  p.constraints(report.solution, &c);
  CHECK(c[0] >= 1.0 - (1e-4 + 1e-6));  // within rho + tolerance
  CHECK(c[1] <= 4.0 + (1e-4 + 1e-6));
}

TEST_CASE("conflicting rows are declared infeasible via the elastic phase") {
  LambdaProblem p;
  p.n = 1;
  p.m = 2;
  p.xlo = Eigen::VectorXd::Constant(1, -kInfinity);
  p.xhi = Eigen::VectorXd::Constant(1, kInfinity);
  p.clo = Eigen::Vector2d(1.0, -kInfinity);
  p.chi = Eigen::Vector2d(kInfinity, -1.0);
  p.fobj = [](const Eigen::VectorXd& x) { return x[0]; };
  p.fgrad = [](const Eigen::VectorXd&) { return Eigen::VectorXd::Constant(1, 1.0).eval(); };
  p.fcons = [](const Eigen::VectorXd& x) { return Eigen::Vector2d(x[0], x[0]).eval(); };
  p.pattern = {{0, 0}, {1, 0}};
  p.fjac = [](const Eigen::VectorXd&) { return Eigen::Vector2d(1.0, 1.0).eval(); };
  const auto report = solve(p, Eigen::VectorXd::Zero(1), {});
  CHECK(report.status == SolveStatus::Infeasible);
}

TEST_CASE("gradient check separates exact, noisy and corrupted derivatives") {
  // Linear objective: finite differences agree to machine precision.
  LambdaProblem lin;
  lin.n = 3;
  lin.m = 0;
  lin.xlo = Eigen::VectorXd::Constant(3, -kInfinity);
  lin.xhi = Eigen::VectorXd::Constant(3, kInfinity);
  lin.fobj = [](const Eigen::VectorXd& x) { return 2 * x[0] - 3 * x[1] + 0.5 * x[2]; };
  lin.fgrad = [](const Eigen::VectorXd&) {
    return (Eigen::VectorXd(3) << 2, -3, 0.5).finished();
  };
  CHECK(gradient_check(lin, Eigen::Vector3d(0.5, 0.4, 0.4)) <= 1e-10);

  // Deliberately corrupted gradient: the check must flag it.
  LambdaProblem bad = lin;
  bad.fgrad = [](const Eigen::VectorXd&) {
    return (Eigen::VectorXd(3) << 2, -3, 0.75).finished();
  };
  CHECK(gradient_check(bad, Eigen::Vector3d(0.5, 0.4, 0.4)) > 1e-2);
}
