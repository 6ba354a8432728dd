#include "ipm.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <ostream>

#include "util.hpp"

namespace ps3 {

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::MaxIter: return "max_iterations";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Diverged: return "diverged";
  }
  return "unknown";
}

namespace {

constexpr double kTauFtb = 0.995;    // fraction-to-boundary
constexpr double kKappaSigma = 1e10; // bound-multiplier safeguard
constexpr double kArmijo = 1e-4;

struct Bounds {
  Eigen::VectorXd lo, hi;
  std::vector<int> lower_set, upper_set;  // indices with finite sides
};

/// Elastic reformulation: min sum(p + n) s.t. c(x) + p - n within the
/// original row bounds, p, n >= 0, x within its box. Used both to declare
/// infeasibility and as the restoration fallback.
class ElasticProblem : public NlpProblem {
 public:
  explicit ElasticProblem(const NlpProblem& base) : base_(base) {
    n_ = base.num_variables();
    m_ = base.num_constraints();
    pattern_ = base.jacobian_pattern();
    for (int r = 0; r < m_; ++r) {
      pattern_.emplace_back(r, n_ + 2 * r);
      pattern_.emplace_back(r, n_ + 2 * r + 1);
    }
  }

  int num_variables() const override { return n_ + 2 * m_; }
  int num_constraints() const override { return m_; }

  void variable_bounds(Eigen::VectorXd* lo, Eigen::VectorXd* hi) const override {
    Eigen::VectorXd blo, bhi;
    base_.variable_bounds(&blo, &bhi);
    lo->setConstant(num_variables(), 0.0);
    hi->setConstant(num_variables(), kInfinity);
    lo->head(n_) = blo;
    hi->head(n_) = bhi;
  }
  void constraint_bounds(Eigen::VectorXd* lo, Eigen::VectorXd* hi) const override {
    base_.constraint_bounds(lo, hi);
  }
  double objective(const Eigen::VectorXd& x) const override {
    return x.tail(2 * m_).sum();
  }
  void objective_gradient(const Eigen::VectorXd&, Eigen::VectorXd* grad) const override {
    grad->setZero(num_variables());
    grad->tail(2 * m_).setOnes();
  }
  void constraints(const Eigen::VectorXd& x, Eigen::VectorXd* c) const override {
    base_.constraints(x.head(n_), c);
    for (int r = 0; r < m_; ++r) (*c)[r] += x[n_ + 2 * r] - x[n_ + 2 * r + 1];
  }
  const std::vector<std::pair<int, int>>& jacobian_pattern() const override { return pattern_; }
  void jacobian_values(const Eigen::VectorXd& x, Eigen::VectorXd* values) const override {
    Eigen::VectorXd base_values;
    base_.jacobian_values(x.head(n_), &base_values);
    values->resize(static_cast<int>(pattern_.size()));
    values->head(base_values.size()) = base_values;
    for (int r = 0; r < m_; ++r) {
      (*values)[base_values.size() + 2 * r] = 1.0;
      (*values)[base_values.size() + 2 * r + 1] = -1.0;
    }
  }
  std::vector<std::pair<int, int>> hessian_groups() const override {
    auto groups = base_.hessian_groups();
    groups.emplace_back(n_, n_ + 2 * m_);  // linear block, stays near identity
    return groups;
  }

 private:
  const NlpProblem& base_;
  int n_, m_;
  std::vector<std::pair<int, int>> pattern_;
};

class IpmSolver {
 public:
  IpmSolver(const NlpProblem& problem, const SolverOptions& options, bool allow_elastic)
      : prob_(problem), opt_(options), allow_elastic_(allow_elastic) {}

  SolveReport run(const Eigen::VectorXd& guess);

 private:
  void setup();
  void relax_bounds();
  void initialize_iterate(const Eigen::VectorXd& guess);
  void eval_problem();
  double barrier_value(const Eigen::VectorXd& w) const;
  double merit(const Eigen::VectorXd& w, double f, const Eigen::VectorXd& chat) const;
  Eigen::VectorXd constraint_residual(const Eigen::VectorXd& cvals, const Eigen::VectorXd& w) const;
  double optimality_error(double mu) const;
  bool assemble_and_solve(Eigen::VectorXd* dw, Eigen::VectorXd* dy);
  void update_bfgs(const Eigen::VectorXd& x_old, const Eigen::VectorXd& grad_old,
                   const Eigen::VectorXd& jtv_old);
  SolveReport finish(SolveStatus status, double error);
  SolveReport run_elastic();

  const NlpProblem& prob_;
  SolverOptions opt_;
  bool allow_elastic_;

  int n_ = 0;       // original variables
  int m_ = 0;       // constraint rows
  int p_ = 0;       // slack count (inequality rows)
  int nw_ = 0;      // n_ + p_
  std::vector<int> slack_of_row_;  // -1 for equality rows
  Eigen::VectorXd row_target_;     // equality targets (lo==hi midpoint)

  Bounds wb_;  // bounds on w = (x, s), relaxed
  Eigen::VectorXd xlo_orig_, xhi_orig_;  // unrelaxed variable bounds

  std::vector<std::pair<int, int>> groups_;
  std::vector<Eigen::MatrixXd> bfgs_;

  // Current iterate and problem evaluations.
  Eigen::VectorXd w_, y_, zl_, zu_;
  double f_ = 0;
  Eigen::VectorXd grad_, cvals_, chat_, jac_vals_;
  double mu_ = 0.1, nu_ = 10.0;
  int iter_ = 0;

  Eigen::SparseMatrix<double> kkt_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower> ldlt_;
  bool pattern_analyzed_ = false;
  double delta_w_last_ = 0.0;

  std::vector<IterationRecord> history_;
};

void IpmSolver::setup() {
  n_ = prob_.num_variables();
  m_ = prob_.num_constraints();
  Eigen::VectorXd clo, chi;
  prob_.constraint_bounds(&clo, &chi);
  slack_of_row_.assign(static_cast<std::size_t>(m_), -1);
  row_target_.setZero(m_);
  p_ = 0;
  for (int r = 0; r < m_; ++r) {
    if (chi[r] - clo[r] <= 1e-12) {
      row_target_[r] = 0.5 * (clo[r] + chi[r]);
    } else {
      slack_of_row_[static_cast<std::size_t>(r)] = p_++;
    }
  }
  nw_ = n_ + p_;

  Eigen::VectorXd xlo, xhi;
  prob_.variable_bounds(&xlo, &xhi);
  xlo_orig_ = xlo;
  xhi_orig_ = xhi;
  wb_.lo.setConstant(nw_, -kInfinity);
  wb_.hi.setConstant(nw_, kInfinity);
  wb_.lo.head(n_) = xlo;
  wb_.hi.head(n_) = xhi;
  for (int r = 0; r < m_; ++r) {
    const int q = slack_of_row_[static_cast<std::size_t>(r)];
    if (q >= 0) {
      wb_.lo[n_ + q] = clo[r];
      wb_.hi[n_ + q] = chi[r];
    }
  }
  relax_bounds();
  for (int i = 0; i < nw_; ++i) {
    if (wb_.lo[i] > -kInfinity) wb_.lower_set.push_back(i);
    if (wb_.hi[i] < kInfinity) wb_.upper_set.push_back(i);
  }

  groups_ = prob_.hessian_groups();
  bfgs_.clear();
  for (const auto& g : groups_) {
    const int size = g.second - g.first;
    bfgs_.push_back(Eigen::MatrixXd::Identity(size, size));
  }
}

void IpmSolver::relax_bounds() {
  const double rho = opt_.bound_relaxation;
  if (rho <= 0) return;
  for (int i = 0; i < nw_; ++i) {
    if (wb_.lo[i] > -kInfinity) wb_.lo[i] -= rho * std::max(1.0, std::abs(wb_.lo[i]));
    if (wb_.hi[i] < kInfinity) wb_.hi[i] += rho * std::max(1.0, std::abs(wb_.hi[i]));
  }
}

void IpmSolver::initialize_iterate(const Eigen::VectorXd& guess) {
  w_.setZero(nw_);
  w_.head(n_) = guess;
  Eigen::VectorXd c0(m_);
  prob_.constraints(guess, &c0);
  for (int r = 0; r < m_; ++r) {
    const int q = slack_of_row_[static_cast<std::size_t>(r)];
    if (q >= 0) w_[n_ + q] = c0[r];
  }
  // Push strictly inside the relaxed box.
  for (int i = 0; i < nw_; ++i) {
    const double lo = wb_.lo[i], hi = wb_.hi[i];
    if (lo <= -kInfinity && hi >= kInfinity) continue;
    if (lo > -kInfinity && hi < kInfinity) {
      const double pad = std::min(1e-2 * std::max(1.0, std::abs(lo)), 0.5 * (hi - lo));
      w_[i] = std::clamp(w_[i], lo + pad, hi - pad);
    } else if (lo > -kInfinity) {
      w_[i] = std::max(w_[i], lo + 1e-2 * std::max(1.0, std::abs(lo)));
    } else {
      w_[i] = std::min(w_[i], hi - 1e-2 * std::max(1.0, std::abs(hi)));
    }
  }

  mu_ = opt_.warm_start ? std::min(opt_.barrier_init, 1e-4) : opt_.barrier_init;
  y_.setZero(m_);
  zl_.setZero(nw_);
  zu_.setZero(nw_);
  for (int i : wb_.lower_set) zl_[i] = std::clamp(mu_ / (w_[i] - wb_.lo[i]), 1e-8, 1e8);
  for (int i : wb_.upper_set) zu_[i] = std::clamp(mu_ / (wb_.hi[i] - w_[i]), 1e-8, 1e8);
  nu_ = 10.0;
}

void IpmSolver::eval_problem() {
  const Eigen::VectorXd x = w_.head(n_);
  f_ = prob_.objective(x);
  prob_.objective_gradient(x, &grad_);
  prob_.constraints(x, &cvals_);
  prob_.jacobian_values(x, &jac_vals_);
  chat_ = constraint_residual(cvals_, w_);
}

Eigen::VectorXd IpmSolver::constraint_residual(const Eigen::VectorXd& cvals,
                                               const Eigen::VectorXd& w) const {
  Eigen::VectorXd chat(m_);
  for (int r = 0; r < m_; ++r) {
    const int q = slack_of_row_[static_cast<std::size_t>(r)];
    chat[r] = q >= 0 ? cvals[r] - w[n_ + q] : cvals[r] - row_target_[r];
  }
  return chat;
}

double IpmSolver::barrier_value(const Eigen::VectorXd& w) const {
  double b = 0.0;
  for (int i : wb_.lower_set) {
    const double gap = w[i] - wb_.lo[i];
    if (gap <= 0) return std::numeric_limits<double>::infinity();
    b -= std::log(gap);
  }
  for (int i : wb_.upper_set) {
    const double gap = wb_.hi[i] - w[i];
    if (gap <= 0) return std::numeric_limits<double>::infinity();
    b -= std::log(gap);
  }
  return mu_ * b;
}

double IpmSolver::merit(const Eigen::VectorXd& w, double f, const Eigen::VectorXd& chat) const {
  return f + barrier_value(w) + nu_ * chat.lpNorm<1>();
}

double IpmSolver::optimality_error(double mu) const {
  // Dual residual over w, complementarity over active bounds, primal.
  Eigen::VectorXd dual(nw_);
  dual.setZero();
  dual.head(n_) = grad_;
  const auto& pattern = prob_.jacobian_pattern();
  for (std::size_t k = 0; k < pattern.size(); ++k)
    dual[pattern[k].second] += jac_vals_[static_cast<int>(k)] * y_[pattern[k].first];
  for (int r = 0; r < m_; ++r) {
    const int q = slack_of_row_[static_cast<std::size_t>(r)];
    if (q >= 0) dual[n_ + q] -= y_[r];
  }
  dual -= zl_;
  dual += zu_;

  double comp = 0.0;
  for (int i : wb_.lower_set) comp = std::max(comp, std::abs((w_[i] - wb_.lo[i]) * zl_[i] - mu));
  for (int i : wb_.upper_set) comp = std::max(comp, std::abs((wb_.hi[i] - w_[i]) * zu_[i] - mu));

  const double z_norm = zl_.lpNorm<1>() + zu_.lpNorm<1>();
  const double y_norm = y_.lpNorm<1>();
  const int denom = m_ + static_cast<int>(wb_.lower_set.size() + wb_.upper_set.size());
  const double s_max = 100.0;
  const double s_d = std::max(s_max, (y_norm + z_norm) / std::max(1, denom)) / s_max;
  const double s_c =
      std::max(s_max, z_norm / std::max<std::size_t>(1, wb_.lower_set.size() + wb_.upper_set.size())) /
      s_max;

  const double primal = m_ > 0 ? chat_.lpNorm<Eigen::Infinity>() : 0.0;
  const double dual_inf = nw_ > 0 ? dual.lpNorm<Eigen::Infinity>() : 0.0;
  return std::max({dual_inf / s_d, primal, comp / s_c});
}

bool IpmSolver::assemble_and_solve(Eigen::VectorXd* dw, Eigen::VectorXd* dy) {
  const int dim = nw_ + m_;
  const double delta_c = 1e-8;

  Eigen::VectorXd sigma(nw_);
  sigma.setZero();
  for (int i : wb_.lower_set) sigma[i] += zl_[i] / (w_[i] - wb_.lo[i]);
  for (int i : wb_.upper_set) sigma[i] += zu_[i] / (wb_.hi[i] - w_[i]);

  // Barrier-gradient right-hand side.
  Eigen::VectorXd phi_grad(nw_);
  phi_grad.setZero();
  phi_grad.head(n_) = grad_;
  for (int i : wb_.lower_set) phi_grad[i] -= mu_ / (w_[i] - wb_.lo[i]);
  for (int i : wb_.upper_set) phi_grad[i] += mu_ / (wb_.hi[i] - w_[i]);

  const auto& pattern = prob_.jacobian_pattern();
  Eigen::VectorXd rhs(dim);
  rhs.setZero();
  rhs.head(nw_) = -phi_grad;
  {
    // - J^T y term enters through the KKT residual form.
    Eigen::VectorXd jty(nw_);
    jty.setZero();
    for (std::size_t k = 0; k < pattern.size(); ++k)
      jty[pattern[k].second] += jac_vals_[static_cast<int>(k)] * y_[pattern[k].first];
    for (int r = 0; r < m_; ++r) {
      const int q = slack_of_row_[static_cast<std::size_t>(r)];
      if (q >= 0) jty[n_ + q] -= y_[r];
    }
    rhs.head(nw_) -= jty;
  }
  rhs.tail(m_) = -chat_;

  double delta_w = 0.0;
  for (int attempt = 0; attempt < 30; ++attempt) {
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(pattern.size() + static_cast<std::size_t>(nw_ + m_) + 4096);
    for (std::size_t g = 0; g < groups_.size(); ++g) {
      const auto [begin, end] = groups_[g];
      const auto& B = bfgs_[g];
      for (int a = begin; a < end; ++a)
        for (int b = begin; b <= a; ++b) trips.emplace_back(a, b, B(a - begin, b - begin));
    }
    for (int i = 0; i < nw_; ++i) trips.emplace_back(i, i, sigma[i] + delta_w);
    for (std::size_t k = 0; k < pattern.size(); ++k)
      trips.emplace_back(nw_ + pattern[k].first, pattern[k].second, jac_vals_[static_cast<int>(k)]);
    for (int r = 0; r < m_; ++r) {
      const int q = slack_of_row_[static_cast<std::size_t>(r)];
      if (q >= 0) trips.emplace_back(nw_ + r, n_ + q, -1.0);
      trips.emplace_back(nw_ + r, nw_ + r, -delta_c);
    }

    kkt_.resize(dim, dim);
    kkt_.setFromTriplets(trips.begin(), trips.end());
    // Only the lower triangle is assembled; the factorization reads it
    // as self-adjoint.
    if (!pattern_analyzed_) {
      ldlt_.analyzePattern(kkt_);
      pattern_analyzed_ = true;
    }
    ldlt_.factorize(kkt_);
    bool ok = ldlt_.info() == Eigen::Success;
    if (ok) {
      // Inertia must be (nw, m): count negative pivots.
      const auto& D = ldlt_.vectorD();
      int negatives = 0, zeros = 0;
      for (int i = 0; i < D.size(); ++i) {
        if (!std::isfinite(D[i]) || std::abs(D[i]) < 1e-300) ++zeros;
        else if (D[i] < 0) ++negatives;
      }
      ok = zeros == 0 && negatives == m_;
    }
    if (ok) {
      const Eigen::VectorXd sol = ldlt_.solve(rhs);
      if (sol.allFinite()) {
        *dw = sol.head(nw_);
        *dy = sol.tail(m_);
        delta_w_last_ = delta_w;
        return true;
      }
    }
    delta_w = delta_w == 0.0 ? std::max(1e-8, 0.3 * delta_w_last_) : delta_w * 8.0;
    if (delta_w > 1e16) break;
  }
  return false;
}

void IpmSolver::update_bfgs(const Eigen::VectorXd& x_old, const Eigen::VectorXd& grad_old,
                            const Eigen::VectorXd& jtv_old) {
  // Lagrangian x-gradient difference with multipliers fixed at y_new.
  Eigen::VectorXd jty_new(n_);
  jty_new.setZero();
  const auto& pattern = prob_.jacobian_pattern();
  for (std::size_t k = 0; k < pattern.size(); ++k)
    jty_new[pattern[k].second] += jac_vals_[static_cast<int>(k)] * y_[pattern[k].first];

  const Eigen::VectorXd x_new = w_.head(n_);
  for (std::size_t g = 0; g < groups_.size(); ++g) {
    const auto [begin, end] = groups_[g];
    if (begin >= n_) continue;  // pure slack/elastic block stays identity
    const int size = end - begin;
    Eigen::VectorXd s = x_new.segment(begin, size) - x_old.segment(begin, size);
    Eigen::VectorXd q = (grad_.segment(begin, size) + jty_new.segment(begin, size)) -
                        (grad_old.segment(begin, size) + jtv_old.segment(begin, size));
    const double s_norm = s.norm();
    if (s_norm < 1e-14) continue;
    auto& B = bfgs_[g];
    const Eigen::VectorXd Bs = B * s;
    const double sBs = s.dot(Bs);
    if (sBs <= 1e-16) {
      B.setIdentity();
      continue;
    }
    double sq = s.dot(q);
    if (sq < 0.2 * sBs) {
      const double theta = 0.8 * sBs / (sBs - sq);
      q = theta * q + (1.0 - theta) * Bs;
      sq = s.dot(q);
    }
    B += q * q.transpose() / sq - Bs * Bs.transpose() / sBs;
    const double diag_max = B.diagonal().maxCoeff();
    if (!B.allFinite() || diag_max > 1e10) B.setIdentity();
  }
}

SolveReport IpmSolver::finish(SolveStatus status, double error) {
  SolveReport report;
  report.status = status;
  report.kkt_residual = error;
  report.iterations = iter_;
  // Honor the unrelaxed variable bounds in the reported point.
  Eigen::VectorXd x = w_.head(n_);
  for (int i = 0; i < n_; ++i) x[i] = std::clamp(x[i], xlo_orig_[i], xhi_orig_[i]);
  report.objective = prob_.objective(x);
  report.solution = x;
  report.constraint_multipliers = y_;
  report.bound_multipliers_lower = zl_.head(n_);
  report.bound_multipliers_upper = zu_.head(n_);
  report.constraint_violation = m_ > 0 ? chat_.lpNorm<Eigen::Infinity>() : 0.0;
  report.history = std::move(history_);
  return report;
}

SolveReport IpmSolver::run_elastic() {
  ElasticProblem elastic(prob_);
  SolverOptions opts = opt_;
  opts.warm_start = false;
  opts.barrier_init = 1.0;
  opts.max_iterations = std::max(200, opt_.max_iterations / 2);
  Eigen::VectorXd guess(elastic.num_variables());
  guess.setZero();
  guess.head(n_) = w_.head(n_);
  for (int r = 0; r < m_; ++r) {
    const double v = chat_[r];
    guess[n_ + 2 * r] = std::max(0.0, -v) + 0.1;
    guess[n_ + 2 * r + 1] = std::max(0.0, v) + 0.1;
  }
  IpmSolver inner(elastic, opts, /*allow_elastic=*/false);
  SolveReport elastic_report = inner.run(guess);

  const double residual = elastic_report.objective;
  SolveReport report = finish(SolveStatus::Diverged, optimality_error(0.0));
  if (elastic_report.status == SolveStatus::Optimal && residual > 1e-6 * std::max(1.0, double(m_))) {
    report.status = SolveStatus::Infeasible;
  }
  return report;
}

SolveReport IpmSolver::run(const Eigen::VectorXd& guess) {
  setup();
  if (guess.size() != n_) fail("DimensionMismatch", "initial guess length mismatch");
  initialize_iterate(guess);
  eval_problem();

  const double mu_min = opt_.kkt_tolerance / 11.0;
  int stall_count = 0;
  double best_error = std::numeric_limits<double>::infinity();

  for (iter_ = 0; iter_ < opt_.max_iterations; ++iter_) {
    const double e0 = optimality_error(0.0);
    if (e0 <= opt_.kkt_tolerance) return finish(SolveStatus::Optimal, e0);

    // Monotone barrier schedule.
    while (optimality_error(mu_) <= 10.0 * mu_ && mu_ > mu_min) {
      mu_ = std::max(mu_min, std::min(0.2 * mu_, std::pow(mu_, 1.5)));
      stall_count = 0;
    }

    Eigen::VectorXd dw, dy;
    if (!assemble_and_solve(&dw, &dy)) {
      if (allow_elastic_ && chat_.size() > 0 && chat_.lpNorm<Eigen::Infinity>() > opt_.kkt_tolerance)
        return run_elastic();
      return finish(SolveStatus::Diverged, e0);
    }

    // Fraction-to-boundary limits.
    double alpha_max = 1.0;
    for (int i : wb_.lower_set)
      if (dw[i] < 0) alpha_max = std::min(alpha_max, -kTauFtb * (w_[i] - wb_.lo[i]) / dw[i]);
    for (int i : wb_.upper_set)
      if (dw[i] > 0) alpha_max = std::min(alpha_max, kTauFtb * (wb_.hi[i] - w_[i]) / dw[i]);

    Eigen::VectorXd dzl = Eigen::VectorXd::Zero(nw_), dzu = Eigen::VectorXd::Zero(nw_);
    for (int i : wb_.lower_set) {
      const double gap = w_[i] - wb_.lo[i];
      dzl[i] = (mu_ - zl_[i] * dw[i]) / gap - zl_[i];
    }
    for (int i : wb_.upper_set) {
      const double gap = wb_.hi[i] - w_[i];
      dzu[i] = (mu_ + zu_[i] * dw[i]) / gap - zu_[i];
    }
    double alpha_dual = 1.0;
    for (int i : wb_.lower_set)
      if (dzl[i] < 0) alpha_dual = std::min(alpha_dual, -kTauFtb * zl_[i] / dzl[i]);
    for (int i : wb_.upper_set)
      if (dzu[i] < 0) alpha_dual = std::min(alpha_dual, -kTauFtb * zu_[i] / dzu[i]);

    // Penalty parameter keeps the step a descent direction for the merit.
    const double theta = chat_.size() > 0 ? chat_.lpNorm<1>() : 0.0;
    const double y_trial = (y_ + dy).lpNorm<Eigen::Infinity>();
    nu_ = std::max(nu_, 1.1 * y_trial + 0.1);

    Eigen::VectorXd phi_grad(nw_);
    phi_grad.setZero();
    phi_grad.head(n_) = grad_;
    for (int i : wb_.lower_set) phi_grad[i] -= mu_ / (w_[i] - wb_.lo[i]);
    for (int i : wb_.upper_set) phi_grad[i] += mu_ / (wb_.hi[i] - w_[i]);
    double directional = phi_grad.dot(dw) - nu_ * theta;

    const double merit_0 = merit(w_, f_, chat_);
    double alpha = alpha_max;
    bool accepted = false;
    Eigen::VectorXd w_trial;
    double f_trial = 0;
    Eigen::VectorXd c_trial, chat_trial;
    for (int ls = 0; ls < 60; ++ls) {
      w_trial = w_ + alpha * dw;
      f_trial = prob_.objective(w_trial.head(n_));
      prob_.constraints(w_trial.head(n_), &c_trial);
      chat_trial = constraint_residual(c_trial, w_trial);
      const double merit_trial = merit(w_trial, f_trial, chat_trial);
      if (std::isfinite(merit_trial) &&
          merit_trial <= merit_0 + kArmijo * alpha * std::min(directional, 0.0)) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
      if (alpha < 1e-14) break;
    }

    if (!accepted) {
      if (allow_elastic_ && theta > 1e-6) return run_elastic();
      return finish(SolveStatus::Diverged, e0);
    }

    const Eigen::VectorXd x_old = w_.head(n_);
    const Eigen::VectorXd grad_old = grad_;
    Eigen::VectorXd jty_old(n_);
    jty_old.setZero();
    {
      const auto& pattern = prob_.jacobian_pattern();
      const Eigen::VectorXd y_new = y_ + alpha * dy;
      for (std::size_t k = 0; k < pattern.size(); ++k)
        jty_old[pattern[k].second] += jac_vals_[static_cast<int>(k)] * y_new[pattern[k].first];
    }

    w_ = w_trial;
    y_ += alpha * dy;
    zl_ += alpha_dual * dzl;
    zu_ += alpha_dual * dzu;
    // Safeguard bound multipliers against drifting off the central path.
    for (int i : wb_.lower_set) {
      const double gap = w_[i] - wb_.lo[i];
      zl_[i] = std::clamp(zl_[i], mu_ / (kKappaSigma * gap), kKappaSigma * mu_ / gap);
    }
    for (int i : wb_.upper_set) {
      const double gap = wb_.hi[i] - w_[i];
      zu_[i] = std::clamp(zu_[i], mu_ / (kKappaSigma * gap), kKappaSigma * mu_ / gap);
    }

    eval_problem();
    update_bfgs(x_old, grad_old, jty_old);

    const double err_now = optimality_error(0.0);
    if (err_now < 0.98 * best_error) {
      best_error = err_now;
      stall_count = 0;
    } else if (++stall_count > 60) {
      // Long stall: if the iterate is still substantially infeasible the
      // problem is likely inconsistent, hand over to the elastic phase.
      const double primal = m_ > 0 ? chat_.lpNorm<Eigen::Infinity>() : 0.0;
      if (allow_elastic_ && primal > 100.0 * opt_.kkt_tolerance) return run_elastic();
      // Otherwise push the barrier down or refresh the BFGS blocks.
      if (mu_ > mu_min) {
        mu_ = std::max(mu_min, 0.2 * mu_);
      } else {
        for (auto& B : bfgs_) B.setIdentity();
      }
      stall_count = 0;
    }

    history_.push_back({iter_, f_, m_ > 0 ? chat_.lpNorm<Eigen::Infinity>() : 0.0,
                        err_now, mu_, alpha});
    if (opt_.log) {
      (*opt_.log) << "iter " << iter_ << " obj " << format_double(f_) << " primal "
                  << format_double(history_.back().primal_inf) << " dual "
                  << format_double(err_now) << " mu " << format_double(mu_) << " alpha "
                  << format_double(alpha) << "\n";
    }
  }
  const double final_primal = m_ > 0 ? chat_.lpNorm<Eigen::Infinity>() : 0.0;
  if (allow_elastic_ && final_primal > 100.0 * opt_.kkt_tolerance) return run_elastic();
  return finish(SolveStatus::MaxIter, optimality_error(0.0));
}

}  // namespace

SolveReport solve(const NlpProblem& problem, const Eigen::VectorXd& initial_guess,
                  const SolverOptions& options) {
  IpmSolver solver(problem, options, /*allow_elastic=*/true);
  return solver.run(initial_guess);
}

double gradient_check(const NlpProblem& problem, const Eigen::VectorXd& point) {
  const int n = problem.num_variables();
  const int m = problem.num_constraints();

  Eigen::VectorXd grad;
  problem.objective_gradient(point, &grad);
  Eigen::VectorXd jac;
  problem.jacobian_values(point, &jac);
  const auto& pattern = problem.jacobian_pattern();

  Eigen::MatrixXd dense_jac = Eigen::MatrixXd::Zero(m, n);
  for (std::size_t k = 0; k < pattern.size(); ++k)
    dense_jac(pattern[k].first, pattern[k].second) += jac[static_cast<int>(k)];

  double worst = 0.0;
  Eigen::VectorXd xp = point, xm = point, cp(m), cm(m);
  for (int i = 0; i < n; ++i) {
    const double step = 1e-6 * std::max(1.0, std::abs(point[i]));
    xp[i] = point[i] + step;
    xm[i] = point[i] - step;
    const double fd_grad = (problem.objective(xp) - problem.objective(xm)) / (2 * step);
    worst = std::max(worst, std::abs(fd_grad - grad[i]) /
                                std::max({1.0, std::abs(fd_grad), std::abs(grad[i])}));
    if (m > 0) {
      problem.constraints(xp, &cp);
      problem.constraints(xm, &cm);
      for (int r = 0; r < m; ++r) {
        const double fd = (cp[r] - cm[r]) / (2 * step);
        worst = std::max(worst, std::abs(fd - dense_jac(r, i)) /
                                    std::max({1.0, std::abs(fd), std::abs(dense_jac(r, i))}));
      }
    }
    xp[i] = point[i];
    xm[i] = point[i];
  }
  return worst;
}

}  // namespace ps3
