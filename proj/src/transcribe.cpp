#include "transcribe.hpp"

#include <cmath>

#include "util.hpp"

namespace ps3 {

int OcpDefinition::intervals() const {
  return static_cast<int>(std::llround(horizon_s / control_interval_s));
}

void OcpDefinition::validate() const {
  if (state_dim <= 0) fail("DimensionMismatch", "state_dim must be positive");
  if (control_dim < 0) fail("DimensionMismatch", "control_dim must be nonnegative");
  if (!(control_interval_s > 0)) fail("DimensionMismatch", "control interval must be positive");
  const int n_intervals = intervals();
  if (n_intervals < 1 || std::abs(n_intervals * control_interval_s - horizon_s) > 1e-9)
    fail("DimensionMismatch", "horizon must be a positive integer multiple of the control interval");
  if (!dynamics) fail("DimensionMismatch", "dynamics callable missing");
  if (state_scale.size() != 0 && state_scale.size() != state_dim)
    fail("DimensionMismatch", "state_scale size mismatch");
  if (control_scale.size() != 0 && control_scale.size() != control_dim)
    fail("DimensionMismatch", "control_scale size mismatch");
  if (x0_lo.size() != state_dim || x0_hi.size() != state_dim)
    fail("DimensionMismatch", "initial state box must have state_dim entries");
  for (const auto& pc : path_constraints)
    if (pc.dim <= 0 || !pc.eval || !pc.bounds)
      fail("DimensionMismatch", "path constraint block " + pc.name + " malformed");
  for (const auto& tc : terminal_equalities)
    if (tc.state_index < 0 || tc.state_index >= state_dim)
      fail("DimensionMismatch", "terminal equality state index out of range");
}

TranscribedNlp::TranscribedNlp(OcpDefinition ocp, CollocationScheme scheme,
                               std::vector<std::string> state_names,
                               std::vector<std::string> control_names)
    : ocp_(std::move(ocp)), scheme_(std::move(scheme)), state_names_(std::move(state_names)),
      control_names_(std::move(control_names)) {
  ocp_.validate();
  n_ = ocp_.state_dim;
  m_ = ocp_.control_dim;
  d_ = scheme_.degree;
  intervals_ = ocp_.intervals();
  h_ = ocp_.control_interval_s;
  block_ = d_ * n_ + m_;
  num_vars_ = n_ + intervals_ * block_;
  if (ocp_.state_scale.size() == 0) ocp_.state_scale = Eigen::VectorXd::Ones(n_);
  if (ocp_.control_scale.size() == 0) ocp_.control_scale = Eigen::VectorXd::Ones(m_);
  if (n_ + m_ > ad::kMaxSeeds)
    fail("DimensionMismatch", "state_dim + control_dim exceeds the AD seed capacity");

  if (state_names_.empty())
    for (int s = 0; s < n_; ++s) state_names_.push_back("x" + std::to_string(s));
  if (control_names_.empty())
    for (int j = 0; j < m_; ++j) control_names_.push_back("u" + std::to_string(j));

  path_rows_per_point_ = 0;
  for (const auto& pc : ocp_.path_constraints) path_rows_per_point_ += pc.dim;
  num_cons_ = intervals_ * d_ * (n_ + path_rows_per_point_) +
              static_cast<int>(ocp_.terminal_equalities.size());

  // Barycentric weights over {0, tau_1..tau_d} for resampling.
  Eigen::VectorXd nodes(d_ + 1);
  nodes[0] = 0.0;
  for (int i = 0; i < d_; ++i) nodes[i + 1] = scheme_.points[i];
  bary_.resize(d_ + 1);
  for (int j = 0; j <= d_; ++j) {
    double prod = 1.0;
    for (int k = 0; k <= d_; ++k)
      if (k != j) prod *= nodes[j] - nodes[k];
    bary_[j] = 1.0 / prod;
  }

  build_pattern();
}

int TranscribedNlp::state_index(int interval, int point, int state) const {
  if (point == 0) return interval == 0 ? state : state_index(interval - 1, d_, state);
  return n_ + interval * block_ + (point - 1) * n_ + state;
}

int TranscribedNlp::control_index(int interval, int control) const {
  return n_ + interval * block_ + d_ * n_ + control;
}

int TranscribedNlp::sample_state_index(int second, int state) const {
  return second == 0 ? start_state_index(state) : state_index(second - 1, d_, state);
}

double TranscribedNlp::time_at(int interval, int point) const {
  return point == 0 ? interval * h_ : (interval + scheme_.points[point - 1]) * h_;
}

void TranscribedNlp::build_pattern() {
  pattern_.clear();
  int row = 0;
  for (int k = 0; k < intervals_; ++k) {
    for (int i = 1; i <= d_; ++i) {
      // Defect rows: D-coefficient columns for state s over all points,
      // then the remaining dynamics couplings at this point.
      for (int s = 0; s < n_; ++s) {
        for (int j = 0; j <= d_; ++j) pattern_.emplace_back(row, state_index(k, j, s));
        for (int s2 = 0; s2 < n_; ++s2)
          if (s2 != s) pattern_.emplace_back(row, state_index(k, i, s2));
        for (int j = 0; j < m_; ++j) pattern_.emplace_back(row, control_index(k, j));
        ++row;
      }
      for (const auto& pc : ocp_.path_constraints) {
        for (int r = 0; r < pc.dim; ++r) {
          for (int s = 0; s < n_; ++s) pattern_.emplace_back(row, state_index(k, i, s));
          for (int j = 0; j < m_; ++j) pattern_.emplace_back(row, control_index(k, j));
          ++row;
        }
      }
    }
  }
  for (const auto& tc : ocp_.terminal_equalities) {
    pattern_.emplace_back(row, state_index(intervals_ - 1, d_, tc.state_index));
    ++row;
  }
}

void TranscribedNlp::variable_bounds(Eigen::VectorXd* lo, Eigen::VectorXd* hi) const {
  lo->setConstant(num_vars_, -kInfinity);
  hi->setConstant(num_vars_, kInfinity);
  for (int s = 0; s < n_; ++s) {
    (*lo)[s] = ocp_.x0_lo[s] / ocp_.state_scale[s];
    (*hi)[s] = ocp_.x0_hi[s] / ocp_.state_scale[s];
  }
  std::vector<double> slo(n_), shi(n_), clo(m_), chi(m_);
  for (int k = 0; k < intervals_; ++k) {
    for (int i = 1; i <= d_; ++i) {
      if (ocp_.state_bounds) {
        ocp_.state_bounds(time_at(k, i), slo.data(), shi.data());
        for (int s = 0; s < n_; ++s) {
          const int idx = state_index(k, i, s);
          (*lo)[idx] = slo[static_cast<std::size_t>(s)] / ocp_.state_scale[s];
          (*hi)[idx] = shi[static_cast<std::size_t>(s)] / ocp_.state_scale[s];
          if ((*lo)[idx] > (*hi)[idx])
            fail("DimensionMismatch", "inverted state box at t=" + format_double(time_at(k, i)));
        }
      }
    }
    if (ocp_.control_bounds && m_ > 0) {
      ocp_.control_bounds(k, clo.data(), chi.data());
      for (int j = 0; j < m_; ++j) {
        const int idx = control_index(k, j);
        (*lo)[idx] = clo[static_cast<std::size_t>(j)] / ocp_.control_scale[j];
        (*hi)[idx] = chi[static_cast<std::size_t>(j)] / ocp_.control_scale[j];
        if ((*lo)[idx] > (*hi)[idx])
          fail("DimensionMismatch", "inverted control box in interval " + std::to_string(k));
      }
    }
  }
}

void TranscribedNlp::constraint_bounds(Eigen::VectorXd* lo, Eigen::VectorXd* hi) const {
  lo->setConstant(num_cons_, 0.0);
  hi->setConstant(num_cons_, 0.0);
  int row = 0;
  std::vector<double> blo, bhi;
  for (int k = 0; k < intervals_; ++k) {
    for (int i = 1; i <= d_; ++i) {
      row += n_;  // defects are equalities at zero
      const double t = time_at(k, i);
      for (const auto& pc : ocp_.path_constraints) {
        blo.assign(static_cast<std::size_t>(pc.dim), -kInfinity);
        bhi.assign(static_cast<std::size_t>(pc.dim), kInfinity);
        pc.bounds(t, blo.data(), bhi.data());
        for (int r = 0; r < pc.dim; ++r) {
          const double scale =
              pc.row_scales.empty() ? 1.0 : pc.row_scales[static_cast<std::size_t>(r)];
          (*lo)[row] = blo[static_cast<std::size_t>(r)] <= -kInfinity
                           ? -kInfinity
                           : blo[static_cast<std::size_t>(r)] * scale;
          (*hi)[row] = bhi[static_cast<std::size_t>(r)] >= kInfinity
                           ? kInfinity
                           : bhi[static_cast<std::size_t>(r)] * scale;
          ++row;
        }
      }
    }
  }
  for (const auto& tc : ocp_.terminal_equalities) {
    (*lo)[row] = tc.value / ocp_.state_scale[tc.state_index];
    (*hi)[row] = (*lo)[row];
    ++row;
  }
}

void TranscribedNlp::eval_point_duals(const Eigen::VectorXd& z, int interval, int point,
                                      bool with_grad, std::vector<ad::Dual>* x,
                                      std::vector<ad::Dual>* u) const {
  const int width = n_ + m_;
  x->resize(static_cast<std::size_t>(n_));
  u->resize(static_cast<std::size_t>(m_));
  for (int s = 0; s < n_; ++s) {
    const double natural = z[state_index(interval, point, s)] * ocp_.state_scale[s];
    (*x)[static_cast<std::size_t>(s)] =
        with_grad ? ad::Dual::seeded(natural, width, s) : ad::Dual(natural);
  }
  for (int j = 0; j < m_; ++j) {
    const double natural = z[control_index(interval, j)] * ocp_.control_scale[j];
    (*u)[static_cast<std::size_t>(j)] =
        with_grad ? ad::Dual::seeded(natural, width, n_ + j) : ad::Dual(natural);
  }
}

double TranscribedNlp::objective(const Eigen::VectorXd& z) const {
  if (!ocp_.running_cost) return 0.0;
  double total = 0.0;
  std::vector<ad::Dual> x, u;
  for (int k = 0; k < intervals_; ++k) {
    for (int i = 1; i <= d_; ++i) {
      eval_point_duals(z, k, i, false, &x, &u);
      total += scheme_.weights[i - 1] *
               ad::value(ocp_.running_cost(time_at(k, i), x.data(), u.data()));
    }
  }
  return total * h_;
}

void TranscribedNlp::objective_gradient(const Eigen::VectorXd& z, Eigen::VectorXd* grad) const {
  grad->setZero(num_vars_);
  if (!ocp_.running_cost) return;
  std::vector<ad::Dual> x, u;
  for (int k = 0; k < intervals_; ++k) {
    for (int i = 1; i <= d_; ++i) {
      eval_point_duals(z, k, i, true, &x, &u);
      const ad::Dual cost = ocp_.running_cost(time_at(k, i), x.data(), u.data());
      if (cost.is_const()) continue;
      const double w = scheme_.weights[i - 1] * h_;
      for (int s = 0; s < n_; ++s)
        (*grad)[state_index(k, i, s)] += w * cost.g[s] * ocp_.state_scale[s];
      for (int j = 0; j < m_; ++j)
        (*grad)[control_index(k, j)] += w * cost.g[n_ + j] * ocp_.control_scale[j];
    }
  }
}

void TranscribedNlp::constraints(const Eigen::VectorXd& z, Eigen::VectorXd* c) const {
  c->resize(num_cons_);
  int row = 0;
  std::vector<ad::Dual> x, u, xdot(static_cast<std::size_t>(n_)),
      g(static_cast<std::size_t>(path_rows_per_point_));
  for (int k = 0; k < intervals_; ++k) {
    for (int i = 1; i <= d_; ++i) {
      eval_point_duals(z, k, i, false, &x, &u);
      const double t = time_at(k, i);
      ocp_.dynamics(t, x.data(), u.data(), xdot.data());
      for (int s = 0; s < n_; ++s) {
        double defect = 0.0;
        for (int j = 0; j <= d_; ++j)
          defect += scheme_.diff(i - 1, j) * z[state_index(k, j, s)];
        defect /= h_;
        defect -= ad::value(xdot[static_cast<std::size_t>(s)]) / ocp_.state_scale[s];
        (*c)[row++] = defect;
      }
      for (const auto& pc : ocp_.path_constraints) {
        pc.eval(t, x.data(), u.data(), g.data());
        for (int r = 0; r < pc.dim; ++r) {
          const double scale =
              pc.row_scales.empty() ? 1.0 : pc.row_scales[static_cast<std::size_t>(r)];
          (*c)[row++] = ad::value(g[static_cast<std::size_t>(r)]) * scale;
        }
      }
    }
  }
  for (const auto& tc : ocp_.terminal_equalities)
    (*c)[row++] = z[state_index(intervals_ - 1, d_, tc.state_index)];
}

void TranscribedNlp::jacobian_values(const Eigen::VectorXd& z, Eigen::VectorXd* values) const {
  values->resize(static_cast<int>(pattern_.size()));
  int slot = 0;
  std::vector<ad::Dual> x, u, xdot(static_cast<std::size_t>(n_)),
      g(static_cast<std::size_t>(path_rows_per_point_));
  for (int k = 0; k < intervals_; ++k) {
    for (int i = 1; i <= d_; ++i) {
      eval_point_duals(z, k, i, true, &x, &u);
      const double t = time_at(k, i);
      ocp_.dynamics(t, x.data(), u.data(), xdot.data());
      for (int s = 0; s < n_; ++s) {
        const auto& fs = xdot[static_cast<std::size_t>(s)];
        const int d_slot_base = slot;
        for (int j = 0; j <= d_; ++j) (*values)[slot++] = scheme_.diff(i - 1, j) / h_;
        const double inv_scale = 1.0 / ocp_.state_scale[s];
        if (!fs.is_const()) {
          (*values)[d_slot_base + i] -= fs.g[s] * ocp_.state_scale[s] * inv_scale;
          for (int s2 = 0; s2 < n_; ++s2)
            if (s2 != s) (*values)[slot++] = -fs.g[s2] * ocp_.state_scale[s2] * inv_scale;
          for (int j = 0; j < m_; ++j)
            (*values)[slot++] = -fs.g[n_ + j] * ocp_.control_scale[j] * inv_scale;
        } else {
          for (int s2 = 0; s2 < n_ - 1; ++s2) (*values)[slot++] = 0.0;
          for (int j = 0; j < m_; ++j) (*values)[slot++] = 0.0;
        }
      }
      for (const auto& pc : ocp_.path_constraints) {
        pc.eval(t, x.data(), u.data(), g.data());
        for (int r = 0; r < pc.dim; ++r) {
          const auto& gr = g[static_cast<std::size_t>(r)];
          const double scale =
              pc.row_scales.empty() ? 1.0 : pc.row_scales[static_cast<std::size_t>(r)];
          if (!gr.is_const()) {
            for (int s = 0; s < n_; ++s)
              (*values)[slot++] = gr.g[s] * ocp_.state_scale[s] * scale;
            for (int j = 0; j < m_; ++j)
              (*values)[slot++] = gr.g[n_ + j] * ocp_.control_scale[j] * scale;
          } else {
            for (int idx = 0; idx < n_ + m_; ++idx) (*values)[slot++] = 0.0;
          }
        }
      }
    }
  }
  for (std::size_t b = 0; b < ocp_.terminal_equalities.size(); ++b) (*values)[slot++] = 1.0;
}

std::vector<std::pair<int, int>> TranscribedNlp::hessian_groups() const {
  std::vector<std::pair<int, int>> groups;
  groups.reserve(static_cast<std::size_t>(intervals_) + 1);
  groups.emplace_back(0, n_);
  for (int k = 0; k < intervals_; ++k) {
    const int base = n_ + k * block_;
    groups.emplace_back(base, base + block_);
  }
  return groups;
}

Eigen::VectorXd TranscribedNlp::pack(const std::function<double(double t, int s)>& state_fn,
                                     const std::function<double(int k, int j)>& control_fn) const {
  Eigen::VectorXd z(num_vars_);
  for (int s = 0; s < n_; ++s) z[s] = state_fn(0.0, s) / ocp_.state_scale[s];
  for (int k = 0; k < intervals_; ++k) {
    for (int i = 1; i <= d_; ++i)
      for (int s = 0; s < n_; ++s)
        z[state_index(k, i, s)] = state_fn(time_at(k, i), s) / ocp_.state_scale[s];
    for (int j = 0; j < m_; ++j)
      z[control_index(k, j)] = control_fn(k, j) / ocp_.control_scale[j];
  }
  return z;
}

Trajectory TranscribedNlp::extract(const Eigen::VectorXd& z) const {
  if (z.size() != num_vars_)
    fail("LengthMismatch", "solution vector has " + std::to_string(z.size()) + " entries, expected " +
                               std::to_string(num_vars_));
  std::vector<double> times;
  times.push_back(0.0);
  for (int k = 0; k < intervals_; ++k)
    for (int i = 1; i <= d_; ++i) times.push_back(time_at(k, i));
  Trajectory traj(times);
  for (int s = 0; s < n_; ++s) {
    auto& col = traj.column(state_names_[static_cast<std::size_t>(s)]);
    std::size_t idx = 0;
    col[idx++] = z[start_state_index(s)] * ocp_.state_scale[s];
    for (int k = 0; k < intervals_; ++k)
      for (int i = 1; i <= d_; ++i) col[idx++] = z[state_index(k, i, s)] * ocp_.state_scale[s];
  }
  for (int j = 0; j < m_; ++j) {
    auto& col = traj.column(control_names_[static_cast<std::size_t>(j)]);
    std::size_t idx = 0;
    col[idx++] = z[control_index(0, j)] * ocp_.control_scale[j];
    for (int k = 0; k < intervals_; ++k)
      for (int i = 1; i <= d_; ++i) col[idx++] = z[control_index(k, j)] * ocp_.control_scale[j];
  }
  return traj;
}

Eigen::VectorXd TranscribedNlp::resample_states(const Eigen::VectorXd& z, double t) const {
  const double clamped = std::min(std::max(t / h_, 0.0), static_cast<double>(intervals_));
  int k = std::min(static_cast<int>(clamped), intervals_ - 1);
  const double tau = clamped - k;

  Eigen::VectorXd out(n_);
  // Exact hit on a node avoids the barycentric singularity.
  for (int s = 0; s < n_; ++s) {
    double num = 0.0, den = 0.0;
    bool exact = false;
    for (int j = 0; j <= d_; ++j) {
      const double node = j == 0 ? 0.0 : scheme_.points[j - 1];
      const double diff = tau - node;
      if (std::abs(diff) < 1e-13) {
        out[s] = z[state_index(k, j, s)] * ocp_.state_scale[s];
        exact = true;
        break;
      }
      const double w = bary_[j] / diff;
      num += w * z[state_index(k, j, s)] * ocp_.state_scale[s];
      den += w;
    }
    if (!exact) out[s] = num / den;
  }
  return out;
}

Trajectory extract_trajectory(const Eigen::VectorXd& solution, const TranscribedNlp& problem) {
  return problem.extract(solution);
}

}  // namespace ps3
