#include "step2.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <json.hpp>
#include <random>

#include "model.hpp"
#include "util.hpp"

namespace ps3 {

namespace {

struct Move {
  int gear = 0;
  int engine = 0;
  double cost = 0;
};

/// Legal (gear, engine) choices at a step given the held values and
/// saturation of the dwell counters. Order: cost ascending, then lower
/// gear, then engine off, so first-found incumbents are deterministic.
int legal_moves(const Step2Problem& p, int k, int gear_prev, int engine_prev, bool gear_free,
                bool engine_free, std::array<Move, 12>* out) {
  int count = 0;
  for (int e = 0; e <= 1; ++e) {
    if (e != engine_prev && !engine_free) continue;
    for (int j = 1; j <= 6; ++j) {
      if (j != gear_prev && !gear_free) continue;
      if (!p.feasible(k, j, e)) continue;
      (*out)[static_cast<std::size_t>(count++)] = {j, e, p.stage_cost(k, j, e)};
    }
  }
  std::sort(out->begin(), out->begin() + count, [](const Move& a, const Move& b) {
    if (a.cost != b.cost) return a.cost < b.cost;
    if (a.gear != b.gear) return a.gear < b.gear;
    return a.engine < b.engine;
  });
  return count;
}
}  // namespace

void Step2Problem::validate() const {
  if (horizon < 1) fail("Step2Error", "horizon must be >= 1");
  if (relaxed_gear.rows() != horizon || relaxed_gear.cols() != 6)
    fail("Step2Error", "relaxed_gear must be N x 6");
  if (relaxed_engine.size() != horizon) fail("Step2Error", "relaxed_engine must have N entries");
  if (feas_off.rows() != horizon || feas_on.rows() != horizon || feas_off.cols() != 6 ||
      feas_on.cols() != 6)
    fail("Step2Error", "feasibility matrices must be N x 6");
  for (int k = 0; k < horizon; ++k) {
    if (std::abs(relaxed_gear.row(k).sum() - 1.0) > 1e-6)
      fail("Step2Error", "relaxed gear row " + std::to_string(k) + " does not sum to 1");
    if (relaxed_engine[k] < -1e-9 || relaxed_engine[k] > 1 + 1e-9)
      fail("Step2Error", "relaxed engine outside [0,1] at step " + std::to_string(k));
    bool any_on = false;
    for (int j = 0; j < 6; ++j) {
      if (feas_off(k, j) != 0 && feas_on(k, j) == 0)
        fail("Step2Error", "engine-on feasibility must contain engine-off (step " +
                               std::to_string(k) + ")");
      any_on = any_on || feas_on(k, j) != 0;
    }
    if (!any_on) fail("Step2Error", "no feasible gear at step " + std::to_string(k));
  }
  if (initial_gear < 1 || initial_gear > 6) fail("Step2Error", "initial gear outside 1..6");
  if (initial_engine != 0 && initial_engine != 1) fail("Step2Error", "initial engine not binary");
  if (dwell_gear < 0 || dwell_engine < 0) fail("Step2Error", "negative dwell time");
}

double Step2Problem::stage_cost(int k, int gear, int engine) const {
  const double de = engine - relaxed_engine[k];
  double sum = de * de;
  for (int j = 0; j < 6; ++j) {
    const double b = (j + 1 == gear) ? 1.0 : 0.0;
    const double d = b - relaxed_gear(k, j);
    sum += d * d;
  }
  return sum;
}

bool Step2Problem::feasible(int k, int gear, int engine) const {
  return (engine ? feas_on(k, gear - 1) : feas_off(k, gear - 1)) != 0;
}

std::string Step2Problem::to_json() const {
  nlohmann::json j;
  j["n"] = horizon;
  for (int k = 0; k < horizon; ++k) {
    nlohmann::json row = nlohmann::json::array();
    for (int g = 0; g < 6; ++g) row.push_back(relaxed_gear(k, g));
    j["relaxed_gear"].push_back(row);
    j["relaxed_engine"].push_back(relaxed_engine[k]);
    std::string b0, b1;
    for (int g = 0; g < 6; ++g) {
      b0 += feas_off(k, g) ? '1' : '0';
      b1 += feas_on(k, g) ? '1' : '0';
    }
    j["b0"].push_back(b0);
    j["b1"].push_back(b1);
  }
  j["dwell_gear"] = dwell_gear;
  j["dwell_engine"] = dwell_engine;
  j["initial_gear"] = initial_gear;
  j["initial_engine"] = initial_engine;
  return j.dump(2);
}

Step2Problem Step2Problem::from_json_text(const std::string& text) {
  const auto j = nlohmann::json::parse(text, nullptr, true, true);
  Step2Problem p;
  p.horizon = j.at("n").get<int>();
  p.relaxed_gear.resize(p.horizon, 6);
  p.relaxed_engine.resize(p.horizon);
  p.feas_off.resize(p.horizon, 6);
  p.feas_on.resize(p.horizon, 6);
  for (int k = 0; k < p.horizon; ++k) {
    for (int g = 0; g < 6; ++g)
      p.relaxed_gear(k, g) = j.at("relaxed_gear").at(k).at(g).get<double>();
    p.relaxed_engine[k] = j.at("relaxed_engine").at(k).get<double>();
    const std::string b0 = j.at("b0").at(k).get<std::string>();
    const std::string b1 = j.at("b1").at(k).get<std::string>();
    if (b0.size() != 6 || b1.size() != 6) fail("Step2Error", "feasibility strings must have 6 bits");
    for (int g = 0; g < 6; ++g) {
      p.feas_off(k, g) = b0[static_cast<std::size_t>(g)] == '1' ? 1 : 0;
      p.feas_on(k, g) = b1[static_cast<std::size_t>(g)] == '1' ? 1 : 0;
    }
  }
  p.dwell_gear = j.at("dwell_gear").get<int>();
  p.dwell_engine = j.at("dwell_engine").get<int>();
  p.initial_gear = j.at("initial_gear").get<int>();
  p.initial_engine = j.at("initial_engine").get<int>();
  p.validate();
  return p;
}

Eigen::MatrixXd hat_encode_gear(const std::vector<double>& relaxed_gear) {
  Eigen::MatrixXd out(static_cast<int>(relaxed_gear.size()), 6);
  for (std::size_t k = 0; k < relaxed_gear.size(); ++k) {
    const double g = std::clamp(relaxed_gear[k], 1.0, 6.0);
    for (int j = 1; j <= 6; ++j)
      out(static_cast<int>(k), j - 1) = std::max(0.0, 1.0 - std::abs(g - j));
  }
  return out;
}

void build_feasibility(const std::vector<double>& v, const std::vector<double>& a,
                       const DriveCycle& cycle, const PowertrainConfig& config,
                       Eigen::MatrixXi* feas_off, Eigen::MatrixXi* feas_on) {
  if (v.size() != a.size()) fail("Step2Error", "v and a sample counts differ");
  const int n = static_cast<int>(v.size());
  feas_off->setZero(n, 6);
  feas_on->setZero(n, 6);
  const auto& vp = config.vehicle;
  const double omega_max = std::min(config.engine.max_speed_radps, config.em.max_speed_radps);
  for (int k = 0; k < n; ++k) {
    const double f_v = traction_force(v[static_cast<std::size_t>(k)],
                                      a[static_cast<std::size_t>(k)], cycle.grade_at(k), vp);
    for (int j = 1; j <= 6; ++j) {
      double omega, alpha;
      driveline_kinematics(v[static_cast<std::size_t>(k)], a[static_cast<std::size_t>(k)], j, vp,
                           &omega, &alpha);
      if (omega > omega_max + 1e-9) continue;  // both matrices stay 0
      const double tau_off = demand_torque(f_v, omega, alpha, j, false,
                                           v[static_cast<std::size_t>(k)], vp, config.engine);
      const double tau_on = demand_torque(f_v, omega, alpha, j, true,
                                          v[static_cast<std::size_t>(k)], vp, config.engine);
      const double em_max = config.em.tau_m_max_nm(omega);
      const double engine_max = config.engine.tau_e_max_nm(omega);
      (*feas_off)(k, j - 1) = tau_off <= em_max ? 1 : 0;
      (*feas_on)(k, j - 1) = tau_on <= em_max + engine_max ? 1 : 0;
    }
  }
}

void replay_counters(const Step2Problem& problem, DiscreteSchedule* schedule) {
  const int n = problem.horizon;
  schedule->sigma_gear.assign(static_cast<std::size_t>(n), 0);
  schedule->sigma_engine.assign(static_cast<std::size_t>(n), 0);
  const int cap_g = problem.dwell_gear + 1;
  const int cap_e = problem.dwell_engine + 1;
  int sg = cap_g, se = cap_e;  // values before step 0 are unconstrained
  int gear = problem.initial_gear, engine = problem.initial_engine;
  for (int k = 0; k < n; ++k) {
    const int g_next = schedule->gear[static_cast<std::size_t>(k)];
    const int e_next = schedule->engine[static_cast<std::size_t>(k)];
    if (g_next != gear) {
      if (sg < cap_g)
        fail("DwellViolation", "gear change at step " + std::to_string(k) + " breaks dwell");
      sg = 1;
      gear = g_next;
    } else {
      sg = std::min(sg + 1, cap_g);
    }
    if (e_next != engine) {
      if (se < cap_e)
        fail("DwellViolation", "engine switch at step " + std::to_string(k) + " breaks dwell");
      se = 1;
      engine = e_next;
    } else {
      se = std::min(se + 1, cap_e);
    }
    schedule->sigma_gear[static_cast<std::size_t>(k)] = sg;
    schedule->sigma_engine[static_cast<std::size_t>(k)] = se;
  }
}

void validate_schedule(const Step2Problem& problem, const DiscreteSchedule& schedule) {
  if (static_cast<int>(schedule.gear.size()) != problem.horizon ||
      static_cast<int>(schedule.engine.size()) != problem.horizon)
    fail("Step2Error", "schedule length mismatch");
  for (int k = 0; k < problem.horizon; ++k) {
    const int g = schedule.gear[static_cast<std::size_t>(k)];
    const int e = schedule.engine[static_cast<std::size_t>(k)];
    if (g < 1 || g > 6 || (e != 0 && e != 1)) fail("Step2Error", "schedule value out of range");
    if (!problem.feasible(k, g, e))
      fail("Step2Error", "schedule uses infeasible gear at step " + std::to_string(k));
  }
  DiscreteSchedule replay = schedule;
  replay_counters(problem, &replay);  // throws on dwell violations
}

// ---------------------------------------------------------------------------
// Dynamic program over (gear, engine, sigma_g, sigma_e).

DiscreteSchedule solve_dp(const Step2Problem& problem) {
  problem.validate();
  const int n = problem.horizon;
  const int cap_g = problem.dwell_gear + 1;
  const int cap_e = problem.dwell_engine + 1;
  const int n_states = 6 * 2 * cap_g * cap_e;
  const double inf = std::numeric_limits<double>::infinity();

  auto encode = [&](int gear, int engine, int sg, int se) {
    return ((gear - 1) * 2 + engine) * cap_g * cap_e + (sg - 1) * cap_e + (se - 1);
  };

  std::vector<double> value(static_cast<std::size_t>(n_states), inf);
  std::vector<double> next(static_cast<std::size_t>(n_states), inf);
  std::vector<int> parent(static_cast<std::size_t>(n) * n_states, -1);

  // Virtual pre-step state: initial gear/engine with saturated counters.
  const int root = encode(problem.initial_gear, problem.initial_engine, cap_g, cap_e);
  value[static_cast<std::size_t>(root)] = 0.0;

  for (int k = 0; k < n; ++k) {
    std::fill(next.begin(), next.end(), inf);
    for (int gear = 1; gear <= 6; ++gear) {
      for (int engine = 0; engine <= 1; ++engine) {
        for (int sg = 1; sg <= cap_g; ++sg) {
          for (int se = 1; se <= cap_e; ++se) {
            const int s = encode(gear, engine, sg, se);
            const double v = value[static_cast<std::size_t>(s)];
            if (!(v < inf)) continue;
            for (int e2 = 0; e2 <= 1; ++e2) {
              if (e2 != engine && se < cap_e) continue;
              for (int g2 = 1; g2 <= 6; ++g2) {
                if (g2 != gear && sg < cap_g) continue;
                if (!problem.feasible(k, g2, e2)) continue;
                const int sg2 = g2 != gear ? 1 : std::min(sg + 1, cap_g);
                const int se2 = e2 != engine ? 1 : std::min(se + 1, cap_e);
                const int s2 = encode(g2, e2, sg2, se2);
                const double cost = v + problem.stage_cost(k, g2, e2);
                if (cost < next[static_cast<std::size_t>(s2)]) {
                  next[static_cast<std::size_t>(s2)] = cost;
                  parent[static_cast<std::size_t>(k) * n_states + s2] = s;
                }
              }
            }
          }
        }
      }
    }
    value.swap(next);
  }

  // Terminal pick: lowest cost, ties to lower gear then engine-off.
  int best = -1;
  double best_value = inf;
  for (int gear = 1; gear <= 6; ++gear)
    for (int engine = 0; engine <= 1; ++engine)
      for (int sg = 1; sg <= cap_g; ++sg)
        for (int se = 1; se <= cap_e; ++se) {
          const int s = encode(gear, engine, sg, se);
          if (value[static_cast<std::size_t>(s)] < best_value) {
            best_value = value[static_cast<std::size_t>(s)];
            best = s;
          }
        }
  if (best < 0) fail("Infeasible", "no dwell-feasible schedule exists");

  DiscreteSchedule schedule;
  schedule.objective = best_value;
  schedule.gear.assign(static_cast<std::size_t>(n), 0);
  schedule.engine.assign(static_cast<std::size_t>(n), 0);
  int state = best;
  for (int k = n - 1; k >= 0; --k) {
    const int ge = state / (cap_g * cap_e);
    schedule.gear[static_cast<std::size_t>(k)] = ge / 2 + 1;
    schedule.engine[static_cast<std::size_t>(k)] = ge % 2;
    state = parent[static_cast<std::size_t>(k) * n_states + state];
  }
  replay_counters(problem, &schedule);
  return schedule;
}

// ---------------------------------------------------------------------------
// Branch-and-bound.

namespace {

struct BnbContext {
  const Step2Problem* problem;
  std::vector<std::array<double, 6>> cost_off, cost_on;  // +inf when infeasible
  std::vector<double> suffix_bound;                      // dwell-relaxed from step k
  double incumbent = std::numeric_limits<double>::infinity();
  std::vector<int> incumbent_gear, incumbent_engine;
  std::vector<int> path_gear, path_engine;
  std::vector<double> path_bounds;
  long nodes = 0;
  Step2Stats* stats = nullptr;

  void dive(int k, int gear, int engine, int sg, int se, double cost);
};

void BnbContext::dive(int k, int gear, int engine, int sg, int se, double cost) {
  const auto& p = *problem;
  if (k == p.horizon) {
    if (cost < incumbent) {
      incumbent = cost;
      incumbent_gear = path_gear;
      incumbent_engine = path_engine;
      // Bounds along the incumbent's ancestor chain certify that the
      // returned schedule was never prunable.
      if (stats) stats->node_bounds = path_bounds;
    }
    return;
  }
  const int cap_g = p.dwell_gear + 1;
  const int cap_e = p.dwell_engine + 1;
  std::array<Move, 12> moves;
  const int n_moves = legal_moves(p, k, gear, engine, sg >= cap_g, se >= cap_e, &moves);
  for (int i = 0; i < n_moves; ++i) {
    const auto& mv = moves[static_cast<std::size_t>(i)];
    const double child_cost = cost + mv.cost;
    const double bound = child_cost + suffix_bound[static_cast<std::size_t>(k) + 1];
    ++nodes;
    if (nodes > 80'000'000)
      fail("InternalError", "branch-and-bound node budget exhausted");
    // Non-strict pruning keeps the first-found schedule among exact ties
    // and can never discard a strictly better completion.
    if (bound >= incumbent) continue;
    path_gear.push_back(mv.gear);
    path_engine.push_back(mv.engine);
    path_bounds.push_back(bound);
    dive(k + 1, mv.gear, mv.engine, mv.gear != gear ? 1 : std::min(sg + 1, cap_g),
         mv.engine != engine ? 1 : std::min(se + 1, cap_e), child_cost);
    path_gear.pop_back();
    path_engine.pop_back();
    path_bounds.pop_back();
  }
}

}  // namespace

DiscreteSchedule solve_miqp(const Step2Problem& problem, Step2Stats* stats) {
  problem.validate();
  const int n = problem.horizon;

  BnbContext ctx;
  ctx.problem = &problem;
  ctx.stats = stats;
  ctx.cost_off.resize(static_cast<std::size_t>(n));
  ctx.cost_on.resize(static_cast<std::size_t>(n));
  ctx.suffix_bound.assign(static_cast<std::size_t>(n) + 1, 0.0);
  const double inf = std::numeric_limits<double>::infinity();
  for (int k = n - 1; k >= 0; --k) {
    double best = inf;
    for (int j = 1; j <= 6; ++j) {
      const double c_off = problem.feasible(k, j, 0) ? problem.stage_cost(k, j, 0) : inf;
      const double c_on = problem.feasible(k, j, 1) ? problem.stage_cost(k, j, 1) : inf;
      ctx.cost_off[static_cast<std::size_t>(k)][static_cast<std::size_t>(j - 1)] = c_off;
      ctx.cost_on[static_cast<std::size_t>(k)][static_cast<std::size_t>(j - 1)] = c_on;
      best = std::min({best, c_off, c_on});
    }
    if (!(best < inf)) fail("Infeasible", "no feasible gear at step " + std::to_string(k));
    ctx.suffix_bound[static_cast<std::size_t>(k)] =
        ctx.suffix_bound[static_cast<std::size_t>(k) + 1] + best;
  }
  if (stats) stats->root_bound = ctx.suffix_bound[0];

  ctx.path_gear.reserve(static_cast<std::size_t>(n));
  ctx.path_engine.reserve(static_cast<std::size_t>(n));
  ctx.dive(0, problem.initial_gear, problem.initial_engine, problem.dwell_gear + 1,
           problem.dwell_engine + 1, 0.0);
  if (stats) stats->nodes_explored = ctx.nodes;

  if (!(ctx.incumbent < inf)) fail("Infeasible", "no dwell-feasible schedule exists");
  DiscreteSchedule schedule;
  schedule.objective = ctx.incumbent;
  schedule.gear = std::move(ctx.incumbent_gear);
  schedule.engine = std::move(ctx.incumbent_engine);
  replay_counters(problem, &schedule);
  return schedule;
}

// ---------------------------------------------------------------------------

namespace {
void enumerate_rec(const Step2Problem& p, int k, int gear, int engine, int sg, int se, double cost,
                   double* best) {
  if (k == p.horizon) {
    *best = std::min(*best, cost);
    return;
  }
  const int cap_g = p.dwell_gear + 1;
  const int cap_e = p.dwell_engine + 1;
  for (int e2 = 0; e2 <= 1; ++e2) {
    if (e2 != engine && se < cap_e) continue;
    for (int g2 = 1; g2 <= 6; ++g2) {
      if (g2 != gear && sg < cap_g) continue;
      if (!p.feasible(k, g2, e2)) continue;
      enumerate_rec(p, k + 1, g2, e2, g2 != gear ? 1 : std::min(sg + 1, cap_g),
                    e2 != engine ? 1 : std::min(se + 1, cap_e),
                    cost + p.stage_cost(k, g2, e2), best);
    }
  }
}
}  // namespace

double enumerate_schedules(const Step2Problem& problem) {
  problem.validate();
  if (problem.horizon > 8) fail("HorizonTooLong", "exhaustive enumeration capped at N = 8");
  double best = std::numeric_limits<double>::infinity();
  enumerate_rec(problem, 0, problem.initial_gear, problem.initial_engine,
                problem.dwell_gear + 1, problem.dwell_engine + 1, 0.0, &best);
  if (!(best < std::numeric_limits<double>::infinity()))
    fail("Infeasible", "no dwell-feasible schedule exists");
  return best;
}

EquivalenceReport check_equivalence(const Step2Problem& problem, const std::string& dump_dir) {
  if (problem.horizon > 600) fail("Step2Error", "equivalence check capped at N = 600");
  using clock = std::chrono::steady_clock;
  EquivalenceReport report;

  const auto t0 = clock::now();
  const auto miqp = solve_miqp(problem);
  const auto t1 = clock::now();
  const auto dp = solve_dp(problem);
  const auto t2 = clock::now();

  report.miqp_objective = miqp.objective;
  report.dp_objective = dp.objective;
  report.miqp_seconds = std::chrono::duration<double>(t1 - t0).count();
  report.dp_seconds = std::chrono::duration<double>(t2 - t1).count();
  report.equal = std::abs(miqp.objective - dp.objective) <= 1e-9;
  if (!report.equal) {
    const std::string path = dump_dir + "/step2_divergent_" +
                             hex16(fnv1a64(problem.to_json().data(), problem.to_json().size())) +
                             ".json";
    write_text_file(path, problem.to_json());
    fail("EquivalenceFailure", "solver objectives differ by " +
                                   format_double(miqp.objective - dp.objective) +
                                   "; instance saved to " + path);
  }
  return report;
}

Step2Problem random_instance(int horizon, unsigned seed, bool adversarial) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  Step2Problem p;
  p.horizon = horizon;
  p.dwell_gear = 3;
  p.dwell_engine = 2;

  // Relaxed gear: smoothed random walk over [1, 6] resembling step-1
  // output, with occasional plateaus.
  std::vector<double> relaxed(static_cast<std::size_t>(horizon));
  double g = 1.0 + 5.0 * unit(rng);
  for (int k = 0; k < horizon; ++k) {
    g += 0.6 * (unit(rng) - 0.5);
    if (unit(rng) < 0.1) g += 2.0 * (unit(rng) - 0.5);
    g = std::clamp(g, 1.0, 6.0);
    relaxed[static_cast<std::size_t>(k)] = g;
  }
  p.relaxed_gear = hat_encode_gear(relaxed);

  p.relaxed_engine.resize(horizon);
  double e = unit(rng);
  for (int k = 0; k < horizon; ++k) {
    e += 0.4 * (unit(rng) - 0.5);
    e = std::clamp(e, 0.0, 1.0);
    if (adversarial) e = 0.5 + 0.2 * std::sin(0.9 * k);
    p.relaxed_engine[k] = e;
  }

  p.feas_off.setZero(horizon, 6);
  p.feas_on.setZero(horizon, 6);
  for (int k = 0; k < horizon; ++k) {
    for (int j = 0; j < 6; ++j) {
      bool on;
      if (adversarial) {
        on = ((k / (j + 1)) % 2) == 0;  // alternating feasibility stripes
      } else {
        on = unit(rng) < 0.8;
      }
      p.feas_on(k, j) = on ? 1 : 0;
      p.feas_off(k, j) = (on && unit(rng) < 0.7) ? 1 : 0;
    }
    // Gear 3 with the engine on stays feasible throughout so every
    // instance admits at least one dwell-feasible schedule.
    p.feas_on(k, 2) = 1;
  }

  p.initial_gear = std::clamp(static_cast<int>(std::lround(relaxed[0])), 1, 6);
  p.initial_engine = p.relaxed_engine[0] >= 0.5 ? 1 : 0;
  p.validate();
  return p;
}

}  // namespace ps3
