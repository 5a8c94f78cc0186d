#pragma once

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "cate/baselines.hpp"
#include "cate/cate.hpp"
#include "cate/dynamics.hpp"
#include "cate/geometry.hpp"
#include "cate/io.hpp"
#include "cate/metrics.hpp"
#include "cate/rng.hpp"

namespace cate {

// Discrete-time slack on the continuous-time safety guarantees.
constexpr double kSafetySlack = 1e-3;

class GenerationError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Formation patterns, spaced so that A2 holds with margin (1.5 r between
// closest points), centered on `center`.
inline std::vector<Vec> formation_pattern(const std::string& name, int count,
                                          double safe_radius, const Vec& center) {
  std::vector<Vec> pts;
  const double s = 1.5 * safe_radius;
  if (name == "arrow") {
    const double d = s / std::sqrt(2.0);
    pts.push_back(Vec(0, 0));
    for (int k = 1; k < count; ++k) {
      int j = (k + 1) / 2;
      double sign = (k % 2 == 1) ? 1.0 : -1.0;
      pts.push_back(Vec(-j * d, sign * j * d));
    }
  } else if (name == "column") {
    for (int k = 0; k < count; ++k) pts.push_back(Vec(0, k * s));
  } else if (name == "platoon") {
    for (int k = 0; k < count; ++k) pts.push_back(Vec(k * s, 0));
  } else {
    throw std::invalid_argument("unknown formation pattern \"" + name + "\"");
  }
  Vec lo = pts[0], hi = pts[0];
  for (const auto& p : pts)
    for (int i = 0; i < 2; ++i) {
      lo[i] = std::min(lo[i], p[i]);
      hi[i] = std::max(hi[i], p[i]);
    }
  Vec shift = center - 0.5 * (lo + hi);
  for (auto& p : pts) p += shift;
  return pts;
}

namespace harness_detail {

inline double dist_to_rect(const Vec& p, double x0, double x1, double y0, double y1) {
  double dx = std::max({x0 - p[0], 0.0, p[0] - x1});
  double dy = std::max({y0 - p[1], 0.0, p[1] - y1});
  return std::sqrt(dx * dx + dy * dy);
}

inline bool in_rect(const Vec& p, double x0, double x1, double y0, double y1) {
  return p[0] >= x0 && p[0] <= x1 && p[1] >= y0 && p[1] <= y1;
}

}  // namespace harness_detail

// Random world following the benchmark protocol: placements sampled in
// {x in [-5,35], y in [0,25]}, obstacle radii in [1.7,4], nothing inside the
// central goal region {x in [10,25], y in [7,18]}, rejection-sampled until
// the separation assumptions hold.
inline ScenarioSpec generate_random_scenario(int robot_count, int obstacle_count,
                                             std::uint64_t seed,
                                             const Params& base_params = Params{},
                                             const std::string& formation = "arrow") {
  if (robot_count < 1) throw std::invalid_argument("need at least one robot");
  if (obstacle_count < 0) throw std::invalid_argument("negative obstacle count");

  constexpr double kX0 = -5, kX1 = 35, kY0 = 0, kY1 = 25;
  constexpr double kEx0 = 10, kEx1 = 25, kEy0 = 7, kEy1 = 18;
  const double margin = 0.3;

  ScenarioSpec spec;
  spec.dimension = 2;
  spec.seed = seed;
  spec.params = base_params;
  const double r = spec.params.safe_radius;

  SplitMix64 rng(seed);
  int rejections = 0;
  auto reject = [&]() {
    if (++rejections > 10000)
      throw GenerationError("generation failed: 10000 consecutive rejections");
  };

  while (static_cast<int>(spec.obstacles.size()) < obstacle_count) {
    Obstacle o;
    o.center = Vec(rng.uniform(kX0, kX1), rng.uniform(kY0, kY1));
    o.radius = rng.uniform(1.7, 4.0);
    o.velocity = Vec(0, 0);
    if (harness_detail::dist_to_rect(o.center, kEx0, kEx1, kEy0, kEy1) <
        o.radius + r + margin) {
      reject();
      continue;
    }
    bool clash = false;
    for (const auto& other : spec.obstacles)
      // Gap between disks wide enough for a robot to pass (2r), so random
      // placement cannot build impassable pockets.
      if (distance(o.center, other.center) <
          o.radius + other.radius + 2.0 * r + margin) {
        clash = true;
        break;
      }
    if (clash) {
      reject();
      continue;
    }
    rejections = 0;
    spec.obstacles.push_back(o);
  }

  spec.formation.points =
      formation_pattern(formation, robot_count, r, Vec(17.5, 12.5));
  spec.formation.velocity.base = Vec(0, 0);
  spec.formation.velocity.amplitude = Vec(0, 0);

  while (static_cast<int>(spec.robots.size()) < robot_count) {
    Vec p(rng.uniform(kX0, kX1), rng.uniform(kY0, kY1));
    if (harness_detail::in_rect(p, kEx0, kEx1, kEy0, kEy1)) {
      reject();
      continue;
    }
    bool clash = false;
    for (const auto& o : spec.obstacles)
      if (distance(p, o.center) < o.radius + r + margin) {
        clash = true;
        break;
      }
    for (const auto& other : spec.robots)
      if (!clash && distance(p, other.position) < 1.5 * r) clash = true;
    if (clash) {
      reject();
      continue;
    }
    rejections = 0;
    RobotState robot;
    robot.id = static_cast<int>(spec.robots.size());
    robot.position = p;
    robot.velocity_estimate = Vec(0, 0);
    spec.robots.push_back(robot);
  }
  return spec;
}

// Scenarios with published geometry.
inline ScenarioSpec named_scenario(const std::string& name) {
  ScenarioSpec spec;
  spec.dimension = 2;
  spec.seed = 1;

  auto add_robots = [&spec](const std::vector<Vec>& positions) {
    for (const auto& p : positions) {
      RobotState r;
      r.id = static_cast<int>(spec.robots.size());
      r.position = p;
      r.velocity_estimate = Vec::zero(p.n);
      spec.robots.push_back(r);
    }
  };

  if (name == "column-2obs") {
    spec.obstacles = {{Vec(5, 0), 4.5, Vec(0, 0)}, {Vec(3, 17), 3.0, Vec(0, 0)}};
    add_robots({Vec(-4, 2), Vec(-4, 6), Vec(-4, 10), Vec(-4, 14), Vec(-4, 18),
                Vec(-2, 0), Vec(-2, 4), Vec(-2, 8), Vec(-2, 12), Vec(-2, 16)});
    for (int k = 0; k < 10; ++k) spec.formation.points.push_back(Vec(12, 1.5 * k));
    spec.formation.velocity.base = Vec(0, 0);
    spec.formation.velocity.amplitude = Vec(0, 0);
    spec.params.gamma_gain = 5.0;
  } else if (name == "narrow-gap-8") {
    spec.obstacles = {{Vec(6, 2), 5.5, Vec(0, 0)}, {Vec(6, 14), 5.5, Vec(0, 0)}};
    add_robots({Vec(-2, 5), Vec(-2, 7), Vec(-2, 9), Vec(-2, 11), Vec(-4, 5),
                Vec(-4, 7), Vec(-4, 9), Vec(-4, 11)});
    for (int k = 0; k < 8; ++k) spec.formation.points.push_back(Vec(11 + 0.6 * k, 8));
    spec.formation.velocity.base = Vec(0, 0);
    spec.formation.velocity.amplitude = Vec(0, 0);
    spec.params.safe_radius = 0.35;
    spec.params.sensing_radius = 2.0;
    spec.params.u_max = 1.5;
    spec.params.b = 1e4;
    spec.params.gamma_gain = 5.0;
    spec.params.timeout = 120.0;
  } else if (name == "moving-obs-11") {
    spec.obstacles = {{Vec(6, 4), 2.0, Vec(0.2, 0.15)},
                      {Vec(8, 20), 2.2, Vec(0.25, -0.2)},
                      {Vec(4, 12), 1.8, Vec(0.15, 0.25)},
                      {Vec(30, 4), 2.0, Vec(-0.25, 0.1)},
                      {Vec(31, 20), 2.1, Vec(-0.2, -0.15)},
                      {Vec(18, 2), 1.9, Vec(0.1, 0.2)},
                      {Vec(17, 23), 2.0, Vec(-0.1, -0.25)}};
    add_robots({Vec(-4, 2), Vec(-4, 6), Vec(-4, 10), Vec(-4, 14), Vec(-4, 18),
                Vec(-4, 22), Vec(-1, 4), Vec(-1, 8), Vec(-1, 12), Vec(-1, 16),
                Vec(-1, 20)});
    spec.formation.points = formation_pattern("arrow", 11, 1.0, Vec(17.5, 12.5));
    spec.formation.velocity.base = Vec(0, 0);
    spec.formation.velocity.amplitude = Vec(0, 0);
    spec.params.gamma_gain = 5.0;
  } else if (name == "amr-gap-2") {
    spec.obstacles = {{Vec(2, -3), 2.25, Vec(0, 0)}, {Vec(2, 3), 2.25, Vec(0, 0)}};
    add_robots({Vec(-1.2, 2), Vec(-1.2, -2)});
    spec.formation.points = {Vec(5, 0), Vec(8, 0)};
    spec.formation.velocity.base = Vec(0.1, 0);
    spec.formation.velocity.amplitude = Vec(0, 0);
    spec.params.u_max = 0.2;
    spec.params.sensing_radius = 1.5;
    spec.params.safe_radius = 1.0;
    spec.params.b = 1e4;
    spec.params.c = 1e2;
    spec.params.penalty = 1000.0;
  } else if (name == "platoon-3d-8") {
    spec.dimension = 3;
    spec.obstacles = {{Vec(7, 5, 4), 2.5, Vec(0, 0, 0)},
                      {Vec(7, 1, 2), 2.0, Vec(0, 0, 0)}};
    add_robots({Vec(0, 2, 2), Vec(0, 4, 2), Vec(0, 6, 2), Vec(0, 8, 2),
                Vec(0, 2, 5), Vec(0, 4, 5), Vec(0, 6, 5), Vec(0, 8, 5)});
    for (int k = 0; k < 8; ++k) spec.formation.points.push_back(Vec(12 + 1.5 * k, 5, 4));
    spec.formation.velocity.base = Vec(0, 0, 0);
    spec.formation.velocity.amplitude = Vec(0, 0, 0);
    spec.params.gamma_gain = 5.0;
  } else {
    throw std::invalid_argument("unknown scenario \"" + name + "\"");
  }
  return spec;
}

// One simulation run. Per step: estimator update, allocation/controller
// sweep, robot integration, world propagation, bookkeeping. Terminates on
// convergence (everyone within rho and the allocation stable for one
// second), timeout, safety breach or solver failure.
inline SimulationRecord run_simulation(const ScenarioSpec& spec) {
  auto report = validate_scenario(spec);
  if (!report.ok())
    throw std::invalid_argument("scenario violates assumption " +
                                report.violations[0].assumption + ": " +
                                report.violations[0].detail);

  const Params& P = spec.params;
  const int N = static_cast<int>(spec.robots.size());
  const int dim = spec.dimension;

  SimulationRecord rec;
  rec.dt = P.dt;
  rec.dimension = dim;
  rec.controller = spec.controller;
  rec.seed = spec.seed;
  rec.positions.assign(static_cast<std::size_t>(N), {});
  rec.allocations.assign(static_cast<std::size_t>(N), {});
  rec.desired_points.assign(spec.formation.points.size(), {});
  rec.obstacle_centers.assign(spec.obstacles.size(), {});
  for (const auto& o : spec.obstacles) rec.obstacle_radii.push_back(o.radius);

  std::vector<RobotState> robots = spec.robots;
  std::vector<Vec> desired = spec.formation.points;
  std::vector<Obstacle> obstacles = spec.obstacles;
  EstimatorState estimator(N, {0}, P.estimator_gain, P.u_max, dim);

  AllocationMatrix allocation(N);
  if (spec.controller == Controller::CAPT_ASSIGN ||
      spec.controller == Controller::GREEDY) {
    std::vector<Vec> rp;
    for (const auto& r : robots) rp.push_back(r.position);
    AssignmentResult a = spec.controller == Controller::CAPT_ASSIGN
                             ? hungarian_assign(rp, desired)
                             : greedy_assign(rp, desired);
    for (int i = 0; i < N; ++i) allocation.set_row(i, a.permutation[static_cast<std::size_t>(i)]);
  }

  WarmStartCache cache;
  double t = 0.0;
  double last_allocation_change = 0.0;
  const int reassign_every =
      P.t_reassign > 0 ? std::max(1, static_cast<int>(std::lround(P.t_reassign / P.dt))) : 0;

  auto append_state = [&]() {
    rec.times.push_back(t);
    for (int i = 0; i < N; ++i) {
      rec.positions[static_cast<std::size_t>(i)].push_back(robots[static_cast<std::size_t>(i)].position);
      rec.allocations[static_cast<std::size_t>(i)].push_back(allocation.row(i));
    }
    for (std::size_t k = 0; k < desired.size(); ++k)
      rec.desired_points[k].push_back(desired[k]);
    for (std::size_t l = 0; l < obstacles.size(); ++l)
      rec.obstacle_centers[l].push_back(obstacles[l].center);
  };

  auto safety_ok = [&]() {
    for (int i = 0; i < N; ++i) {
      for (int j = i + 1; j < N; ++j)
        if (distance(robots[static_cast<std::size_t>(i)].position,
                     robots[static_cast<std::size_t>(j)].position) <
            P.safe_radius - kSafetySlack)
          return false;
      for (const auto& o : obstacles)
        if (distance(robots[static_cast<std::size_t>(i)].position, o.center) <
            P.safe_radius + o.radius - kSafetySlack)
          return false;
    }
    return true;
  };

  auto converged_now = [&]() {
    if (t - last_allocation_change < 1.0 - 1e-9) return false;
    for (int i = 0; i < N; ++i) {
      int k = allocation.row(i);
      if (distance(robots[static_cast<std::size_t>(i)].position,
                   desired[static_cast<std::size_t>(k)]) > P.convergence_radius)
        return false;
    }
    return true;
  };

  append_state();
  rec.termination = Termination::Timeout;
  if (converged_now()) {
    rec.termination = Termination::Converged;
    return rec;
  }

  int step = 0;
  while (t < P.timeout - 1e-9) {
    try {
      estimator = estimator_step(estimator, spec.formation.velocity(t), P.dt);
      for (int i = 0; i < N; ++i)
        robots[static_cast<std::size_t>(i)].velocity_estimate = estimator.estimate(i);

      if (reassign_every > 0 && spec.controller == Controller::CAPT_ASSIGN &&
          step > 0 && step % reassign_every == 0) {
        std::vector<Vec> rp;
        for (const auto& r : robots) rp.push_back(r.position);
        AssignmentResult a = hungarian_assign(rp, desired);
        for (int i = 0; i < N; ++i)
          allocation.set_row(i, a.permutation[static_cast<std::size_t>(i)]);
      }

      WorldSnapshot world{robots, desired, obstacles};
      std::vector<CateDecision> decisions;
      if (spec.controller == Controller::CATE) {
        auto [next_alloc, decs] = allocation_sweep(world, allocation, P, &cache);
        if (next_alloc != allocation) last_allocation_change = t;
        allocation = next_alloc;
        decisions = std::move(decs);
      } else {
        for (const auto& robot : robots)
          decisions.push_back(fote_step(robot, world, allocation, P, &cache));
      }

      for (int i = 0; i < N; ++i) {
        const Vec& u = decisions[static_cast<std::size_t>(i)].u_star;
        RobotState& robot = robots[static_cast<std::size_t>(i)];
        if (P.unicycle) {
          UnicycleCommand cmd = unicycle_transform(u, robot.heading, P.wheel_offset);
          robot = integrate_unicycle(robot, cmd, P.dt);
        } else {
          robot = integrate_robot(robot, u, P.dt, P.u_max);
        }
      }

      desired = propagate_formation(desired, spec.formation.velocity, t, P.dt);
      for (auto& o : obstacles) o.center += P.dt * o.velocity;
      t += P.dt;
      ++step;
      append_state();

      if (!safety_ok()) {
        rec.termination = Termination::SafetyBreach;
        break;
      }
      if (converged_now()) {
        rec.termination = Termination::Converged;
        break;
      }
    } catch (const std::exception&) {
      rec.termination = Termination::SolverFailure;
      break;
    }
  }
  return rec;
}

struct BatchSpec {
  std::vector<int> robot_counts{5, 7, 9, 11};
  std::vector<int> obstacle_counts{4, 5, 6, 7};
  int trials = 10;
  std::uint64_t base_seed = 1;
  std::vector<Controller> controllers{Controller::CATE, Controller::FOTE};
  std::string formation = "arrow";
  Params base_params;
  std::string out_dir;  // empty: no files written
};

struct RunResult {
  Controller controller = Controller::CATE;
  int robots = 0;
  int obstacles = 0;
  int trial = 0;
  std::uint64_t seed = 0;
  Termination termination = Termination::Timeout;
  MetricsReport metrics;
};

struct BatchSummaryRow {
  Controller controller = Controller::CATE;
  int robots = 0;
  int obstacles = 0;
  int trials = 0;
  double success_rate = 0.0;  // percent
  double tr_mean = 0.0, tr_sd = 0.0;
  double crossings_mean = 0.0, crossings_sd = 0.0;
  double length_mean = 0.0, length_sd = 0.0;
};

struct BatchResult {
  std::vector<RunResult> runs;
  std::vector<BatchSummaryRow> summary;
};

namespace harness_detail {

struct MeanSd {
  double mean = 0.0, sd = 0.0;
};

inline MeanSd mean_sd(const std::vector<double>& xs) {
  MeanSd out;
  if (xs.empty()) return out;
  for (double x : xs) out.mean += x;
  out.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - out.mean) * (x - out.mean);
    out.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return out;
}

inline int batch_threads() {
  if (const char* env = std::getenv("CATE_THREADS")) {
    int n = std::atoi(env);
    if (n >= 1) return n;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace harness_detail

// Aggregates per-run metrics into Table-style rows: success rate plus
// mean/SD of convergence time, crossings (truncated at T_r) and trajectory
// length over the successful runs of each cell.
inline std::vector<BatchSummaryRow> summarize_batch(const BatchSpec& spec,
                                                    const std::vector<RunResult>& runs) {
  std::vector<BatchSummaryRow> rows;
  for (Controller ctrl : spec.controllers)
    for (int N : spec.robot_counts)
      for (int M : spec.obstacle_counts) {
        BatchSummaryRow row;
        row.controller = ctrl;
        row.robots = N;
        row.obstacles = M;
        std::vector<double> trs, crossings, lengths;
        for (const auto& run : runs) {
          if (run.controller != ctrl || run.robots != N || run.obstacles != M) continue;
          ++row.trials;
          if (run.metrics.success) {
            if (run.metrics.convergence_time) trs.push_back(*run.metrics.convergence_time);
            crossings.push_back(static_cast<double>(run.metrics.crossings));
            lengths.push_back(run.metrics.trajectory_length);
          }
        }
        if (row.trials == 0) continue;
        row.success_rate = 100.0 * static_cast<double>(trs.size()) /
                           static_cast<double>(row.trials);
        auto tr = harness_detail::mean_sd(trs);
        auto cr = harness_detail::mean_sd(crossings);
        auto len = harness_detail::mean_sd(lengths);
        row.tr_mean = tr.mean;
        row.tr_sd = tr.sd;
        row.crossings_mean = cr.mean;
        row.crossings_sd = cr.sd;
        row.length_mean = len.mean;
        row.length_sd = len.sd;
        rows.push_back(row);
      }
  return rows;
}

inline std::string runs_csv_header() {
  return "controller,N,M,trial,seed,termination," + metrics_csv_header();
}

inline std::string run_to_csv_row(const RunResult& r) {
  std::ostringstream out;
  out << to_string(r.controller) << "," << r.robots << "," << r.obstacles << ","
      << r.trial << "," << r.seed << "," << to_string(r.termination) << ","
      << metrics_to_csv_row(r.metrics);
  return out.str();
}

inline std::string summary_to_csv(const std::vector<BatchSummaryRow>& rows) {
  std::ostringstream out;
  out << "controller,N,M,trials,success_rate,tr_mean,tr_sd,crossings_mean,"
         "crossings_sd,length_mean,length_sd\n";
  for (const auto& r : rows) {
    out << to_string(r.controller) << "," << r.robots << "," << r.obstacles << ","
        << r.trials << "," << fmt6(r.success_rate) << "," << fmt6(r.tr_mean) << ","
        << fmt6(r.tr_sd) << "," << fmt6(r.crossings_mean) << ","
        << fmt6(r.crossings_sd) << "," << fmt6(r.length_mean) << ","
        << fmt6(r.length_sd) << "\n";
  }
  return out.str();
}

inline BatchSpec batch_spec_from_json(const std::string& text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const std::exception& e) {
    throw StructuralError(std::string("batch JSON parse error: ") + e.what());
  }
  io_detail::reject_unknown(doc,
                            {"robots", "obstacles", "trials", "base_seed",
                             "controllers", "formation", "timeout", "params"},
                            "batch spec");
  BatchSpec spec;
  if (doc.contains("robots")) spec.robot_counts = doc["robots"].get<std::vector<int>>();
  if (doc.contains("obstacles"))
    spec.obstacle_counts = doc["obstacles"].get<std::vector<int>>();
  if (doc.contains("trials")) spec.trials = doc["trials"].get<int>();
  if (doc.contains("base_seed")) spec.base_seed = doc["base_seed"].get<std::uint64_t>();
  if (doc.contains("controllers")) {
    spec.controllers.clear();
    for (const auto& c : doc["controllers"])
      spec.controllers.push_back(io_detail::controller_from_string(c.get<std::string>()));
  }
  if (doc.contains("formation")) spec.formation = doc["formation"].get<std::string>();
  if (doc.contains("timeout")) spec.base_params.timeout = doc["timeout"].get<double>();
  if (doc.contains("params")) {
    // Reuse the scenario parser for the params block.
    json wrapper;
    wrapper["dimension"] = 2;
    wrapper["robots"] = json::array({json{{"position", {0.0, 0.0}}}});
    wrapper["formation"] = json{{"points", json::array({{10.0, 0.0}})}};
    double timeout = spec.base_params.timeout;
    wrapper["params"] = doc["params"];
    spec.base_params = scenario_from_json(wrapper.dump()).params;
    if (!doc["params"].contains("timeout")) spec.base_params.timeout = timeout;
  }
  return spec;
}

// Seeded grid of runs. Each (N, M, trial) cell generates one world shared by
// every controller; runs execute on a small thread pool and results land in
// preallocated slots, so the output is deterministic for a fixed base seed.
inline BatchResult run_batch(const BatchSpec& spec) {
  if (spec.trials < 1) throw std::invalid_argument("trials must be >= 1");

  struct Job {
    int N, M, trial;
    Controller controller;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (int N : spec.robot_counts)
    for (int M : spec.obstacle_counts)
      for (int trial = 0; trial < spec.trials; ++trial) {
        std::uint64_t seed =
            derive_seed(spec.base_seed, static_cast<std::uint64_t>(N),
                        static_cast<std::uint64_t>(M), static_cast<std::uint64_t>(trial));
        for (Controller ctrl : spec.controllers)
          jobs.push_back({N, M, trial, ctrl, seed});
      }

  BatchResult result;
  result.runs.assign(jobs.size(), {});

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      std::size_t idx = next.fetch_add(1);
      if (idx >= jobs.size()) return;
      const Job& job = jobs[idx];
      RunResult rr;
      rr.controller = job.controller;
      rr.robots = job.N;
      rr.obstacles = job.M;
      rr.trial = job.trial;
      rr.seed = job.seed;
      try {
        ScenarioSpec scenario = generate_random_scenario(
            job.N, job.M, job.seed, spec.base_params, spec.formation);
        scenario.params.timeout = spec.base_params.timeout;
        scenario.controller = job.controller;
        SimulationRecord rec = run_simulation(scenario);
        rr.termination = rec.termination;
        MetricsOptions mo;
        mo.rho = scenario.params.convergence_radius;
        mo.safe_radius = scenario.params.safe_radius;
        mo.truncate_crossings_at_tr = true;
        rr.metrics = compute_metrics(rec, mo);
      } catch (const std::exception&) {
        rr.termination = Termination::SolverFailure;
      }
      result.runs[idx] = std::move(rr);
    }
  };

  const int nthreads = std::min<int>(harness_detail::batch_threads(),
                                     static_cast<int>(jobs.size()));
  std::vector<std::thread> pool;
  for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  result.summary = summarize_batch(spec, result.runs);

  if (!spec.out_dir.empty()) {
    std::filesystem::create_directories(spec.out_dir);
    std::ostringstream runs_csv;
    runs_csv << runs_csv_header() << "\n";
    for (const auto& run : result.runs) runs_csv << run_to_csv_row(run) << "\n";
    write_file(spec.out_dir + "/runs.csv", runs_csv.str());
    write_file(spec.out_dir + "/summary.csv", summary_to_csv(result.summary));
  }
  return result;
}

}  // namespace cate
