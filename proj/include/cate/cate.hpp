#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

#include "cate/constraints.hpp"
#include "cate/geometry.hpp"
#include "cate/qp.hpp"

namespace cate {

inline std::vector<std::string> cate_params_warnings(const Params& p) {
  std::vector<std::string> w;
  if (!(p.b > p.c && p.c > 1.0))
    w.push_back("expected b >> c >> 1, got b=" + std::to_string(p.b) +
                " c=" + std::to_string(p.c));
  return w;
}

struct CateDecision {
  int robot_id = 0;
  int chosen_k = 0;
  Vec u_star;
  std::vector<double> delta_star;
  std::vector<double> objective_table;  // total cost per candidate
  bool fallback_used = false;
};

// Warm-start store, one slot per (robot, candidate). A slot is dropped when
// the constraint row count changes (neighbor churn alters the geometry).
class WarmStartCache {
 public:
  const QpSolution* lookup(int robot, int k, std::size_t row_count) const {
    auto it = slots_.find(key(robot, k));
    if (it == slots_.end() || it->second.row_count != row_count) return nullptr;
    return &it->second.solution;
  }
  void store(int robot, int k, std::size_t row_count, const QpSolution& sol) {
    slots_[key(robot, k)] = {sol, row_count};
  }

 private:
  struct Slot {
    QpSolution solution;
    std::size_t row_count = 0;
  };
  static long key(int robot, int k) { return static_cast<long>(robot) * 100000 + k; }
  std::unordered_map<long, Slot> slots_;
};

// Allocation part of the candidate score: b * sum_q (colsum_q - 1)^2 with
// robot i's row replaced by one-hot(k) and all other rows as they stand.
inline double candidate_cost(const AllocationMatrix& allocation, int robot_id,
                             int k, double qp_objective, double b) {
  std::vector<int> sums = allocation.column_sums();
  sums[static_cast<std::size_t>(allocation.row(robot_id))] -= 1;
  sums[static_cast<std::size_t>(k)] += 1;
  double err = 0.0;
  for (int s : sums) {
    double e = static_cast<double>(s) - 1.0;
    err += e * e;
  }
  return b * err + qp_objective;
}

namespace cate_detail {

inline QpSolution solve_candidate(const RobotState& robot,
                                  const WorldSnapshot& world,
                                  const Params& params, int k,
                                  WarmStartCache* cache) {
  ConstraintSet set = build_constraints(robot, world, params, k);
  QpProblem qp = QpProblem::from_constraints(set, params.c, robot.velocity_estimate);
  QpOptions opt;
  opt.tol = params.qp_tol;
  opt.max_iter = params.qp_max_iter;
  const QpSolution* warm =
      cache ? cache->lookup(robot.id, k, set.rows.size()) : nullptr;
  QpSolution sol = solve_qp(qp, opt, warm);
  if (cache) cache->store(robot.id, k, set.rows.size(), sol);
  return sol;
}

// Trivial feasible decision: track the estimator, park on the robot's own
// index, raise each slack just enough to cover its convergence row.
inline CateDecision fallback_decision(const RobotState& robot,
                                      const WorldSnapshot& world,
                                      const Params& params, int k) {
  CateDecision d;
  d.robot_id = robot.id;
  d.chosen_k = k;
  d.u_star = robot.velocity_estimate;
  d.fallback_used = true;
  ConstraintSet set = build_constraints(robot, world, params, k);
  d.delta_star.assign(static_cast<std::size_t>(set.slack_dim), 0.0);
  for (const auto& row : set.rows) {
    if (row.kind != RowKind::PointConvergence) continue;
    double need = dot(row.coeff_u, d.u_star) - row.rhs;
    d.delta_star[static_cast<std::size_t>(row.slack_index)] = std::max(0.0, need);
  }
  return d;
}

}  // namespace cate_detail

// One robot's step of the concurrent-allocation optimization: enumerate the
// N one-hot candidates, solve each QP, score with the coupled allocation
// cost, and keep the incumbent unless a challenger wins by more than the
// hysteresis margin.
inline CateDecision cate_step_robot(const RobotState& robot,
                                    const WorldSnapshot& world,
                                    const AllocationMatrix& allocation,
                                    const Params& params,
                                    WarmStartCache* cache = nullptr) {
  const int N = static_cast<int>(world.desired_points.size());
  const double inf = std::numeric_limits<double>::infinity();
  const int incumbent = allocation.row(robot.id);

  CateDecision decision;
  decision.robot_id = robot.id;
  decision.objective_table.assign(static_cast<std::size_t>(N), inf);

  std::vector<QpSolution> solutions(static_cast<std::size_t>(N));
  bool any_ok = false;
  for (int k = 0; k < N; ++k) {
    QpSolution sol = cate_detail::solve_candidate(robot, world, params, k, cache);
    if (sol.status != QpStatus::Optimal) continue;
    any_ok = true;
    decision.objective_table[static_cast<std::size_t>(k)] =
        candidate_cost(allocation, robot.id, k, sol.objective, params.b);
    solutions[static_cast<std::size_t>(k)] = sol;
  }

  if (!any_ok) return cate_detail::fallback_decision(robot, world, params, robot.id);

  int best = -1;
  for (int k = 0; k < N; ++k) {
    if (decision.objective_table[static_cast<std::size_t>(k)] == inf) continue;
    if (best < 0 || decision.objective_table[static_cast<std::size_t>(k)] <
                        decision.objective_table[static_cast<std::size_t>(best)])
      best = k;
  }
  int chosen = best;
  if (decision.objective_table[static_cast<std::size_t>(incumbent)] != inf &&
      decision.objective_table[static_cast<std::size_t>(incumbent)] <=
          decision.objective_table[static_cast<std::size_t>(best)] + params.hysteresis)
    chosen = incumbent;

  decision.chosen_k = chosen;
  decision.u_star = solutions[static_cast<std::size_t>(chosen)].u;
  decision.delta_star = solutions[static_cast<std::size_t>(chosen)].delta;
  return decision;
}

// Full-team update. Gauss-Seidel lets each robot see the rows committed by
// lower ids within the same sweep; the parallel schedule has everyone read
// the same matrix and commits all rows afterwards in id order.
inline std::pair<AllocationMatrix, std::vector<CateDecision>> allocation_sweep(
    const WorldSnapshot& world, const AllocationMatrix& allocation,
    const Params& params, WarmStartCache* cache = nullptr) {
  AllocationMatrix next = allocation;
  std::vector<CateDecision> decisions;
  decisions.reserve(world.robots.size());
  if (params.schedule == Schedule::GaussSeidel) {
    for (const auto& robot : world.robots) {
      CateDecision d = cate_step_robot(robot, world, next, params, cache);
      next.set_row(robot.id, d.chosen_k);
      decisions.push_back(std::move(d));
    }
  } else {
    for (const auto& robot : world.robots)
      decisions.push_back(cate_step_robot(robot, world, allocation, params, cache));
    for (const auto& d : decisions) next.set_row(d.robot_id, d.chosen_k);
  }
  return {next, decisions};
}

}  // namespace cate
