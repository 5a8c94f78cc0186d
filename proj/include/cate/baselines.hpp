#pragma once

#include <algorithm>
#include <limits>
#include <vector>

#include "cate/cate.hpp"
#include "cate/geometry.hpp"

namespace cate {

struct AssignmentResult {
  std::vector<int> permutation;  // robot index -> point index
  double total_cost = 0.0;
};

namespace baselines_detail {

// Jonker-Volgenant style shortest augmenting path on the squared-distance
// matrix. Exact for square cost matrices.
inline std::vector<int> solve_lap(const std::vector<std::vector<double>>& cost) {
  const int n = static_cast<int>(cost.size());
  std::vector<double> u(static_cast<std::size_t>(n) + 1), v(static_cast<std::size_t>(n) + 1);
  std::vector<int> p(static_cast<std::size_t>(n) + 1), way(static_cast<std::size_t>(n) + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(n) + 1,
                             std::numeric_limits<double>::infinity());
    std::vector<char> used(static_cast<std::size_t>(n) + 1, false);
    do {
      used[static_cast<std::size_t>(j0)] = true;
      int i0 = p[static_cast<std::size_t>(j0)], j1 = 0;
      double delta = std::numeric_limits<double>::infinity();
      for (int j = 1; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        double cur = cost[static_cast<std::size_t>(i0 - 1)][static_cast<std::size_t>(j - 1)] -
                     u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (p[static_cast<std::size_t>(j0)] != 0);
    do {
      int j1 = way[static_cast<std::size_t>(j0)];
      p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> rowsol(static_cast<std::size_t>(n), -1);
  for (int j = 1; j <= n; ++j)
    if (p[static_cast<std::size_t>(j)])
      rowsol[static_cast<std::size_t>(p[static_cast<std::size_t>(j)] - 1)] = j - 1;
  return rowsol;
}

inline double assignment_cost(const std::vector<std::vector<double>>& cost,
                              const std::vector<int>& perm) {
  double s = 0.0;
  for (std::size_t i = 0; i < perm.size(); ++i)
    s += cost[i][static_cast<std::size_t>(perm[i])];
  return s;
}

}  // namespace baselines_detail

// Minimal total squared-distance bijection robots -> points. Among optimal
// assignments the lexicographically smallest permutation is returned.
inline AssignmentResult hungarian_assign(const std::vector<Vec>& robots,
                                         const std::vector<Vec>& points) {
  const int n = static_cast<int>(robots.size());
  if (points.size() != robots.size())
    throw std::invalid_argument("hungarian_assign needs equal counts");
  std::vector<std::vector<double>> cost(static_cast<std::size_t>(n),
                                        std::vector<double>(static_cast<std::size_t>(n)));
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      Vec d = robots[static_cast<std::size_t>(i)] - points[static_cast<std::size_t>(k)];
      cost[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] = dot(d, d);
    }

  std::vector<int> opt = baselines_detail::solve_lap(cost);
  const double opt_cost = baselines_detail::assignment_cost(cost, opt);
  const double tie_tol = 1e-9 * (1.0 + std::abs(opt_cost));

  // Lexicographic tie-break: fix assignments row by row, taking the lowest
  // column that still admits an optimal completion of the remainder.
  std::vector<int> fixed(static_cast<std::size_t>(n), -1);
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  double fixed_cost = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) {
      if (used[static_cast<std::size_t>(k)]) continue;
      // Optimal completion over the remaining rows and columns.
      std::vector<int> rows, cols;
      for (int r = i + 1; r < n; ++r) rows.push_back(r);
      for (int c = 0; c < n; ++c)
        if (!used[static_cast<std::size_t>(c)] && c != k) cols.push_back(c);
      double completion = 0.0;
      if (!rows.empty()) {
        std::vector<std::vector<double>> sub(rows.size(),
                                             std::vector<double>(cols.size()));
        for (std::size_t a = 0; a < rows.size(); ++a)
          for (std::size_t bcol = 0; bcol < cols.size(); ++bcol)
            sub[a][bcol] = cost[static_cast<std::size_t>(rows[a])]
                               [static_cast<std::size_t>(cols[bcol])];
        completion = baselines_detail::assignment_cost(
            sub, baselines_detail::solve_lap(sub));
      }
      double total = fixed_cost +
                     cost[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] +
                     completion;
      if (total <= opt_cost + tie_tol) {
        fixed[static_cast<std::size_t>(i)] = k;
        used[static_cast<std::size_t>(k)] = true;
        fixed_cost += cost[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
        break;
      }
    }
  }

  AssignmentResult res;
  res.permutation = fixed;
  res.total_cost = baselines_detail::assignment_cost(cost, res.permutation);
  return res;
}

// Greedy nearest assignment: robots in id order pick the nearest unclaimed
// desired point.
inline AssignmentResult greedy_assign(const std::vector<Vec>& robots,
                                      const std::vector<Vec>& points) {
  const int n = static_cast<int>(robots.size());
  AssignmentResult res;
  res.permutation.assign(static_cast<std::size_t>(n), -1);
  std::vector<bool> taken(static_cast<std::size_t>(n), false);
  for (int i = 0; i < n; ++i) {
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (int k = 0; k < n; ++k) {
      if (taken[static_cast<std::size_t>(k)]) continue;
      Vec d = robots[static_cast<std::size_t>(i)] - points[static_cast<std::size_t>(k)];
      double dd = dot(d, d);
      if (dd < best_d) {
        best_d = dd;
        best = k;
      }
    }
    res.permutation[static_cast<std::size_t>(i)] = best;
    taken[static_cast<std::size_t>(best)] = true;
    res.total_cost += best_d;
  }
  return res;
}

// Fixed-ordering execution: the CATE QP layer driven by a single frozen
// candidate, no allocation enumeration.
inline CateDecision fote_step(const RobotState& robot, const WorldSnapshot& world,
                              const AllocationMatrix& fixed_allocation,
                              const Params& params,
                              WarmStartCache* cache = nullptr) {
  const int k = fixed_allocation.row(robot.id);
  QpSolution sol = cate_detail::solve_candidate(robot, world, params, k, cache);
  if (sol.status != QpStatus::Optimal)
    return cate_detail::fallback_decision(robot, world, params, k);
  CateDecision d;
  d.robot_id = robot.id;
  d.chosen_k = k;
  d.u_star = sol.u;
  d.delta_star = sol.delta;
  d.objective_table.assign(world.desired_points.size(),
                           std::numeric_limits<double>::infinity());
  d.objective_table[static_cast<std::size_t>(k)] = sol.objective;
  return d;
}

// CAPT-style baseline: one-shot (or periodically refreshed) minimal
// squared-distance assignment executed through the same QP layer.
inline CateDecision capt_assign_step(const RobotState& robot,
                                     const WorldSnapshot& world,
                                     const AllocationMatrix& assignment,
                                     const Params& params,
                                     WarmStartCache* cache = nullptr) {
  return fote_step(robot, world, assignment, params, cache);
}

}  // namespace cate
