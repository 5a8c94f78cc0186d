#pragma once

#include <cmath>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <vector>

#include "cate/geometry.hpp"

namespace cate {

// Linear extended class-K function gamma(h) = gain * h.
struct ClassKFn {
  double gain = 1.0;
  double operator()(double h) const { return gain * h; }
};

// Task characterizing functions. Nonpositive means the task set is reached
// (point convergence) or the safety condition holds (avoidance).
inline double phi_point(const Vec& x, const Vec& desired) {
  return distance(x, desired);
}

inline double phi_robot(const Vec& x_i, const Vec& x_j, double safe_radius) {
  return safe_radius - distance(x_i, x_j);
}

inline double phi_obstacle(const Vec& x, const Obstacle& obs,
                           double safe_radius) {
  return safe_radius + obs.radius - distance(x, obs.center);
}

enum class PhiKind { PointConvergence, RobotAvoidance, ObstacleAvoidance };

// Unit gradient of the characterizing function with respect to the robot
// position. Empty when x coincides with the anchor; for point convergence
// the caller substitutes zero (the task is complete), for avoidance that
// situation is an invariant breach.
inline std::optional<Vec> grad_phi(PhiKind kind, const Vec& x,
                                   const Vec& anchor) {
  Vec diff = x - anchor;
  double d = norm(diff);
  if (d < 1e-12) return std::nullopt;
  Vec unit = diff * (1.0 / d);
  if (kind == PhiKind::PointConvergence) return unit;
  return unit * -1.0;
}

enum class RowKind { PointConvergence, RobotAvoidance, ObstacleAvoidance, InputFacet };

// One affine inequality: coeff_u . u - [slack] <= rhs, where the slack term
// is present (coefficient -1) exactly on point-convergence rows.
struct ConstraintRow {
  Vec coeff_u;
  int slack_index = -1;  // index into the delta vector, -1 for none
  double rhs = 0.0;
  RowKind kind = RowKind::InputFacet;
  int ref = 0;  // desired-point / neighbor / obstacle / facet index

  double slack_coefficient() const { return slack_index >= 0 ? -1.0 : 0.0; }
};

struct ConstraintSet {
  std::vector<ConstraintRow> rows;
  int input_dim = 2;
  int slack_dim = 0;    // number of delta components (= N for CATE rows)
  int candidate_k = 0;  // the one-hot choice this set was assembled for
};

// Facet directions d_m with d_m . u <= offset approximating ||u|| <= u_max
// by an inscribed polytope, so the hard input limit is never exceeded.
struct InputFacets {
  std::vector<Vec> directions;
  double offset_scale = 1.0;  // offset = offset_scale * u_max
};

namespace detail {

inline InputFacets make_facets_2d(int m = 16) {
  InputFacets f;
  f.directions.reserve(m);
  for (int j = 0; j < m; ++j) {
    double ang = 2.0 * M_PI * j / m;
    f.directions.emplace_back(std::cos(ang), std::sin(ang));
  }
  f.offset_scale = std::cos(M_PI / m);
  return f;
}

inline Vec normalize3(const Vec& v) { return v * (1.0 / norm(v)); }

inline Vec cross3(const Vec& a, const Vec& b) {
  return Vec(a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
             a[0] * b[1] - a[1] * b[0]);
}

// 32 directions: each octahedron face split into four spherical triangles,
// one facet normal per triangle. The offset is scaled by the exact
// circumradius of the unit-offset polytope so the result is inscribed.
inline InputFacets make_facets_3d() {
  InputFacets f;
  for (int sx : {1, -1})
    for (int sy : {1, -1})
      for (int sz : {1, -1}) {
        Vec a(sx * 1.0, 0.0, 0.0), b(0.0, sy * 1.0, 0.0), c(0.0, 0.0, sz * 1.0);
        Vec mab = normalize3(a + b), mac = normalize3(a + c),
            mbc = normalize3(b + c);
        const std::array<std::array<Vec, 3>, 4> tris = {
            std::array<Vec, 3>{a, mab, mac}, std::array<Vec, 3>{mab, b, mbc},
            std::array<Vec, 3>{mac, mbc, c},
            std::array<Vec, 3>{mab, mbc, mac}};
        for (const auto& t : tris) {
          Vec n = cross3(t[1] - t[0], t[2] - t[0]);
          if (dot(n, t[0] + t[1] + t[2]) < 0.0) n *= -1.0;
          f.directions.push_back(normalize3(n));
        }
      }

  // Circumradius of {u : d.u <= 1} via vertex enumeration over facet triples.
  double rho = 0.0;
  const auto& ds = f.directions;
  const int M = static_cast<int>(ds.size());
  for (int i = 0; i < M; ++i)
    for (int j = i + 1; j < M; ++j)
      for (int k = j + 1; k < M; ++k) {
        const Vec &d1 = ds[i], &d2 = ds[j], &d3 = ds[k];
        double det = d1[0] * (d2[1] * d3[2] - d2[2] * d3[1]) -
                     d1[1] * (d2[0] * d3[2] - d2[2] * d3[0]) +
                     d1[2] * (d2[0] * d3[1] - d2[1] * d3[0]);
        if (std::abs(det) < 1e-9) continue;
        // Cramer solve of [d1;d2;d3] u = 1.
        auto solve = [&](int col) {
          Vec c1 = d1, c2 = d2, c3 = d3;
          c1[col] = c2[col] = c3[col] = 1.0;
          return c1[0] * (c2[1] * c3[2] - c2[2] * c3[1]) -
                 c1[1] * (c2[0] * c3[2] - c2[2] * c3[0]) +
                 c1[2] * (c2[0] * c3[1] - c2[1] * c3[0]);
        };
        Vec u(solve(0) / det, solve(1) / det, solve(2) / det);
        bool inside = true;
        for (const auto& d : ds)
          if (dot(d, u) > 1.0 + 1e-9) {
            inside = false;
            break;
          }
        if (inside) rho = std::max(rho, norm(u));
      }
  f.offset_scale = 1.0 / rho;
  return f;
}

}  // namespace detail

inline const InputFacets& input_facets(int dim) {
  static const InputFacets f2 = detail::make_facets_2d();
  static const InputFacets f3 = detail::make_facets_3d();
  return dim == 2 ? f2 : f3;
}

// World data needed to assemble one robot's rows at one instant.
struct WorldSnapshot {
  std::vector<RobotState> robots;
  std::vector<Vec> desired_points;
  std::vector<Obstacle> obstacles;
};

// Assembles the linearized rows of the per-robot optimization for a given
// candidate assignment k: N point-convergence rows with slack (penalty
// relief on q != k), one row per sensing neighbor, one per obstacle (known
// obstacle velocity folded in), and the input facets.
inline ConstraintSet build_constraints(const RobotState& robot,
                                       const WorldSnapshot& world,
                                       const Params& params, int candidate_k) {
  const int N = static_cast<int>(world.desired_points.size());
  if (candidate_k < 0 || candidate_k >= N)
    throw std::invalid_argument("candidate_k out of range");
  const int n = robot.position.n;
  const ClassKFn gamma{params.gamma_gain};
  const Vec& vhat = robot.velocity_estimate;

  ConstraintSet set;
  set.input_dim = n;
  set.slack_dim = N;
  set.candidate_k = candidate_k;

  for (int q = 0; q < N; ++q) {
    const Vec& xd = world.desired_points[q];
    double phi = phi_point(robot.position, xd);
    Vec grad = grad_phi(PhiKind::PointConvergence, robot.position, xd)
                   .value_or(Vec::zero(n));
    ConstraintRow row;
    row.coeff_u = grad;
    row.slack_index = q;
    row.rhs = dot(grad, vhat) - gamma(phi) + (q == candidate_k ? 0.0 : params.penalty);
    row.kind = RowKind::PointConvergence;
    row.ref = q;
    set.rows.push_back(row);
  }

  auto neighbors = neighbor_set(robot, world.robots, params.sensing_radius);
  for (int j : neighbors) {
    const Vec& xj = world.robots[static_cast<std::size_t>(j)].position;
    auto grad = grad_phi(PhiKind::RobotAvoidance, robot.position, xj);
    if (!grad)
      throw std::runtime_error("coincident robot centers: avoidance gradient singular");
    double phi = phi_robot(robot.position, xj, params.safe_radius);
    ConstraintRow row;
    row.coeff_u = *grad;
    row.rhs = dot(*grad, vhat) - gamma(phi);
    row.kind = RowKind::RobotAvoidance;
    row.ref = j;
    set.rows.push_back(row);
  }

  for (std::size_t l = 0; l < world.obstacles.size(); ++l) {
    const Obstacle& obs = world.obstacles[l];
    auto grad = grad_phi(PhiKind::ObstacleAvoidance, robot.position, obs.center);
    if (!grad)
      throw std::runtime_error("robot at obstacle center: avoidance gradient singular");
    double phi = phi_obstacle(robot.position, obs, params.safe_radius);
    ConstraintRow row;
    row.coeff_u = *grad;
    row.rhs = dot(*grad, vhat + obs.velocity) - gamma(phi);
    row.kind = RowKind::ObstacleAvoidance;
    row.ref = static_cast<int>(l);
    set.rows.push_back(row);
  }

  const InputFacets& facets = input_facets(n);
  for (std::size_t m = 0; m < facets.directions.size(); ++m) {
    ConstraintRow row;
    row.coeff_u = facets.directions[m];
    row.rhs = facets.offset_scale * params.u_max;
    row.kind = RowKind::InputFacet;
    row.ref = static_cast<int>(m);
    set.rows.push_back(row);
  }
  return set;
}

}  // namespace cate
