#include <cmath>

#include "cate/constraints.hpp"
#include "cate/rng.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace cate;

TEST_CASE("characterizing function values") {
  CHECK(phi_point(Vec(1, 1), Vec(1, 1)) == 0.0);
  CHECK(phi_point(Vec(3, 4), Vec(0, 0)) == doctest::Approx(5.0));
  CHECK(phi_point(Vec(1, 1, 1), Vec(0, 0, 0)) == doctest::Approx(std::sqrt(3.0)));

  CHECK(phi_robot(Vec(0, 0), Vec(2, 0), 1.0) == doctest::Approx(-1.0));
  CHECK(phi_robot(Vec(0, 0), Vec(0, 0), 1.0) == doctest::Approx(1.0));
  CHECK(phi_robot(Vec(0, 0), Vec(1, 0), 1.0) == doctest::Approx(0.0));

  Obstacle first{Vec(5, 0), 4.5, Vec(0, 0)};
  CHECK(phi_obstacle(Vec(0, 0), first, 1.0) == doctest::Approx(0.5));
  Obstacle second{Vec(3, 17), 3.0, Vec(0, 0)};
  CHECK(phi_obstacle(Vec(3, 13), second, 1.0) == doctest::Approx(0.0));
  Obstacle far_obs{Vec(100, 0), 2.0, Vec(0, 0)};
  CHECK(phi_obstacle(Vec(0, 0), far_obs, 1.0) < 0.0);
}

TEST_CASE("gradients are unit vectors with the documented signs") {
  auto g = grad_phi(PhiKind::PointConvergence, Vec(3, 0), Vec(0, 0));
  REQUIRE(g.has_value());
  CHECK((*g)[0] == doctest::Approx(1.0));
  CHECK((*g)[1] == doctest::Approx(0.0));

  auto go = grad_phi(PhiKind::ObstacleAvoidance, Vec(0, 0), Vec(5, 0));
  REQUIRE(go.has_value());
  CHECK((*go)[0] == doctest::Approx(1.0));
  CHECK((*go)[1] == doctest::Approx(0.0));

  CHECK_FALSE(grad_phi(PhiKind::PointConvergence, Vec(1, 2), Vec(1, 2)).has_value());
}

TEST_CASE("gradients match central finite differences") {
  SplitMix64 rng(12345);
  int checked = 0;
  while (checked < 500) {
    Vec x(rng.uniform(-10, 10), rng.uniform(-10, 10));
    Vec anchor(rng.uniform(-10, 10), rng.uniform(-10, 10));
    if (distance(x, anchor) < 1e-3) continue;
    ++checked;

    auto gp = grad_phi(PhiKind::PointConvergence, x, anchor);
    Vec fd = oracle::fd_gradient(
        [&](const Vec& p) { return phi_point(p, anchor); }, x);
    CHECK(norm(*gp - fd) <= 1e-5);

    auto gr = grad_phi(PhiKind::RobotAvoidance, x, anchor);
    fd = oracle::fd_gradient(
        [&](const Vec& p) { return phi_robot(p, anchor, 1.0); }, x);
    CHECK(norm(*gr - fd) <= 1e-5);

    Obstacle obs{anchor, 2.0, Vec(0, 0)};
    auto gob = grad_phi(PhiKind::ObstacleAvoidance, x, anchor);
    fd = oracle::fd_gradient(
        [&](const Vec& p) { return phi_obstacle(p, obs, 1.0); }, x);
    CHECK(norm(*gob - fd) <= 1e-5);
  }
}

TEST_CASE("input facets stay inside the input ball") {
  for (int dim : {2, 3}) {
    const auto& f = input_facets(dim);
    CHECK(f.directions.size() == (dim == 2 ? 16u : 32u));
    CHECK(f.offset_scale > 0.0);
    CHECK(f.offset_scale <= 1.0);
    for (const auto& d : f.directions) CHECK(norm(d) == doctest::Approx(1.0));
  }
  // 2D closed form: a regular 16-gon inscribed in the circle.
  CHECK(input_facets(2).offset_scale == doctest::Approx(std::cos(M_PI / 16)));
}

namespace {

WorldSnapshot single_robot_world(const Vec& x, const Vec& xd) {
  WorldSnapshot w;
  w.robots = {{0, x, 0.0, Vec::zero(x.n)}};
  w.desired_points = {xd};
  return w;
}

}  // namespace

TEST_CASE("build_constraints for one robot at its desired point") {
  WorldSnapshot w = single_robot_world(Vec(2, 3), Vec(2, 3));
  Params params;
  auto set = build_constraints(w.robots[0], w, params, 0);
  REQUIRE(set.rows.size() == 1 + 16);  // one convergence row + 2D facets
  const auto& row = set.rows[0];
  CHECK(row.kind == RowKind::PointConvergence);
  CHECK(row.slack_index == 0);
  CHECK(row.rhs == doctest::Approx(0.0));  // gamma(0) = 0, zero gradient
  CHECK(norm(row.coeff_u) == doctest::Approx(0.0));
}

TEST_CASE("non-assigned convergence rows carry the penalty relief") {
  WorldSnapshot w;
  w.robots = {{0, Vec(0, 0), 0.0, Vec(0, 0)}, {1, Vec(30, 0), 0.0, Vec(0, 0)}};
  w.desired_points = {Vec(10, 0), Vec(10, 5)};
  Params params;  // penalty 1000
  auto set = build_constraints(w.robots[0], w, params, 1);
  const auto& row_q0 = set.rows[0];
  const auto& row_q1 = set.rows[1];
  // rhs = grad.vhat - gamma(phi) + relief; vhat = 0 here.
  double phi0 = phi_point(Vec(0, 0), Vec(10, 0));
  double phi1 = phi_point(Vec(0, 0), Vec(10, 5));
  CHECK(row_q0.rhs == doctest::Approx(-phi0 + 1000.0));
  CHECK(row_q1.rhs == doctest::Approx(-phi1));
}

TEST_CASE("moving obstacle row equals the static row shifted by the obstacle velocity") {
  WorldSnapshot w = single_robot_world(Vec(0, 0), Vec(10, 0));
  w.robots[0].velocity_estimate = Vec(0.3, -0.1);
  Obstacle still{Vec(5, 1), 2.0, Vec(0, 0)};
  Obstacle moving{Vec(5, 1), 2.0, Vec(0.1, 0)};
  Params params;

  w.obstacles = {still};
  auto set_static = build_constraints(w.robots[0], w, params, 0);
  w.obstacles = {moving};
  auto set_moving = build_constraints(w.robots[0], w, params, 0);

  const auto& rs = set_static.rows[1];
  const auto& rm = set_moving.rows[1];
  REQUIRE(rs.kind == RowKind::ObstacleAvoidance);
  CHECK(norm(rs.coeff_u - rm.coeff_u) == doctest::Approx(0.0));
  CHECK(rm.rhs - rs.rhs == doctest::Approx(dot(rs.coeff_u, Vec(0.1, 0))));
}

TEST_CASE("coincident avoidance anchor is a hard error") {
  WorldSnapshot w = single_robot_world(Vec(5, 1), Vec(10, 0));
  w.obstacles = {{Vec(5, 1), 2.0, Vec(0, 0)}};
  Params params;
  CHECK_THROWS_AS(build_constraints(w.robots[0], w, params, 0),
                  std::runtime_error);
}

TEST_CASE("trivial input satisfies slack-free rows whenever safety holds") {
  SplitMix64 rng(4242);
  for (int trial = 0; trial < 200; ++trial) {
    WorldSnapshot w;
    int N = 2 + static_cast<int>(rng.next_below(3));
    for (int i = 0; i < N; ++i)
      w.robots.push_back(
          {i, Vec(rng.uniform(-10, 10), rng.uniform(-10, 10)), 0.0,
           Vec(rng.uniform(-1, 1), rng.uniform(-1, 1))});
    for (int k = 0; k < N; ++k)
      w.desired_points.push_back(Vec(rng.uniform(-10, 10), rng.uniform(-10, 10)));
    w.obstacles.push_back({Vec(rng.uniform(-10, 10), rng.uniform(-10, 10)),
                           rng.uniform(0.5, 2.0), Vec(rng.uniform(-0.3, 0.3), 0)});
    Params params;

    const auto& robot = w.robots[0];
    ConstraintSet set;
    try {
      set = build_constraints(robot, w, params, 0);
    } catch (const std::runtime_error&) {
      continue;  // coincident sample
    }
    for (const auto& row : set.rows) {
      if (row.kind == RowKind::RobotAvoidance) {
        double phi = phi_robot(robot.position,
                               w.robots[static_cast<std::size_t>(row.ref)].position,
                               params.safe_radius);
        if (phi <= 0.0)
          CHECK(dot(row.coeff_u, robot.velocity_estimate) <= row.rhs + 1e-12);
      }
      if (row.kind == RowKind::ObstacleAvoidance) {
        double phi = phi_obstacle(robot.position,
                                  w.obstacles[static_cast<std::size_t>(row.ref)],
                                  params.safe_radius);
        if (phi <= 0.0) {
          Vec sub = robot.velocity_estimate +
                    w.obstacles[static_cast<std::size_t>(row.ref)].velocity;
          CHECK(dot(row.coeff_u, sub) <= row.rhs + 1e-12);
        }
      }
    }
  }
}

TEST_CASE("explicit slack completion satisfies every convergence row") {
  SplitMix64 rng(777);
  for (int trial = 0; trial < 100; ++trial) {
    WorldSnapshot w;
    int N = 1 + static_cast<int>(rng.next_below(4));
    for (int i = 0; i < N; ++i)
      w.robots.push_back({i, Vec(rng.uniform(-10, 10), rng.uniform(-10, 10)), 0.0,
                          Vec(rng.uniform(-1, 1), rng.uniform(-1, 1))});
    for (int k = 0; k < N; ++k)
      w.desired_points.push_back(Vec(rng.uniform(-10, 10), rng.uniform(-10, 10)));
    Params params;
    int k = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(N)));
    auto set = build_constraints(w.robots[0], w, params, k);
    const Vec& u = w.robots[0].velocity_estimate;  // u = vhat
    for (const auto& row : set.rows) {
      if (row.kind != RowKind::PointConvergence) continue;
      double delta = std::max(0.0, dot(row.coeff_u, u) - row.rhs);
      CHECK(dot(row.coeff_u, u) - delta <= row.rhs + 1e-12);
    }
  }
}
