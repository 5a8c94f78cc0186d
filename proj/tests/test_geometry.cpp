#include <cmath>

#include "cate/geometry.hpp"
#include "cate/rng.hpp"
#include "doctest.h"

using namespace cate;

namespace {

ScenarioSpec two_robot_spec(Vec a, Vec b) {
  ScenarioSpec s;
  s.dimension = a.n;
  s.robots = {{0, a, 0.0, Vec::zero(a.n)}, {1, b, 0.0, Vec::zero(a.n)}};
  s.formation.points = {a.n == 2 ? Vec(20, 0) : Vec(20, 0, 0),
                        a.n == 2 ? Vec(20, 5) : Vec(20, 5, 0)};
  s.formation.velocity.base = Vec::zero(a.n);
  s.formation.velocity.amplitude = Vec::zero(a.n);
  return s;
}

}  // namespace

TEST_CASE("neighbor_set membership at the sensing radius") {
  std::vector<RobotState> robots = {{0, Vec(0, 0), 0.0, Vec(0, 0)},
                                    {1, Vec(3, 0), 0.0, Vec(0, 0)}};
  auto n0 = neighbor_set(robots[0], robots, 4.0);
  CHECK(n0 == std::set<int>{1});

  std::vector<RobotState> lone = {{0, Vec(0, 0), 0.0, Vec(0, 0)}};
  CHECK(neighbor_set(lone[0], lone, 4.0).empty());

  robots[1].position = Vec(4.0001, 0);
  CHECK(neighbor_set(robots[0], robots, 4.0).empty());
}

TEST_CASE("neighbor_set is symmetric") {
  SplitMix64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    int N = 2 + static_cast<int>(rng.next_below(6));
    std::vector<RobotState> robots;
    for (int i = 0; i < N; ++i)
      robots.push_back({i, Vec(rng.uniform(-5, 5), rng.uniform(-5, 5)), 0.0, Vec(0, 0)});
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) {
        if (i == j) continue;
        bool ij = neighbor_set(robots[i], robots, 3.0).count(j) > 0;
        bool ji = neighbor_set(robots[j], robots, 3.0).count(i) > 0;
        CHECK(ij == ji);
      }
  }
}

TEST_CASE("validate_scenario reports A3 for close robots") {
  auto spec = two_robot_spec(Vec(0, 0), Vec(0.5, 0));
  auto report = validate_scenario(spec);
  REQUIRE_FALSE(report.ok());
  CHECK(report.violations[0].assumption == "A3");
}

TEST_CASE("validate_scenario accepts the column scenario geometry") {
  // Two obstacles, robots placed clear of them.
  ScenarioSpec s;
  s.dimension = 2;
  for (int i = 0; i < 4; ++i)
    s.robots.push_back({i, Vec(-4.0, 3.0 * i), 0.0, Vec(0, 0)});
  for (int i = 0; i < 4; ++i) s.formation.points.push_back(Vec(12.0, 2.0 * i));
  s.formation.velocity.base = Vec(0, 0);
  s.formation.velocity.amplitude = Vec(0, 0);
  s.obstacles = {{Vec(5, 0), 4.5, Vec(0, 0)}, {Vec(3, 17), 3.0, Vec(0, 0)}};
  auto report = validate_scenario(s);
  CHECK(report.ok());
}

TEST_CASE("validate_scenario reports A4 for obstructed start") {
  auto spec = two_robot_spec(Vec(0, 0), Vec(0, 10));
  spec.obstacles = {{Vec(5, 0), 4.5, Vec(0, 0)}};
  auto report = validate_scenario(spec);
  REQUIRE_FALSE(report.ok());
  CHECK(report.violations[0].assumption == "A4");  // clearance 5 < 1 + 4.5
}

TEST_CASE("validate_scenario distinguishes structural errors") {
  ScenarioSpec empty;
  empty.dimension = 2;
  CHECK_THROWS_AS(validate_scenario(empty), StructuralError);

  auto nan_spec = two_robot_spec(Vec(0, 0), Vec(10, 0));
  nan_spec.robots[0].position[0] = std::nan("");
  CHECK_THROWS_AS(validate_scenario(nan_spec), StructuralError);

  auto bad_dim = two_robot_spec(Vec(0, 0), Vec(10, 0));
  bad_dim.dimension = 4;
  CHECK_THROWS_AS(validate_scenario(bad_dim), StructuralError);

  auto mixed = two_robot_spec(Vec(0, 0), Vec(10, 0));
  mixed.robots[1].position = Vec(10, 0, 0);
  CHECK_THROWS_AS(validate_scenario(mixed), StructuralError);
}

TEST_CASE("validation ok implies independent pairwise rescan passes") {
  SplitMix64 rng(99);
  for (int trial = 0; trial < 30; ++trial) {
    int N = 2 + static_cast<int>(rng.next_below(5));
    ScenarioSpec s;
    s.dimension = 2;
    for (int i = 0; i < N; ++i)
      s.robots.push_back({i, Vec(rng.uniform(-20, 20), rng.uniform(-20, 20)), 0.0, Vec(0, 0)});
    for (int i = 0; i < N; ++i) s.formation.points.push_back(Vec(30.0 + 2.0 * i, 0.0));
    s.formation.velocity.base = Vec(0, 0);
    s.formation.velocity.amplitude = Vec(0, 0);
    if (rng.next_below(2) == 0)
      s.obstacles.push_back({Vec(rng.uniform(-20, 20), rng.uniform(-20, 20)),
                             rng.uniform(0.5, 3.0), Vec(0, 0)});
    auto report = validate_scenario(s);
    if (!report.ok()) continue;
    const double r = s.params.safe_radius;
    for (int i = 0; i < N; ++i) {
      for (int j = i + 1; j < N; ++j)
        CHECK(distance(s.robots[i].position, s.robots[j].position) > r);
      for (const auto& o : s.obstacles)
        CHECK(distance(s.robots[i].position, o.center) > r + o.radius);
    }
  }
}

TEST_CASE("allocation matrix rows stay one-hot and column sums diagnose permutations") {
  AllocationMatrix a(3);
  CHECK(a.is_permutation());
  a.set_row(1, 0);
  auto sums = a.column_sums();
  CHECK(sums == std::vector<int>{2, 0, 1});
  CHECK_FALSE(a.is_permutation());
}
