#include <cmath>

#include "cate/qp.hpp"
#include "cate/rng.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace cate;

namespace {

ConstraintRow make_row(Vec coeff, double rhs, int slack_index = -1) {
  ConstraintRow r;
  r.coeff_u = coeff;
  r.rhs = rhs;
  r.slack_index = slack_index;
  r.kind = slack_index >= 0 ? RowKind::PointConvergence : RowKind::InputFacet;
  return r;
}

QpProblem random_problem(SplitMix64& rng) {
  QpProblem p;
  p.input_dim = 2 + static_cast<int>(rng.next_below(2));
  p.slack_dim = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(5 - p.input_dim)));
  p.input_weight = 1.0;
  p.slack_weight = rng.uniform(0.5, 20.0);
  p.target = Vec::zero(p.input_dim);
  for (int i = 0; i < p.input_dim; ++i) p.target[i] = rng.uniform(-2, 2);
  int m = static_cast<int>(rng.next_below(7));
  for (int r = 0; r < m; ++r) {
    Vec a = Vec::zero(p.input_dim);
    for (int i = 0; i < p.input_dim; ++i) a[i] = rng.uniform(-1, 1);
    int slack = -1;
    if (p.slack_dim > 0 && rng.next_below(3) == 0)
      slack = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(p.slack_dim)));
    p.rows.push_back(make_row(a, rng.uniform(-1.5, 1.5), slack));
  }
  return p;
}

}  // namespace

TEST_CASE("unconstrained minimum sits at the target") {
  QpProblem p;
  p.input_dim = 2;
  p.target = Vec(1, 2);
  auto sol = solve_qp(p);
  CHECK(sol.status == QpStatus::Optimal);
  CHECK(sol.u[0] == doctest::Approx(1.0));
  CHECK(sol.u[1] == doctest::Approx(2.0));
  CHECK(sol.objective == doctest::Approx(0.0));
  CHECK(sol.kkt_residual <= 1e-8);
}

TEST_CASE("halfspace projection matches the hand KKT solution") {
  QpProblem p;
  p.input_dim = 2;
  p.target = Vec(1, 0);
  p.rows.push_back(make_row(Vec(1, 0), 0.0));  // u_x <= 0
  auto sol = solve_qp(p);
  CHECK(sol.status == QpStatus::Optimal);
  CHECK(sol.u[0] == doctest::Approx(0.0));
  CHECK(sol.u[1] == doctest::Approx(0.0));
  CHECK(sol.objective == doctest::Approx(1.0));
}

TEST_CASE("slack cost balances against input deviation") {
  // One convergence-style row: g.u - delta <= rhs with g=(1,0), rhs=-1,
  // target 0, c=100. Reduce to two variables (u_x, delta) and grid-search.
  QpProblem p;
  p.input_dim = 2;
  p.slack_dim = 1;
  p.slack_weight = 100.0;
  p.target = Vec(0, 0);
  p.rows.push_back(make_row(Vec(1, 0), -1.0, 0));
  auto sol = solve_qp(p);
  REQUIRE(sol.status == QpStatus::Optimal);

  double best = 1e100, best_u = 0, best_d = 0;
  for (double u = -1.5; u <= 0.5; u += 1e-3) {
    // minimal feasible delta for this u
    double dmin = std::max(0.0, u + 1.0);
    double obj = u * u + 100.0 * dmin * dmin;
    if (obj < best) {
      best = obj;
      best_u = u;
      best_d = dmin;
    }
  }
  CHECK(sol.objective == doctest::Approx(best).epsilon(1e-4));
  CHECK(sol.u[0] == doctest::Approx(best_u).epsilon(1e-2));
  CHECK(sol.delta[0] == doctest::Approx(best_d).epsilon(1e-2));
}

TEST_CASE("objective matches exhaustive active-set enumeration") {
  SplitMix64 rng(20240902);
  int solved = 0;
  for (int trial = 0; trial < 300; ++trial) {
    QpProblem p = random_problem(rng);
    auto oracle_obj = oracle::enumerate_qp_objective(p);
    auto sol = solve_qp(p);
    if (!oracle_obj.has_value()) {
      CHECK(sol.status == QpStatus::InfeasibleDetected);
      continue;
    }
    REQUIRE(sol.status == QpStatus::Optimal);
    CHECK(sol.objective == doctest::Approx(*oracle_obj).epsilon(1e-9).scale(1.0 + std::abs(*oracle_obj)));
    CHECK(std::abs(sol.objective - *oracle_obj) <= 1e-6 * (1.0 + std::abs(*oracle_obj)));
    CHECK(sol.kkt_residual <= 1e-8);
    ++solved;
  }
  CHECK(solved > 200);  // the generator rarely produces infeasible rows
}

TEST_CASE("solver is deterministic") {
  SplitMix64 rng(5150);
  for (int trial = 0; trial < 20; ++trial) {
    QpProblem p = random_problem(rng);
    auto a = solve_qp(p);
    auto b = solve_qp(p);
    CHECK(a.status == b.status);
    CHECK(a.objective == b.objective);  // bit-identical
    for (int i = 0; i < p.input_dim; ++i) CHECK(a.u[i] == b.u[i]);
    for (std::size_t q = 0; q < a.delta.size(); ++q) CHECK(a.delta[q] == b.delta[q]);
  }
}

TEST_CASE("objective never increases after a feasible start") {
  SplitMix64 rng(31337);
  for (int trial = 0; trial < 50; ++trial) {
    QpProblem p = random_problem(rng);
    std::vector<double> trace;
    QpOptions opt;
    opt.objective_trace = &trace;
    auto sol = solve_qp(p, opt);
    if (sol.status != QpStatus::Optimal) continue;
    for (std::size_t i = 1; i < trace.size(); ++i)
      CHECK(trace[i] <= trace[i - 1] + 1e-9 * (1.0 + std::abs(trace[i - 1])));
  }
}

TEST_CASE("primal infeasibility is detected on hand-built problems") {
  QpProblem p;
  p.input_dim = 2;
  p.target = Vec(0, 0);
  p.rows.push_back(make_row(Vec(1, 0), -1.0));   // u_x <= -1
  p.rows.push_back(make_row(Vec(-1, 0), -1.0));  // u_x >= 1
  auto sol = solve_qp(p);
  CHECK(sol.status == QpStatus::InfeasibleDetected);
}

TEST_CASE("kkt_residual grades candidate solutions") {
  QpProblem p;
  p.input_dim = 2;
  p.target = Vec(1, 2);
  auto sol = solve_qp(p);
  CHECK(kkt_residual(p, sol) <= 1e-12);

  auto perturbed = sol;
  perturbed.u[0] += 0.1;
  CHECK(kkt_residual(p, perturbed) > 0.01);

  // Feasible interior but suboptimal point.
  QpProblem q;
  q.input_dim = 2;
  q.target = Vec(1, 0);
  q.rows.push_back(make_row(Vec(1, 0), 5.0));
  QpSolution interior;
  interior.u = Vec(0.5, 0.5);
  CHECK(kkt_residual(q, interior) > 0.0);
}

TEST_CASE("warm start returns the same optimum") {
  SplitMix64 rng(8080);
  for (int trial = 0; trial < 30; ++trial) {
    QpProblem p = random_problem(rng);
    auto cold = solve_qp(p);
    if (cold.status != QpStatus::Optimal) continue;
    auto warm = solve_qp(p, {}, &cold);
    CHECK(warm.status == QpStatus::Optimal);
    CHECK(warm.objective == doctest::Approx(cold.objective).epsilon(1e-10));
  }
}
