#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "cate/constraints.hpp"
#include "cate/geometry.hpp"

namespace cate {

// min input_weight*||u - target||^2 + slack_weight*||delta||^2
// s.t. rows (a_u . u + slack_coef * delta_q <= rhs), delta >= 0.
struct QpProblem {
  int input_dim = 2;
  int slack_dim = 0;
  double input_weight = 1.0;
  double slack_weight = 1.0;
  Vec target;
  std::vector<ConstraintRow> rows;

  static QpProblem from_constraints(const ConstraintSet& set, double slack_weight,
                                    const Vec& target) {
    QpProblem p;
    p.input_dim = set.input_dim;
    p.slack_dim = set.slack_dim;
    p.slack_weight = slack_weight;
    p.target = target;
    p.rows = set.rows;
    return p;
  }
};

enum class QpStatus { Optimal, MaxIterations, InfeasibleDetected };

struct QpSolution {
  Vec u;
  std::vector<double> delta;
  double objective = 0.0;
  double kkt_residual = 0.0;
  QpStatus status = QpStatus::Optimal;
  int iterations = 0;
};

struct QpOptions {
  double tol = 1e-8;
  int max_iter = 200;
  // Test hook: records the objective after every accepted step.
  std::vector<double>* objective_trace = nullptr;
};

namespace qp_detail {

struct Dense {
  Eigen::MatrixXd A;   // one row per inequality a . x <= b
  Eigen::VectorXd b;
  Eigen::VectorXd h;   // diagonal of the quadratic form 1/2 x'Hx + g'x
  Eigen::VectorXd g;
  int dim = 0;
};

// Rows are the problem rows followed by the delta >= 0 bounds.
inline Dense densify(const QpProblem& p) {
  Dense d;
  d.dim = p.input_dim + p.slack_dim;
  const int m = static_cast<int>(p.rows.size()) + p.slack_dim;
  d.A = Eigen::MatrixXd::Zero(m, d.dim);
  d.b = Eigen::VectorXd::Zero(m);
  for (std::size_t r = 0; r < p.rows.size(); ++r) {
    const ConstraintRow& row = p.rows[r];
    for (int i = 0; i < p.input_dim; ++i) d.A(static_cast<int>(r), i) = row.coeff_u[i];
    if (row.slack_index >= 0)
      d.A(static_cast<int>(r), p.input_dim + row.slack_index) = row.slack_coefficient();
    d.b(static_cast<int>(r)) = row.rhs;
  }
  for (int q = 0; q < p.slack_dim; ++q) {
    d.A(static_cast<int>(p.rows.size()) + q, p.input_dim + q) = -1.0;
    d.b(static_cast<int>(p.rows.size()) + q) = 0.0;
  }
  d.h = Eigen::VectorXd::Zero(d.dim);
  d.g = Eigen::VectorXd::Zero(d.dim);
  for (int i = 0; i < p.input_dim; ++i) {
    d.h(i) = 2.0 * p.input_weight;
    d.g(i) = -2.0 * p.input_weight * p.target[i];
  }
  for (int q = 0; q < p.slack_dim; ++q) d.h(p.input_dim + q) = 2.0 * p.slack_weight;
  return d;
}

inline double objective_of(const Dense& d, const Eigen::VectorXd& x) {
  return 0.5 * x.dot(d.h.asDiagonal() * x) + d.g.dot(x);
}

inline bool feasible(const Dense& d, const Eigen::VectorXd& x, double tol) {
  for (int r = 0; r < d.A.rows(); ++r)
    if (d.A.row(r).dot(x) > d.b(r) + tol * (1.0 + std::abs(d.b(r)))) return false;
  return true;
}

struct AsResult {
  Eigen::VectorXd x;
  std::vector<int> working;
  bool optimal = false;
  int iterations = 0;
};

// Primal active-set iteration on a strictly convex diagonal-Hessian QP,
// starting from a feasible point. Deterministic: fixed traversal order,
// ties broken toward the lowest row index.
inline AsResult active_set(const Dense& d, Eigen::VectorXd x, const QpOptions& opt,
                           std::vector<double>* trace) {
  const int dim = d.dim;
  const int m = static_cast<int>(d.A.rows());
  std::vector<int> working;
  AsResult res;
  const double step_tol = 1e-11;

  for (int it = 0; it < opt.max_iter; ++it) {
    res.iterations = it + 1;

    // Direction: minimize the quadratic over the working-set null space.
    Eigen::VectorXd grad = d.h.asDiagonal() * x + d.g;
    Eigen::VectorXd p_dir = Eigen::VectorXd::Zero(dim);
    Eigen::MatrixXd At;  // dim x |W|
    if (working.empty()) {
      p_dir = -grad.cwiseQuotient(d.h);
    } else {
      At.resize(dim, static_cast<int>(working.size()));
      for (std::size_t w = 0; w < working.size(); ++w)
        At.col(static_cast<int>(w)) = d.A.row(working[w]).transpose();
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(At);
      qr.setThreshold(1e-10);
      const int rank = static_cast<int>(qr.rank());
      if (rank < dim) {
        Eigen::MatrixXd Q = qr.householderQ();
        Eigen::MatrixXd Z = Q.rightCols(dim - rank);
        Eigen::MatrixXd ZHZ = Z.transpose() * d.h.asDiagonal() * Z;
        Eigen::VectorXd y = ZHZ.llt().solve(-Z.transpose() * grad);
        p_dir = Z * y;
      }
    }

    if (p_dir.lpNorm<Eigen::Infinity>() <= step_tol) {
      // Stationary on the working set; check multiplier signs.
      if (working.empty()) {
        res.x = x;
        res.working = working;
        res.optimal = true;
        return res;
      }
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(At);
      qr.setThreshold(1e-10);
      Eigen::VectorXd lambda = qr.solve(-grad);
      int worst = -1;
      double worst_val = -opt.tol;
      for (std::size_t w = 0; w < working.size(); ++w) {
        if (lambda(static_cast<int>(w)) < worst_val) {
          worst_val = lambda(static_cast<int>(w));
          worst = static_cast<int>(w);
        }
      }
      if (worst < 0) {
        res.x = x;
        res.working = working;
        res.optimal = true;
        return res;
      }
      working.erase(working.begin() + worst);
      continue;
    }

    // Ratio test against rows outside the working set.
    double alpha = 1.0;
    int blocking = -1;
    for (int r = 0; r < m; ++r) {
      if (std::find(working.begin(), working.end(), r) != working.end()) continue;
      double ddir = d.A.row(r).dot(p_dir);
      if (ddir <= 1e-13) continue;
      double room = d.b(r) - d.A.row(r).dot(x);
      double a_r = std::max(room, 0.0) / ddir;
      if (a_r < alpha - 1e-15) {
        alpha = a_r;
        blocking = r;
      }
    }
    x += alpha * p_dir;
    if (trace) trace->push_back(objective_of(d, x));
    if (blocking >= 0) working.push_back(blocking);
  }
  res.x = x;
  res.working = working;
  res.optimal = false;
  return res;
}

// Re-solves the equality-constrained problem on the final working set so the
// returned point is stationary to machine precision rather than to the
// accumulated step tolerance.
inline void polish(const Dense& d, AsResult& res, double tol) {
  const int k = static_cast<int>(res.working.size());
  Eigen::VectorXd x;
  if (k == 0) {
    x = -d.g.cwiseQuotient(d.h);
  } else {
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(d.dim + k, d.dim + k);
    kkt.topLeftCorner(d.dim, d.dim) = d.h.asDiagonal();
    Eigen::VectorXd rhs(d.dim + k);
    rhs.head(d.dim) = -d.g;
    for (int w = 0; w < k; ++w) {
      kkt.block(d.dim + w, 0, 1, d.dim) = d.A.row(res.working[static_cast<std::size_t>(w)]);
      kkt.block(0, d.dim + w, d.dim, 1) =
          d.A.row(res.working[static_cast<std::size_t>(w)]).transpose();
      rhs(d.dim + w) = d.b(res.working[static_cast<std::size_t>(w)]);
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
    if (!lu.isInvertible()) return;
    Eigen::VectorXd sol = lu.solve(rhs);
    sol += lu.solve(rhs - kkt * sol);  // one refinement step
    x = sol.head(d.dim);
  }
  if (feasible(d, x, tol)) res.x = x;
}

}  // namespace qp_detail

// Max of primal violation, dual-feasibility violation, stationarity norm and
// complementarity gap, with least-squares multipliers on the active rows.
inline double kkt_residual(const QpProblem& p, const QpSolution& candidate) {
  qp_detail::Dense d = qp_detail::densify(p);
  Eigen::VectorXd x(d.dim);
  for (int i = 0; i < p.input_dim; ++i) x(i) = candidate.u[i];
  for (int q = 0; q < p.slack_dim; ++q) x(p.input_dim + q) = candidate.delta[static_cast<std::size_t>(q)];

  double primal = 0.0;
  std::vector<int> active;
  const double act_tol = 1e-6;
  for (int r = 0; r < d.A.rows(); ++r) {
    double resid = d.A.row(r).dot(x) - d.b(r);
    primal = std::max(primal, resid);
    if (std::abs(resid) <= act_tol * (1.0 + std::abs(d.b(r)))) active.push_back(r);
  }

  Eigen::VectorXd grad = d.h.asDiagonal() * x + d.g;
  double stationarity, dual = 0.0, comp = 0.0;
  if (active.empty()) {
    stationarity = grad.lpNorm<Eigen::Infinity>();
  } else {
    Eigen::MatrixXd At(d.dim, static_cast<int>(active.size()));
    for (std::size_t w = 0; w < active.size(); ++w)
      At.col(static_cast<int>(w)) = d.A.row(active[w]).transpose();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(At);
    qr.setThreshold(1e-10);
    Eigen::VectorXd lambda = qr.solve(-grad);
    stationarity = (grad + At * lambda).lpNorm<Eigen::Infinity>();
    for (std::size_t w = 0; w < active.size(); ++w) {
      dual = std::max(dual, -lambda(static_cast<int>(w)));
      double resid = d.A.row(active[w]).dot(x) - d.b(active[w]);
      comp = std::max(comp, std::abs(lambda(static_cast<int>(w)) * resid));
    }
  }
  return std::max({primal, stationarity, dual, comp});
}

inline QpSolution solve_qp(const QpProblem& p, const QpOptions& opt = {},
                           const QpSolution* warm = nullptr) {
  qp_detail::Dense d = qp_detail::densify(p);
  const int dim = d.dim;

  QpSolution sol;
  sol.u = Vec::zero(p.input_dim);
  sol.delta.assign(static_cast<std::size_t>(p.slack_dim), 0.0);

  // Feasible start: warm point, then completion from the target (slacks
  // raised to cover their rows), then a phase-1 restoration QP.
  Eigen::VectorXd x0(dim);
  bool have_start = false;
  if (warm && warm->u.n == p.input_dim &&
      static_cast<int>(warm->delta.size()) == p.slack_dim) {
    for (int i = 0; i < p.input_dim; ++i) x0(i) = warm->u[i];
    for (int q = 0; q < p.slack_dim; ++q)
      x0(p.input_dim + q) = std::max(warm->delta[static_cast<std::size_t>(q)], 0.0);
    have_start = qp_detail::feasible(d, x0, opt.tol);
  }
  if (!have_start) {
    for (int i = 0; i < p.input_dim; ++i) x0(i) = p.target[i];
    for (int q = 0; q < p.slack_dim; ++q) x0(p.input_dim + q) = 0.0;
    for (std::size_t r = 0; r < p.rows.size(); ++r) {
      const ConstraintRow& row = p.rows[r];
      if (row.slack_index < 0) continue;
      double lhs = 0.0;
      for (int i = 0; i < p.input_dim; ++i) lhs += row.coeff_u[i] * x0(i);
      double need = lhs - row.rhs;  // delta must reach this to satisfy the row
      int j = p.input_dim + row.slack_index;
      x0(j) = std::max(x0(j), need);
    }
    have_start = qp_detail::feasible(d, x0, opt.tol);
  }
  if (!have_start) {
    // Phase 1: minimize eps*||x - x0||^2 + ||s||^2 over rows relaxed by
    // s >= 0, re-centering a few rounds so the eps term cannot keep a
    // feasible problem away from s = 0.
    const int m0 = static_cast<int>(d.A.rows());
    const double eps = 1e-9;
    const double feas_tol = 1e2 * opt.tol * (1.0 + d.b.cwiseAbs().maxCoeff());
    auto worst_violation = [&](const Eigen::VectorXd& x) {
      double w = 0.0;
      for (int r = 0; r < m0; ++r) w = std::max(w, d.A.row(r).dot(x) - d.b(r));
      return w;
    };
    int ph_iterations = 0;
    for (int round = 0; round < 4 && worst_violation(x0) > feas_tol; ++round) {
      qp_detail::Dense ph;
      ph.dim = dim + m0;
      ph.A = Eigen::MatrixXd::Zero(2 * m0, ph.dim);
      ph.b = Eigen::VectorXd::Zero(2 * m0);
      ph.A.topLeftCorner(m0, dim) = d.A;
      ph.A.topRightCorner(m0, m0) = -Eigen::MatrixXd::Identity(m0, m0);
      ph.b.head(m0) = d.b;
      ph.A.bottomRightCorner(m0, m0) = -Eigen::MatrixXd::Identity(m0, m0);
      ph.h = Eigen::VectorXd::Constant(ph.dim, 2.0);
      ph.h.head(dim).setConstant(2.0 * eps);
      ph.g = Eigen::VectorXd::Zero(ph.dim);
      ph.g.head(dim) = -2.0 * eps * x0;
      Eigen::VectorXd y0(ph.dim);
      y0.head(dim) = x0;
      for (int r = 0; r < m0; ++r)
        y0(dim + r) = std::max(0.0, d.A.row(r).dot(x0) - d.b(r));
      qp_detail::AsResult ph_res = qp_detail::active_set(ph, y0, opt, nullptr);
      x0 = ph_res.x.head(dim);
      ph_iterations += ph_res.iterations;
    }
    double worst = worst_violation(x0);
    if (worst > feas_tol) {
      sol.status = QpStatus::InfeasibleDetected;
      for (int i = 0; i < p.input_dim; ++i) sol.u[i] = x0(i);
      for (int q = 0; q < p.slack_dim; ++q)
        sol.delta[static_cast<std::size_t>(q)] = x0(p.input_dim + q);
      sol.objective = qp_detail::objective_of(d, x0);
      sol.kkt_residual = worst;
      sol.iterations = ph_iterations;
      return sol;
    }
  }

  qp_detail::AsResult res = qp_detail::active_set(d, x0, opt, opt.objective_trace);
  if (res.optimal) qp_detail::polish(d, res, opt.tol);
  for (int i = 0; i < p.input_dim; ++i) sol.u[i] = res.x(i);
  for (int q = 0; q < p.slack_dim; ++q)
    sol.delta[static_cast<std::size_t>(q)] = std::max(0.0, res.x(p.input_dim + q));
  sol.iterations = res.iterations;
  sol.objective = p.input_weight * dot(sol.u - p.target, sol.u - p.target);
  for (double dq : sol.delta) sol.objective += p.slack_weight * dq * dq;
  sol.status = res.optimal ? QpStatus::Optimal : QpStatus::MaxIterations;
  sol.kkt_residual = kkt_residual(p, sol);
  if (sol.status == QpStatus::Optimal && sol.kkt_residual > opt.tol)
    sol.status = QpStatus::MaxIterations;
  return sol;
}

}  // namespace cate
