// Independent reference implementations used only by the test suites.
// These deliberately avoid the library's solution paths: the QP oracle
// enumerates active sets instead of iterating, the gradient oracle uses
// central differences, the crossing oracle is the plain quadratic scan.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "cate/geometry.hpp"
#include "cate/qp.hpp"

namespace oracle {

// Global optimum of a strictly convex inequality QP by solving the
// equality-constrained problem for every subset of rows and keeping the
// best feasible result.
inline std::optional<double> enumerate_qp_objective(const cate::QpProblem& p) {
  const int dim = p.input_dim + p.slack_dim;
  const int m = static_cast<int>(p.rows.size()) + p.slack_dim;

  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, dim);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
  for (int r = 0; r < static_cast<int>(p.rows.size()); ++r) {
    for (int i = 0; i < p.input_dim; ++i) A(r, i) = p.rows[static_cast<std::size_t>(r)].coeff_u[i];
    if (p.rows[static_cast<std::size_t>(r)].slack_index >= 0)
      A(r, p.input_dim + p.rows[static_cast<std::size_t>(r)].slack_index) = -1.0;
    b(r) = p.rows[static_cast<std::size_t>(r)].rhs;
  }
  for (int q = 0; q < p.slack_dim; ++q) {
    A(static_cast<int>(p.rows.size()) + q, p.input_dim + q) = -1.0;
  }

  Eigen::VectorXd h(dim), g(dim);
  for (int i = 0; i < p.input_dim; ++i) {
    h(i) = 2.0 * p.input_weight;
    g(i) = -2.0 * p.input_weight * p.target[i];
  }
  for (int q = 0; q < p.slack_dim; ++q) {
    h(p.input_dim + q) = 2.0 * p.slack_weight;
    g(p.input_dim + q) = 0.0;
  }

  double best = std::numeric_limits<double>::infinity();
  bool found = false;

  std::vector<int> subset;
  std::function<void(int)> visit = [&](int start) {
    {
      const int k = static_cast<int>(subset.size());
      Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(dim + k, dim + k);
      kkt.topLeftCorner(dim, dim) = h.asDiagonal();
      Eigen::VectorXd rhs(dim + k);
      rhs.head(dim) = -g;
      for (int w = 0; w < k; ++w) {
        kkt.block(dim + w, 0, 1, dim) = A.row(subset[static_cast<std::size_t>(w)]);
        kkt.block(0, dim + w, dim, 1) = A.row(subset[static_cast<std::size_t>(w)]).transpose();
        rhs(dim + w) = b(subset[static_cast<std::size_t>(w)]);
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
      if (lu.isInvertible()) {
        Eigen::VectorXd x = lu.solve(rhs).head(dim);
        bool feas = true;
        for (int r = 0; r < m; ++r)
          if (A.row(r).dot(x) > b(r) + 1e-9 * (1.0 + std::abs(b(r)))) {
            feas = false;
            break;
          }
        if (feas) {
          double obj = 0.5 * x.dot(h.asDiagonal() * x) + g.dot(x);
          // shift to the ||u - target||^2 form
          obj += p.input_weight * cate::dot(p.target, p.target);
          if (obj < best) best = obj;
          found = true;
        }
      }
    }
    if (static_cast<int>(subset.size()) == dim) return;
    for (int r = start; r < m; ++r) {
      subset.push_back(r);
      visit(r + 1);
      subset.pop_back();
    }
  };
  visit(0);
  if (!found) return std::nullopt;
  return best;
}

// Central finite difference of a scalar field.
inline cate::Vec fd_gradient(const std::function<double(const cate::Vec&)>& f,
                             const cate::Vec& x, double h = 1e-6) {
  cate::Vec g = cate::Vec::zero(x.n);
  for (int i = 0; i < x.n; ++i) {
    cate::Vec hi = x, lo = x;
    hi[i] += h;
    lo[i] -= h;
    g[i] = (f(hi) - f(lo)) / (2.0 * h);
  }
  return g;
}

}  // namespace oracle
