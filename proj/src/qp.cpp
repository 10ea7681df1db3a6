// SPDX-License-Identifier: Apache-2.0
#include "mgem/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mgem/error.hpp"

namespace mgem {

namespace {

// Linear term of the dual in Gram form: f(v) = 1/2 v^T G v + lin^T v + 1/2 ||g||^2.
Eigen::VectorXd linear_term(const QpInstance& inst) {
  Eigen::VectorXd lin = inst.rows * inst.target;
  if (inst.form == DualForm::linear_regularized) lin -= inst.strength;
  return lin;
}

void check_rows_nondegenerate(const QpInstance& inst) {
  for (Eigen::Index k = 0; k < inst.rows.rows(); ++k) {
    if (inst.rows.row(k).squaredNorm() < kDegenerateRowNorm2) {
      throw Error(ErrorCode::solver, "constraint row " + std::to_string(k) +
                                         " is degenerate (squared norm below 1e-12); "
                                         "it must be dropped before solving");
    }
  }
}

double residual_from(const Eigen::VectorXd& v, const Eigen::VectorXd& lb,
                     const Eigen::VectorXd& grad) {
  double r = 0.0;
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    r = std::max(r, std::abs(std::min(v[k] - lb[k], grad[k])));
  }
  return r;
}

double gram_objective(const Eigen::MatrixXd& gram, const Eigen::VectorXd& lin, double constant,
                      const Eigen::VectorXd& v) {
  return 0.5 * v.dot(gram * v) + lin.dot(v) + constant;
}

DualSolution unconstrained(const QpInstance& inst) {
  DualSolution sol;
  sol.multipliers = Eigen::VectorXd(0);
  sol.direction = inst.target;
  sol.converged = true;
  return sol;
}

// Solves gram_FF x = rhs for the free set; returns false when singular.
bool solve_face(const Eigen::MatrixXd& gram, const Eigen::VectorXd& lin, const Eigen::VectorXd& lb,
                const std::vector<Eigen::Index>& free_set, Eigen::VectorXd& v_out) {
  const auto m = gram.rows();
  const auto nf = static_cast<Eigen::Index>(free_set.size());
  v_out = lb;
  if (nf == 0) return true;
  std::vector<char> is_free(static_cast<std::size_t>(m), 0);
  for (auto k : free_set) is_free[static_cast<std::size_t>(k)] = 1;
  Eigen::MatrixXd a(nf, nf);
  Eigen::VectorXd rhs(nf);
  for (Eigen::Index i = 0; i < nf; ++i) {
    const auto ki = free_set[static_cast<std::size_t>(i)];
    double r = -lin[ki];
    for (Eigen::Index j = 0; j < m; ++j) {
      if (!is_free[static_cast<std::size_t>(j)]) r -= gram(ki, j) * lb[j];
    }
    rhs[i] = r;
    for (Eigen::Index j = 0; j < nf; ++j) a(i, j) = gram(ki, free_set[static_cast<std::size_t>(j)]);
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  lu.setThreshold(1e-12);
  if (lu.rank() < nf) return false;
  const Eigen::VectorXd x = lu.solve(rhs);
  if (!x.allFinite()) return false;
  for (Eigen::Index i = 0; i < nf; ++i) v_out[free_set[static_cast<std::size_t>(i)]] = x[i];
  return true;
}

}  // namespace

void QpInstance::validate() const {
  if (rows.rows() > 0 && static_cast<std::size_t>(rows.cols()) != n()) {
    throw ShapeError("constraint rows have " + std::to_string(rows.cols()) +
                     " columns but target has length " + std::to_string(n()));
  }
  if (static_cast<std::size_t>(strength.size()) != m()) {
    throw ShapeError("strength has length " + std::to_string(strength.size()) + " but there are " +
                     std::to_string(m()) + " constraint rows");
  }
  if (!tags.empty() && tags.size() != m()) throw ShapeError("row tags do not match row count");
  if (!rows.allFinite() || !target.allFinite() || !strength.allFinite()) {
    throw Error(ErrorCode::invalid_argument, "QP instance contains non-finite values");
  }
  if (m() > 0 && strength.minCoeff() < 0.0) {
    throw Error(ErrorCode::invalid_argument, "strength must be entrywise non-negative");
  }
}

std::size_t drop_degenerate_rows(QpInstance& inst) {
  std::vector<Eigen::Index> keep;
  for (Eigen::Index k = 0; k < inst.rows.rows(); ++k) {
    if (inst.rows.row(k).squaredNorm() >= kDegenerateRowNorm2) keep.push_back(k);
  }
  const std::size_t dropped = inst.m() - keep.size();
  if (dropped == 0) return 0;
  Eigen::MatrixXd rows(static_cast<Eigen::Index>(keep.size()), inst.rows.cols());
  Eigen::VectorXd strength(static_cast<Eigen::Index>(keep.size()));
  std::vector<RowTag> tags;
  for (std::size_t i = 0; i < keep.size(); ++i) {
    rows.row(static_cast<Eigen::Index>(i)) = inst.rows.row(keep[i]);
    strength[static_cast<Eigen::Index>(i)] = inst.strength[keep[i]];
    if (!inst.tags.empty()) tags.push_back(inst.tags[static_cast<std::size_t>(keep[i])]);
  }
  inst.rows = std::move(rows);
  inst.strength = std::move(strength);
  inst.tags = std::move(tags);
  inst.dropped_rows += dropped;
  return dropped;
}

Eigen::VectorXd lower_bounds(const QpInstance& inst) {
  if (inst.form == DualForm::box_lower_bound) return inst.strength;
  return Eigen::VectorXd::Zero(static_cast<Eigen::Index>(inst.m()));
}

Eigen::VectorXd primal_direction(const QpInstance& inst, const Eigen::VectorXd& v) {
  if (inst.m() == 0) return inst.target;
  return inst.target + inst.rows.transpose() * v;
}

double dual_objective(const QpInstance& inst, const Eigen::VectorXd& v) {
  double f = 0.5 * primal_direction(inst, v).squaredNorm();
  if (inst.form == DualForm::linear_regularized && inst.m() > 0) f -= inst.strength.dot(v);
  return f;
}

Eigen::VectorXd dual_gradient(const QpInstance& inst, const Eigen::VectorXd& v) {
  if (inst.m() == 0) return Eigen::VectorXd(0);
  Eigen::VectorXd grad = inst.rows * primal_direction(inst, v);
  if (inst.form == DualForm::linear_regularized) grad -= inst.strength;
  return grad;
}

double kkt_residual(const QpInstance& inst, const Eigen::VectorXd& v) {
  if (static_cast<std::size_t>(v.size()) != inst.m()) {
    throw ShapeError("multiplier vector length does not match constraint count");
  }
  if (inst.m() == 0) return 0.0;
  return residual_from(v, lower_bounds(inst), dual_gradient(inst, v));
}

DualSolution solve_exact(const QpInstance& inst, double tol, std::size_t max_iter) {
  require(tol > 0.0, "solver tolerance must be positive");
  inst.validate();
  if (inst.m() == 0) return unconstrained(inst);
  check_rows_nondegenerate(inst);

  const Eigen::MatrixXd gram = inst.rows * inst.rows.transpose();
  const Eigen::VectorXd lin = linear_term(inst);
  const Eigen::VectorXd lb = lower_bounds(inst);
  const double constant = 0.5 * inst.target.squaredNorm();
  const auto m = gram.rows();

  constexpr std::size_t kPolishEvery = 5;

  DualSolution sol;
  Eigen::VectorXd v = lb;
  Eigen::VectorXd grad = gram * v + lin;
  double residual = residual_from(v, lb, grad);
  double objective = gram_objective(gram, lin, constant, v);

  std::size_t sweep = 0;
  while (residual > tol && sweep < max_iter) {
    ++sweep;
    for (Eigen::Index k = 0; k < m; ++k) {
      const double updated = std::max(lb[k], v[k] - grad[k] / gram(k, k));
      const double step = updated - v[k];
      if (step != 0.0) {
        v[k] = updated;
        grad += step * gram.col(k);
      }
    }
    // Clamped coordinates sit exactly on their bound, so the current face is
    // well defined for polishing.
    grad = gram * v + lin;
    residual = residual_from(v, lb, grad);
    objective = std::min(objective, gram_objective(gram, lin, constant, v));

    if (residual > tol && sweep % kPolishEvery == 0) {
      std::vector<Eigen::Index> free_set;
      for (Eigen::Index k = 0; k < m; ++k) {
        if (v[k] > lb[k]) free_set.push_back(k);
      }
      Eigen::VectorXd candidate;
      if (solve_face(gram, lin, lb, free_set, candidate) &&
          (candidate.array() >= lb.array()).all()) {
        const Eigen::VectorXd cand_grad = gram * candidate + lin;
        const double cand_residual = residual_from(candidate, lb, cand_grad);
        const double cand_objective = gram_objective(gram, lin, constant, candidate);
        if (cand_residual < residual && cand_objective <= objective) {
          v = candidate;
          grad = cand_grad;
          residual = cand_residual;
          objective = cand_objective;
        }
      }
    }
    sol.objective_history.push_back(gram_objective(gram, lin, constant, v));
  }

  sol.multipliers = v;
  sol.direction = primal_direction(inst, v);
  sol.iterations = sweep;
  sol.kkt_residual = residual;
  sol.converged = residual <= tol;
  return sol;
}

DualSolution solve_enumerate(const QpInstance& inst) {
  inst.validate();
  if (inst.m() == 0) return unconstrained(inst);
  if (inst.m() > kMaxEnumerateRows) {
    throw Error(ErrorCode::invalid_argument,
                "active-set enumeration supports at most 12 constraints, got " +
                    std::to_string(inst.m()));
  }
  check_rows_nondegenerate(inst);

  const Eigen::MatrixXd gram = inst.rows * inst.rows.transpose();
  const Eigen::VectorXd lin = linear_term(inst);
  const Eigen::VectorXd lb = lower_bounds(inst);
  const double constant = 0.5 * inst.target.squaredNorm();
  const auto m = gram.rows();
  const double scale = 1.0 + gram.cwiseAbs().maxCoeff() * (1.0 + lb.cwiseAbs().maxCoeff()) +
                       lin.cwiseAbs().maxCoeff();
  const double eps = 1e-9 * scale;

  bool found = false;
  double best_objective = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best;
  std::size_t visited = 0;
  const std::uint32_t n_sets = 1u << static_cast<unsigned>(m);
  for (std::uint32_t mask = 0; mask < n_sets; ++mask) {
    ++visited;
    std::vector<Eigen::Index> free_set;
    for (Eigen::Index k = 0; k < m; ++k) {
      if (mask & (1u << static_cast<unsigned>(k))) free_set.push_back(k);
    }
    Eigen::VectorXd v;
    if (!solve_face(gram, lin, lb, free_set, v)) continue;
    const Eigen::VectorXd grad = gram * v + lin;
    bool kkt = true;
    for (Eigen::Index k = 0; k < m && kkt; ++k) {
      const bool is_free = mask & (1u << static_cast<unsigned>(k));
      if (is_free) {
        kkt = v[k] >= lb[k] - eps;
      } else {
        kkt = grad[k] >= -eps;
      }
    }
    if (!kkt) continue;
    v = v.cwiseMax(lb);
    const double obj = gram_objective(gram, lin, constant, v);
    if (!found || obj < best_objective - 1e-12 * (1.0 + std::abs(best_objective))) {
      found = true;
      best_objective = obj;
      best = v;
    }
  }
  if (!found) throw Error(ErrorCode::solver, "active-set enumeration found no KKT point");

  DualSolution sol;
  sol.multipliers = best;
  sol.direction = primal_direction(inst, best);
  sol.iterations = visited;
  sol.kkt_residual = kkt_residual(inst, best);
  sol.converged = true;
  return sol;
}

DualSolution solve_approx(const QpInstance& inst) {
  inst.validate();
  if (inst.form != DualForm::box_lower_bound) {
    throw Error(ErrorCode::invalid_argument, "the approximate solver supports the box form only");
  }
  if (inst.m() == 0) return unconstrained(inst);

  const auto m = static_cast<Eigen::Index>(inst.m());
  Eigen::VectorXd v(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const double norm2 = inst.rows.row(k).squaredNorm();
    if (norm2 < kDegenerateRowNorm2) {
      throw Error(ErrorCode::solver, "approximate solver reached a degenerate row " +
                                         std::to_string(k) + "; rows must be dropped first");
    }
    const double nu = -inst.rows.row(k).dot(inst.target) / norm2;
    v[k] = std::max(nu, inst.strength[k]);
  }
  DualSolution sol;
  sol.multipliers = v;
  sol.direction = primal_direction(inst, v);
  sol.iterations = 1;
  sol.kkt_residual = kkt_residual(inst, v);
  sol.converged = true;
  return sol;
}

}  // namespace mgem
