// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace mgem {

/// How `strength` enters the dual.
///  box_lower_bound:    min_v 1/2 ||C^T v + g||^2            s.t. v >= q
///  linear_regularized: min_v 1/2 ||C^T v + g||^2 - gamma^T v  s.t. v >= 0
/// The second is the exact dual of  min_z 1/2 ||z - g||^2  s.t. <c_k, z> >= gamma_k.
enum class DualForm { box_lower_bound, linear_regularized };

/// Where a constraint row came from.
struct RowTag {
  std::size_t task = 0;    // past task index (1-based descriptor)
  std::size_t split = 0;   // memory split index
  std::size_t module = 0;  // parameter module index
};

/// One dual QP. Row k of `rows` is the constraint gradient c_k (+g_s, not the
/// negated matrix), and the primal direction is z = g + rows^T v.
struct QpInstance {
  Eigen::MatrixXd rows;      // m x n
  Eigen::VectorXd target;    // g, length n
  Eigen::VectorXd strength;  // q or gamma, length m, entrywise >= 0
  DualForm form = DualForm::box_lower_bound;
  std::vector<RowTag> tags;  // empty or length m
  std::size_t dropped_rows = 0;

  std::size_t m() const { return static_cast<std::size_t>(rows.rows()); }
  std::size_t n() const { return static_cast<std::size_t>(target.size()); }

  /// Throws on shape mismatch, negative strength, or non-finite entries.
  void validate() const;
};

struct DualSolution {
  Eigen::VectorXd multipliers;  // v, length m
  Eigen::VectorXd direction;    // z = g + rows^T v
  std::size_t iterations = 0;
  double kkt_residual = 0.0;
  bool converged = false;
  /// Dual objective after each sweep (exact solver only).
  std::vector<double> objective_history;
};

/// Squared-norm threshold below which a constraint row is considered
/// degenerate and must be removed before solving.
inline constexpr double kDegenerateRowNorm2 = 1e-12;

/// Removes rows with ||c_k||^2 < kDegenerateRowNorm2 (and their strengths and
/// tags). Returns how many were removed and adds it to inst.dropped_rows.
std::size_t drop_degenerate_rows(QpInstance& inst);

/// Per-coordinate lower bounds: q for the box form, 0 for the regularized form.
Eigen::VectorXd lower_bounds(const QpInstance& inst);

/// Dual objective (including the constant 1/2 ||g||^2).
double dual_objective(const QpInstance& inst, const Eigen::VectorXd& v);

/// Gradient of the dual objective.
Eigen::VectorXd dual_gradient(const QpInstance& inst, const Eigen::VectorXd& v);

/// max_k |min(v_k - lb_k, d_k f(v))|; zero iff v is optimal.
double kkt_residual(const QpInstance& inst, const Eigen::VectorXd& v);

Eigen::VectorXd primal_direction(const QpInstance& inst, const Eigen::VectorXd& v);

inline constexpr double kDefaultTolerance = 1e-10;
inline constexpr std::size_t kDefaultMaxSweeps = 10000;

/// Cyclic projected coordinate descent on the dual. Each coordinate is
/// minimized exactly and clamped to its bound; every few sweeps the iterate is
/// polished by solving the unconstrained problem on its current face, accepted
/// only when it stays feasible. The dual objective never increases.
/// An unconverged result still holds a dual-feasible iterate.
DualSolution solve_exact(const QpInstance& inst, double tol = kDefaultTolerance,
                         std::size_t max_iter = kDefaultMaxSweeps);

/// Global optimum by enumerating all 2^m free sets (m <= 12).
/// Free sets are visited in increasing bitmask order; the first optimal one wins.
DualSolution solve_enumerate(const QpInstance& inst);

inline constexpr std::size_t kMaxEnumerateRows = 12;

/// Two-stage approximation: the unconstrained minimizer with the Gram matrix
/// replaced by its diagonal, nu = -diag(1/||c_k||^2) C g, then clamped to
/// v = max(nu, q). Box form only; one pass over the rows.
DualSolution solve_approx(const QpInstance& inst);

using ApproxSolver = std::function<DualSolution(const QpInstance&)>;

}  // namespace mgem
