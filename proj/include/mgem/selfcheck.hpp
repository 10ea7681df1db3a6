// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "mgem/qp.hpp"

namespace mgem {

struct SuiteResult {
  std::string name;
  bool passed = false;
  std::size_t cases = 0;
  std::size_t failures = 0;
  std::string detail;
  double seconds = 0.0;
};

struct SelfcheckOptions {
  bool quick = false;
  /// Solver checked by the single-constraint suite. Replaceable so that a
  /// deliberately broken solver can be shown to fail.
  ApproxSolver approx = solve_approx;
};

/// Suites, in order:
///   oracle-equivalence        exact vs enumerated optimum, ||dz||_inf <= 1e-6
///   single-constraint         approx vs exact at m = 1, ||dz||_inf <= 1e-9
///   gradient-check            backprop vs central differences, rel err < 1e-5
///   block-separability        joint vs per-module solves, ||dz||_inf <= 1e-8
///   strength-ordering         p-mGEM >= memory strength >= GEM and
///                             d-mGEM >= gamma, slack 1e-7
SuiteResult check_oracle_equivalence(std::size_t cases);
SuiteResult check_single_constraint(std::size_t cases, const ApproxSolver& approx);
SuiteResult check_gradients(std::size_t cases);
SuiteResult check_block_separability(std::size_t cases);
SuiteResult check_strength_ordering(std::size_t cases);

std::vector<SuiteResult> run_selfcheck(const SelfcheckOptions& options);

}  // namespace mgem
