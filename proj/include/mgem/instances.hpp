// SPDX-License-Identifier: Apache-2.0
#pragma once

// Seeded problem generators shared by the selfcheck command and the tests.

#include <cstdint>
#include <vector>

#include "mgem/constraints.hpp"
#include "mgem/mlp.hpp"
#include "mgem/qp.hpp"
#include "mgem/rng.hpp"

namespace mgem {

struct RandomQpOptions {
  std::size_t max_n = 8;
  std::size_t min_m = 0;
  std::size_t max_m = 3;
  std::vector<double> q_values{0.0, 0.1, 0.5};
  DualForm form = DualForm::box_lower_bound;
};

/// Gaussian rows and target; each strength drawn from q_values.
QpInstance random_qp(Rng& rng, const RandomQpOptions& options = {});

/// A small random network with real gradients: a current minibatch gradient
/// and per-past-task episodic memories drawn from shifted class blobs.
struct GradientCase {
  MlpSpec spec;
  ParamVector params;
  Dataset batch;
  ParamVector current_grad;
  std::vector<EpisodicMemory> memories;
};

struct GradientCaseOptions {
  std::size_t past_tasks = 1;
  std::size_t d_data = 1;
  std::size_t memory_size = 24;
  std::size_t batch_size = 10;
};

GradientCase make_gradient_case(std::uint64_t seed, const GradientCaseOptions& options);

/// Central differences of the mean loss, one coordinate at a time.
Eigen::VectorXd finite_difference_gradient(const ParamVector& params, const MlpSpec& spec,
                                           const Dataset& data, double step = 1e-5);

/// |a - b| / max(|a|, |b|, floor), largest over coordinates.
double max_relative_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                          double floor = 1e-4);

/// ||z_joint - [z_1, ..., z_D]||_inf for one seeded p-mGEM case, where the joint
/// QP stacks every module's constraints embedded in full-length rows.
double block_separability_deviation(std::uint64_t seed);

/// Inner products <g^_s, z> from exact solves of one seeded single-past-task
/// instance under the ordering hypotheses: gamma_s^d summing to at least
/// gamma_s (parameter modules) and min_d gamma_s^d >= gamma_s (memory splits).
struct OrderingCase {
  double gem = 0.0;
  double memory_strength = 0.0;
  double p_mgem = 0.0;
  double d_mgem = 0.0;
  double gamma = 0.0;  // memory strength of the single-constraint problem
  std::size_t p_modules = 0;
  std::size_t d_splits = 0;
  bool all_converged = true;
};

OrderingCase ordering_case(std::uint64_t seed);

}  // namespace mgem
