// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "mgem/constraints.hpp"
#include "mgem/metrics.hpp"
#include "mgem/mlp.hpp"
#include "mgem/taskgen.hpp"

namespace mgem {

struct TrainConfig {
  double lr = 0.1;
  std::size_t iters_per_task = 200;
  std::size_t batch_size = 16;
  std::size_t memory_per_task = 64;
  MethodSpec method;
  PartitionMode partition = PartitionMode::by_layer;
  std::uint64_t seed = 0;
  double solver_tol = kDefaultTolerance;
  std::size_t solver_max_iter = kDefaultMaxSweeps;
  /// A run is degraded when more than this fraction of constrained steps
  /// ended with an unconverged exact solve.
  double degraded_budget = 0.01;

  void validate() const;
};

struct StepTrace {
  std::size_t task = 0;       // 1-based descriptor
  std::size_t iteration = 0;  // 0-based within the task
  double fwd_inner = 0.0;     // <g_t, z>, g_t the minibatch gradient
  std::vector<double> bwd_inner;     // <g_s, z>, g_s on task s's full training set
  std::vector<double> memory_inner;  // <g^_s, z>, g^_s on task s's whole memory
  std::size_t constraints = 0;
  std::size_t solver_iterations = 0;
  double kkt_residual = 0.0;  // max over modules
  bool converged = true;
};

struct StepContext {
  std::size_t task = 0;
  std::size_t iteration = 0;
  const ParamVector& params;     // before the update
  const ParamVector& batch_grad;
  const ParamVector& direction;
  std::span<const EpisodicMemory> memories;
  std::span<const QpInstance> instances;
};

using StepObserver = std::function<void(const StepContext&)>;

struct RunOptions {
  bool trace = false;
  /// Called after the direction is computed and before the update.
  StepObserver observer;
  /// Tasks to train on; 0 means all.
  std::size_t max_tasks = 0;
};

struct RunResult {
  AccuracyMatrix accuracy;
  std::vector<StepTrace> traces;
  ParamVector final_params;
  std::size_t constrained_steps = 0;
  std::size_t unconverged_steps = 0;
  std::size_t dropped_rows = 0;
  bool degraded = false;
};

/// Sequential SGD over the stream with the configured projected update.
RunResult run(const TaskStream& stream, const MlpSpec& mlp, const TrainConfig& cfg,
              const RunOptions& options = {});

/// Memory strengths used by the grid search.
const std::vector<double>& default_q_grid();

/// Every method in `methods` paired with every q in `q_grid`, method-major.
std::vector<MethodSpec> make_grid(std::span<const MethodSpec> methods,
                                  std::span<const double> q_grid);

/// For every grid point trains tasks 1 and 2 and averages <g_1, z> and
/// <g_2, z> over the task-2 iterations. Grid points may run on `threads`
/// workers; rows come back in grid order.
std::vector<ParetoRow> pareto_sweep(const TaskStream& stream, const MlpSpec& mlp,
                                    const TrainConfig& base, std::span<const MethodSpec> grid,
                                    std::size_t threads = 1);

}  // namespace mgem
