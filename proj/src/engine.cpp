// SPDX-License-Identifier: Apache-2.0
#include "mgem/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <random>
#include <thread>

#include "mgem/error.hpp"
#include "mgem/rng.hpp"

namespace mgem {

void TrainConfig::validate() const {
  require(lr > 0.0 && std::isfinite(lr), "learning rate must be positive");
  require(iters_per_task >= 1, "iters_per_task must be at least 1");
  require(batch_size >= 1, "batch_size must be at least 1");
  require(memory_per_task >= 1, "memory_per_task must be at least 1");
  require(memory_per_task >= method.d_data, "memory_per_task must be at least d_data");
  require(method.d_param >= 1 && method.d_data >= 1, "module counts must be at least 1");
  require(solver_tol > 0.0, "solver tolerance must be positive");
  require(degraded_budget >= 0.0, "degraded budget must be non-negative");
}

namespace {

Dataset sample_batch(const Dataset& train, std::size_t batch, Rng& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, train.size() - 1);
  std::vector<std::size_t> idx(batch);
  for (auto& i : idx) i = pick(rng);
  return train.subset(idx);
}

Dataset sample_memory(const Dataset& train, std::size_t count, Rng& rng) {
  std::vector<std::size_t> idx(train.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(std::min(count, train.size()));
  std::sort(idx.begin(), idx.end());
  return train.subset(idx);
}

}  // namespace

RunResult run(const TaskStream& stream, const MlpSpec& mlp, const TrainConfig& cfg,
              const RunOptions& options) {
  cfg.validate();
  mlp.validate();
  require(stream.size() >= 1, "stream has no tasks");
  if (mlp.input_size() != stream.n_features || mlp.n_classes() != stream.n_classes) {
    throw ShapeError("network shape does not match the stream (" +
                     std::to_string(stream.n_features) + " features, " +
                     std::to_string(stream.n_classes) + " classes)");
  }
  const std::size_t n_tasks =
      options.max_tasks == 0 ? stream.size() : std::min(options.max_tasks, stream.size());

  const MethodSpec& method = cfg.method;
  const std::size_t d_param = (method.kind == MethodKind::p_mgem || method.kind == MethodKind::md_mgem)
                                  ? method.d_param
                                  : 1;
  MethodSpec build_method = method;
  build_method.d_param = d_param;
  if (method.kind == MethodKind::gem || method.kind == MethodKind::p_mgem) build_method.d_data = 1;
  const std::size_t d_data = build_method.d_data;

  ParamVector params = init_params(mlp, cfg.seed);
  const PartitionSpec partition = resolve_partition(params.layout_ptr(), cfg.partition, d_param);
  const MethodSpec memory_method{MethodKind::gem, 1, 1, 0.0, SolverKind::exact};

  RunResult result;
  result.accuracy = AccuracyMatrix(n_tasks);
  std::vector<EpisodicMemory> memories;

  for (std::size_t t = 0; t < n_tasks; ++t) {
    const Task& task = stream.tasks[t];
    Rng batch_rng = make_rng(cfg.seed, streams::for_task(streams::kBatch, t + 1));
    for (std::size_t it = 0; it < cfg.iters_per_task; ++it) {
      const Dataset batch = sample_batch(task.train, cfg.batch_size, batch_rng);
      const ParamVector g = loss_and_grad(params, mlp, batch).grad;

      std::vector<QpInstance> instances;
      std::vector<DualSolution> solutions;
      bool step_converged = true;
      std::size_t step_iterations = 0;
      double step_residual = 0.0;
      std::size_t step_constraints = 0;
      if (method.constrained() && !memories.empty()) {
        ++result.constrained_steps;
        instances = build_instances(build_method, partition, memories, g, params, mlp);
        for (const auto& inst : instances) {
          result.dropped_rows += inst.dropped_rows;
          step_constraints += inst.m();
          DualSolution sol = method.solver == SolverKind::exact
                                 ? solve_exact(inst, cfg.solver_tol, cfg.solver_max_iter)
                                 : solve_approx(inst);
          step_converged = step_converged && sol.converged;
          step_iterations += sol.iterations;
          step_residual = std::max(step_residual, sol.kkt_residual);
          solutions.push_back(std::move(sol));
        }
        if (!step_converged) ++result.unconverged_steps;
      }
      const ParamVector z = assemble_direction(partition, solutions, g);

      if (options.observer) {
        options.observer(StepContext{t + 1, it, params, g, z, memories, instances});
      }
      if (options.trace) {
        StepTrace tr;
        tr.task = t + 1;
        tr.iteration = it;
        tr.fwd_inner = g.data().dot(z.data());
        for (std::size_t s = 0; s < t; ++s) {
          tr.bwd_inner.push_back(
              loss_and_grad(params, mlp, stream.tasks[s].train).grad.data().dot(z.data()));
        }
        for (const auto& mg : memory_gradients(memory_method, memories, params, mlp)) {
          tr.memory_inner.push_back(mg.data().dot(z.data()));
        }
        tr.constraints = step_constraints;
        tr.solver_iterations = step_iterations;
        tr.kkt_residual = step_residual;
        tr.converged = step_converged;
        result.traces.push_back(std::move(tr));
      }

      params.data() -= cfg.lr * z.data();
      if (!params.all_finite()) {
        throw Error(ErrorCode::solver, "parameters became non-finite at task " +
                                           std::to_string(t + 1) + ", iteration " +
                                           std::to_string(it));
      }
    }

    if (method.constrained() && t + 1 < n_tasks) {
      Rng mem_rng = make_rng(cfg.seed, streams::for_task(streams::kMemory, t + 1));
      Dataset stored = sample_memory(task.train, cfg.memory_per_task, mem_rng);
      if (stored.size() < d_data) {
        throw Error(ErrorCode::invalid_argument, "task " + std::to_string(t + 1) +
                                                     " has fewer training samples than d_data");
      }
      memories.push_back(EpisodicMemory::create(
          task.descriptor, std::move(stored), d_data,
          derive_seed(cfg.seed, streams::for_task(streams::kMemorySplit, t + 1))));
    }

    for (std::size_t j = 0; j < n_tasks; ++j) {
      result.accuracy(t, j) = accuracy(params, mlp, stream.tasks[j].test);
    }
  }

  result.final_params = std::move(params);
  result.degraded = static_cast<double>(result.unconverged_steps) >
                    cfg.degraded_budget * static_cast<double>(result.constrained_steps);
  return result;
}

const std::vector<double>& default_q_grid() {
  static const std::vector<double> grid{0.0, 0.05, 0.1, 0.2, 0.3, 0.5, 0.8, 1.0};
  return grid;
}

std::vector<MethodSpec> make_grid(std::span<const MethodSpec> methods,
                                  std::span<const double> q_grid) {
  std::vector<MethodSpec> grid;
  for (const auto& m : methods) {
    for (double q : q_grid) {
      MethodSpec point = m;
      point.strength = q;
      grid.push_back(point);
    }
  }
  return grid;
}

std::vector<ParetoRow> pareto_sweep(const TaskStream& stream, const MlpSpec& mlp,
                                    const TrainConfig& base, std::span<const MethodSpec> grid,
                                    std::size_t threads) {
  if (stream.size() < 2) {
    throw Error(ErrorCode::invalid_argument, "pareto requires ≥ 2 tasks");
  }
  std::vector<ParetoRow> rows(grid.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (std::size_t i = next++; i < grid.size(); i = next++) {
      try {
        TrainConfig cfg = base;
        cfg.method = grid[i];
        RunOptions opts;
        opts.trace = true;
        opts.max_tasks = 2;
        const RunResult res = run(stream, mlp, cfg, opts);
        double bwd = 0.0;
        double fwd = 0.0;
        std::size_t count = 0;
        for (const auto& tr : res.traces) {
          if (tr.task != 2) continue;
          bwd += tr.bwd_inner.at(0);
          fwd += tr.fwd_inner;
          ++count;
        }
        rows[i] = ParetoRow{grid[i], base.seed, bwd / static_cast<double>(count),
                            fwd / static_cast<double>(count)};
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };

  const std::size_t n_workers = std::max<std::size_t>(1, std::min(threads, grid.size()));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return rows;
}

}  // namespace mgem
