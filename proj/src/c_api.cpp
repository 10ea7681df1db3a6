// SPDX-License-Identifier: Apache-2.0
#include "mgem/mgem.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <map>
#include <new>
#include <string>

#include "mgem/config.hpp"
#include "mgem/engine.hpp"
#include "mgem/error.hpp"
#include "mgem/metrics.hpp"
#include "mgem/qp.hpp"
#include "mgem/selfcheck.hpp"
#include "mgem/taskgen.hpp"

struct mgem_config {
  mgem::RunConfig value;
};

namespace {

thread_local std::string last_error;

mgem_status status_of(mgem::ErrorCode code) {
  switch (code) {
    case mgem::ErrorCode::invalid_argument: return MGEM_ERR_INVALID_ARGUMENT;
    case mgem::ErrorCode::shape: return MGEM_ERR_SHAPE;
    case mgem::ErrorCode::config: return MGEM_ERR_CONFIG;
    case mgem::ErrorCode::io: return MGEM_ERR_IO;
    case mgem::ErrorCode::parse: return MGEM_ERR_PARSE;
    case mgem::ErrorCode::solver: return MGEM_ERR_SOLVER;
  }
  return MGEM_ERR_INTERNAL;
}

template <class Fn>
mgem_status guarded(Fn&& fn) {
  last_error.clear();
  try {
    return fn();
  } catch (const mgem::Error& e) {
    last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return MGEM_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return MGEM_ERR_INTERNAL;
  }
}

mgem_status fail(mgem_status status, const char* what) {
  last_error = what;
  return status;
}

std::filesystem::path prepare_output_dir(const mgem::RunConfig& cfg,
                                         const mgem_run_options* options) {
  const std::string dir =
      options && options->out_dir ? std::string(options->out_dir) : cfg.output_dir;
  if (dir.empty()) throw mgem::ConfigError("output.dir", "must not be empty");
  const std::filesystem::path path(dir);
  std::error_code ec;
  if (std::filesystem::is_directory(path, ec)) return path;
  if (std::filesystem::exists(path, ec)) {
    throw mgem::ConfigError("output.dir", "'" + dir + "' exists and is not a directory");
  }
  std::filesystem::path parent = path.parent_path();
  if (parent.empty()) parent = ".";
  if (!std::filesystem::is_directory(parent, ec)) {
    throw mgem::ConfigError("output.dir",
                            "parent of '" + dir + "' does not exist");
  }
  if (!std::filesystem::create_directory(path, ec) && ec) {
    throw mgem::Error(mgem::ErrorCode::io, "cannot create '" + dir + "': " + ec.message());
  }
  return path;
}

std::uint32_t replicates(const mgem_run_options* options) {
  return options && options->seeds > 0 ? options->seeds : 1;
}

struct Replicate {
  mgem::TaskStream stream;
  mgem::MlpSpec mlp;
  mgem::TrainConfig train;
};

Replicate make_replicate(const mgem::RunConfig& cfg, std::uint32_t k) {
  mgem::StreamSpec spec = cfg.stream;
  spec.seed += k;
  Replicate r{mgem::generate(spec), {}, cfg.train};
  r.mlp = cfg.model_for(r.stream);
  r.train.seed += k;
  return r;
}

}  // namespace

extern "C" {

const char* mgem_version(void) { return "0.1.0"; }

const char* mgem_last_error(void) { return last_error.c_str(); }

mgem_status mgem_config_default(mgem_config** out) {
  if (!out) return fail(MGEM_ERR_INVALID_ARGUMENT, "out is null");
  return guarded([&] {
    *out = new mgem_config{mgem::default_config()};
    return MGEM_OK;
  });
}

mgem_status mgem_config_parse(const char* text, mgem_config** out) {
  if (!text || !out) return fail(MGEM_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    *out = new mgem_config{mgem::parse_config(text)};
    return MGEM_OK;
  });
}

mgem_status mgem_config_load(const char* path, mgem_config** out) {
  if (!path || !out) return fail(MGEM_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    *out = new mgem_config{mgem::load_config(path)};
    return MGEM_OK;
  });
}

mgem_status mgem_config_serialize(const mgem_config* cfg, char** out) {
  if (!cfg || !out) return fail(MGEM_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    const std::string text = mgem::serialize_config(cfg->value);
    char* buf = static_cast<char*>(std::malloc(text.size() + 1));
    if (!buf) throw std::bad_alloc();
    std::memcpy(buf, text.c_str(), text.size() + 1);
    *out = buf;
    return MGEM_OK;
  });
}

const char* mgem_config_output_dir(const mgem_config* cfg) {
  return cfg ? cfg->value.output_dir.c_str() : nullptr;
}

size_t mgem_config_task_count(const mgem_config* cfg) {
  return cfg ? cfg->value.stream.n_tasks : 0;
}

void mgem_config_free(mgem_config* cfg) { delete cfg; }

void mgem_string_free(char* s) { std::free(s); }

mgem_status mgem_run(const mgem_config* cfg, const mgem_run_options* options,
                     mgem_report* report) {
  if (!cfg) return fail(MGEM_ERR_INVALID_ARGUMENT, "config is null");
  return guarded([&] {
    const auto& c = cfg->value;
    if (c.methods.empty()) throw mgem::ConfigError("methods", "no methods configured");
    const auto dir = prepare_output_dir(c, options);
    const std::uint32_t n_seeds = replicates(options);

    std::map<std::uint32_t, Replicate> reps;
    for (std::uint32_t k = 0; k < n_seeds; ++k) reps.emplace(k, make_replicate(c, k));

    std::vector<mgem::SummaryRow> summaries;
    std::vector<mgem::RMatrixRecord> matrices;
    std::size_t degraded = 0;
    for (const auto& method : c.methods) {
      for (std::uint32_t k = 0; k < n_seeds; ++k) {
        const Replicate& r = reps.at(k);
        mgem::TrainConfig train = r.train;
        train.method = method;
        const mgem::RunResult res = mgem::run(r.stream, r.mlp, train);
        if (res.degraded) ++degraded;
        summaries.push_back(
            {method, train.seed, mgem::summarize(res.accuracy), res.unconverged_steps});
        matrices.push_back({method, train.seed, res.accuracy});
      }
    }
    mgem::write_reports(dir, summaries, matrices);
    if (report) *report = mgem_report{summaries.size(), degraded};
    if (degraded > 0) {
      last_error = std::to_string(degraded) +
                   " run(s) exceeded the unconverged-solve budget (train.degraded_budget)";
      return MGEM_ERR_SOLVER;
    }
    return MGEM_OK;
  });
}

mgem_status mgem_pareto(const mgem_config* cfg, const mgem_run_options* options,
                        mgem_report* report) {
  if (!cfg) return fail(MGEM_ERR_INVALID_ARGUMENT, "config is null");
  return guarded([&] {
    const auto& c = cfg->value;
    if (c.stream.family != mgem::StreamFamily::csv && c.stream.n_tasks < 2) {
      throw mgem::Error(mgem::ErrorCode::invalid_argument, "pareto requires ≥ 2 tasks");
    }
    if (c.methods.empty()) throw mgem::ConfigError("methods", "no methods configured");
    if (c.q_grid.empty()) throw mgem::ConfigError("methods.q_grid", "empty grid");
    const auto dir = prepare_output_dir(c, options);
    const std::uint32_t n_seeds = replicates(options);
    const std::size_t threads = options && options->threads > 0 ? options->threads : 1;
    const auto grid = mgem::make_grid(c.methods, c.q_grid);

    std::vector<mgem::ParetoRow> rows;
    for (std::uint32_t k = 0; k < n_seeds; ++k) {
      const Replicate r = make_replicate(c, k);
      auto part = mgem::pareto_sweep(r.stream, r.mlp, r.train, grid, threads);
      rows.insert(rows.end(), part.begin(), part.end());
    }
    mgem::write_pareto_report(dir, rows);
    if (report) *report = mgem_report{rows.size(), 0};
    return MGEM_OK;
  });
}

mgem_status mgem_selfcheck(int quick, mgem_suite_callback callback, void* user,
                           int* all_passed) {
  return guarded([&] {
    mgem::SelfcheckOptions opts;
    opts.quick = quick != 0;
    bool ok = true;
    for (const auto& s : mgem::run_selfcheck(opts)) {
      ok = ok && s.passed;
      if (callback) {
        callback(s.name.c_str(), s.passed ? 1 : 0, s.cases, s.failures, s.detail.c_str(),
                 s.seconds, user);
      }
    }
    if (all_passed) *all_passed = ok ? 1 : 0;
    return MGEM_OK;
  });
}

mgem_status mgem_qp_solve(size_t m, size_t n, const double* rows, const double* target,
                          const double* strength, mgem_dual_form form, mgem_solver solver,
                          double* direction, double* multipliers, double* kkt_residual,
                          int* converged) {
  if (n == 0 || !target || (m > 0 && (!rows || !strength))) {
    return fail(MGEM_ERR_INVALID_ARGUMENT, "null or empty input");
  }
  return guarded([&] {
    mgem::QpInstance inst;
    const auto em = static_cast<Eigen::Index>(m);
    const auto en = static_cast<Eigen::Index>(n);
    inst.rows = Eigen::MatrixXd(em, en);
    for (Eigen::Index i = 0; i < em; ++i) {
      for (Eigen::Index j = 0; j < en; ++j) inst.rows(i, j) = rows[i * en + j];
    }
    inst.target = Eigen::Map<const Eigen::VectorXd>(target, en);
    inst.strength = m > 0 ? Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(strength, em))
                          : Eigen::VectorXd();
    switch (form) {
      case MGEM_FORM_BOX: inst.form = mgem::DualForm::box_lower_bound; break;
      case MGEM_FORM_REGULARIZED: inst.form = mgem::DualForm::linear_regularized; break;
      default: throw mgem::Error(mgem::ErrorCode::invalid_argument, "unknown dual form");
    }
    mgem::DualSolution sol;
    switch (solver) {
      case MGEM_SOLVER_EXACT: sol = mgem::solve_exact(inst); break;
      case MGEM_SOLVER_APPROX: sol = mgem::solve_approx(inst); break;
      case MGEM_SOLVER_ENUMERATE: sol = mgem::solve_enumerate(inst); break;
      default: throw mgem::Error(mgem::ErrorCode::invalid_argument, "unknown solver");
    }
    if (direction) std::memcpy(direction, sol.direction.data(), n * sizeof(double));
    if (multipliers && m > 0) std::memcpy(multipliers, sol.multipliers.data(), m * sizeof(double));
    if (kkt_residual) *kkt_residual = sol.kkt_residual;
    if (converged) *converged = sol.converged ? 1 : 0;
    return MGEM_OK;
  });
}

mgem_status mgem_summarize(size_t tasks, const double* r, double* acc, double* bwd,
                           double* fwd) {
  if (tasks == 0 || !r) return fail(MGEM_ERR_INVALID_ARGUMENT, "empty accuracy matrix");
  return guarded([&] {
    mgem::AccuracyMatrix mat(tasks);
    for (std::size_t i = 0; i < tasks; ++i) {
      for (std::size_t j = 0; j < tasks; ++j) mat(i, j) = r[i * tasks + j];
    }
    const auto s = mgem::summarize(mat);
    if (acc) *acc = s.acc;
    if (bwd) *bwd = s.bwd;
    if (fwd) *fwd = s.fwd;
    return MGEM_OK;
  });
}

}  // extern "C"
