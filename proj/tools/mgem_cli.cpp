// SPDX-License-Identifier: Apache-2.0
// mgem: run, pareto and selfcheck commands over the C API.
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <string_view>
#include <system_error>

#include "CLI11.hpp"
#include "mgem/mgem.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

int exit_code(mgem_status s) {
  switch (s) {
    case MGEM_OK: return kExitOk;
    case MGEM_ERR_INVALID_ARGUMENT:
    case MGEM_ERR_SHAPE:
    case MGEM_ERR_CONFIG:
    case MGEM_ERR_PARSE: return kExitUsage;
    default: return kExitRuntime;
  }
}

int report_failure(const char* command, mgem_status s) {
  std::fprintf(stderr, "mgem %s: error: %s\n", command, mgem_last_error());
  return exit_code(s);
}

struct Options {
  std::string config;
  std::string out;
  std::uint32_t seeds = 1;
  std::uint32_t threads = 1;
  bool quick = false;
};

int with_config(const char* command, const Options& opts,
                mgem_status (*fn)(const mgem_config*, const mgem_run_options*, mgem_report*),
                const char* what) {
  mgem_config* cfg = nullptr;
  mgem_status s = opts.config.empty() ? mgem_config_default(&cfg)
                                      : mgem_config_load(opts.config.c_str(), &cfg);
  if (s != MGEM_OK) return report_failure(command, s);
  mgem_run_options ro{opts.out.empty() ? nullptr : opts.out.c_str(), opts.seeds, opts.threads};
  mgem_report rep{};
  s = fn(cfg, &ro, &rep);
  const std::string dir = opts.out.empty() ? mgem_config_output_dir(cfg) : opts.out;
  mgem_config_free(cfg);
  if (s != MGEM_OK) {
    if (rep.rows > 0) {
      std::fprintf(stderr, "mgem %s: wrote %zu %s rows to %s\n", command, rep.rows, what,
                   dir.c_str());
    }
    return report_failure(command, s);
  }
  std::printf("wrote %zu %s rows to %s\n", rep.rows, what, dir.c_str());
  return kExitOk;
}

void print_suite(const char* name, int passed, size_t cases, size_t failures, const char* detail,
                 double seconds, void*) {
  std::printf("%s %-20s cases=%zu failures=%zu time=%.2fs%s%s\n", passed ? "PASS" : "FAIL", name,
              cases, failures, seconds, *detail ? "  " : "", detail);
  std::fflush(stdout);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Modular gradient episodic memory experiments"};
  app.require_subcommand(1);
  Options opts;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", opts.config, "Run configuration file")->check(CLI::ExistingFile);
    cmd->add_option("--out", opts.out, "Output directory (overrides output.dir)");
    cmd->add_option("--seeds", opts.seeds, "Number of seed replicates")
        ->check(CLI::PositiveNumber);
  };

  CLI::App* run = app.add_subcommand("run", "Train every configured method; write summary.csv and rmatrix.csv");
  add_common(run);
  CLI::App* pareto =
      app.add_subcommand("pareto", "Sweep methods x q grid on tasks 1-2; write pareto.csv");
  add_common(pareto);
  CLI::Option* threads = pareto->add_option("--threads", opts.threads, "Worker threads (default: MGEM_THREADS or 1)")
                             ->check(CLI::PositiveNumber);
  CLI::App* selfcheck = app.add_subcommand("selfcheck", "Run the solver and model property suites");
  selfcheck->add_flag("--quick", opts.quick, "Reduced instance counts");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (run->parsed()) return with_config("run", opts, mgem_run, "summary");
  if (pareto->parsed() && threads->count() == 0) {
    if (const char* env = std::getenv("MGEM_THREADS"); env != nullptr && *env != '\0') {
      const std::string_view text(env);
      std::uint32_t value = 0;
      const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
      if (ec != std::errc{} || end != text.data() + text.size() || value == 0) {
        std::fprintf(stderr, "error: MGEM_THREADS must be a positive integer, got '%s'\n", env);
        return kExitUsage;
      }
      opts.threads = value;
    }
  }
  if (pareto->parsed()) return with_config("pareto", opts, mgem_pareto, "pareto");

  int all_passed = 0;
  const mgem_status s = mgem_selfcheck(opts.quick ? 1 : 0, print_suite, nullptr, &all_passed);
  if (s != MGEM_OK) return report_failure("selfcheck", s);
  std::printf("%s\n", all_passed ? "selfcheck passed" : "selfcheck FAILED");
  return all_passed ? kExitOk : kExitRuntime;
}
