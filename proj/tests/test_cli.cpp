// SPDX-License-Identifier: Apache-2.0
#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <string>

#include "doctest.h"
#include "test_util.hpp"

#ifndef MGEM_CLI_PATH
#error "MGEM_CLI_PATH must point at the mgem executable"
#endif

namespace {

struct Result {
  int code = -1;
  std::string output;
};

Result run_cli(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " '" MGEM_CLI_PATH "' " + args + " 2>&1";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  while (std::fgets(buf, sizeof buf, pipe)) r.output += buf;
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

#define TINY_BASE \
  "stream.n_tasks = 2\n"     \
  "stream.n_train = 40\n"    \
  "stream.n_test = 20\n"     \
  "model.hidden = 4\n"       \
  "train.memory_per_task = 8\n"
const char* kTinyBase = TINY_BASE;
const char* kTiny = TINY_BASE
    "stream.n_features = 3\n"
    "stream.n_classes = 2\n"
    "train.iters_per_task = 5\n";

std::size_t lines(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

}  // namespace

TEST_CASE("run: minimal single-method, one-task config") {
  testutil::TempDir dir;
  const auto cfg = dir.write("min.cfg", "stream.n_tasks = 1\ntrain.iters_per_task = 5\nmethods.0.kind = single\n");
  const auto out = (dir.path / "out").string();
  const Result r = run_cli("run --config " + cfg + " --out " + out);
  CHECK_MESSAGE(r.code == 0, r.output);
  CHECK(lines(testutil::read_file(dir.path / "out" / "summary.csv")) == 2);
}

TEST_CASE("run: unknown method is a config error naming the key") {
  testutil::TempDir dir;
  const auto cfg = dir.write("bad.cfg", "methods.0.kind = mer\n");
  const Result r = run_cli("run --config " + cfg + " --out " + dir.path.string());
  CHECK(r.code == 1);
  CHECK(r.output.find("methods.0.kind") != std::string::npos);
}

TEST_CASE("run: output directory created only if its parent exists") {
  testutil::TempDir dir;
  const auto cfg = dir.write("c.cfg", std::string(kTiny) + "methods.0.kind = single\n");
  CHECK(run_cli("run --config " + cfg + " --out " + (dir.path / "new").string()).code == 0);
  CHECK(std::filesystem::is_directory(dir.path / "new"));
  const Result bad = run_cli("run --config " + cfg + " --out " + (dir.path / "a" / "b").string());
  CHECK(bad.code == 1);
  CHECK(bad.output.find("output.dir") != std::string::npos);
}

TEST_CASE("run: output.dir from the config file") {
  testutil::TempDir dir;
  const auto out = (dir.path / "from_cfg").string();
  const auto cfg =
      dir.write("c.cfg", std::string(kTiny) + "methods.0.kind = single\noutput.dir = " + out + "\n");
  CHECK(run_cli("run --config " + cfg).code == 0);
  CHECK(std::filesystem::exists(dir.path / "from_cfg" / "summary.csv"));
}

TEST_CASE("run: seed replicates multiply the rows") {
  testutil::TempDir dir;
  const auto cfg = dir.write("c.cfg", kTiny);
  REQUIRE(run_cli("run --config " + cfg + " --seeds 2 --out " + dir.path.string()).code == 0);
  CHECK(lines(testutil::read_file(dir.path / "summary.csv")) == 1 + 5 * 2);
}

TEST_CASE("run: solver budget failure exits 2") {
  testutil::TempDir dir;
  const auto cfg = dir.write(
      "c.cfg", std::string(kTinyBase) +
                   "stream.n_features = 2\nstream.n_classes = 4\ntrain.iters_per_task = 40\n"
           "train.solver_max_iter = 0\ntrain.solver_tol = 1e-300\ntrain.degraded_budget = 0\n"
                   "methods.0.kind = d_mgem\nmethods.0.d_data = 2\n");
  const Result r = run_cli("run --config " + cfg + " --out " + dir.path.string());
  CHECK(r.code == 2);
  CHECK(r.output.find("budget") != std::string::npos);
}

TEST_CASE("pareto: default grid, 40 rows; --seeds 3 gives 120") {
  testutil::TempDir dir;
  const auto cfg = dir.write("c.cfg", kTiny);
  Result r = run_cli("pareto --config " + cfg + " --out " + dir.path.string());
  CHECK_MESSAGE(r.code == 0, r.output);
  CHECK(lines(testutil::read_file(dir.path / "pareto.csv")) == 41);
  r = run_cli("pareto --config " + cfg + " --seeds 3 --threads 2 --out " + dir.path.string());
  CHECK(r.code == 0);
  CHECK(lines(testutil::read_file(dir.path / "pareto.csv")) == 121);
}

TEST_CASE("pareto: thread count from the environment gives the same file") {
  testutil::TempDir a;
  testutil::TempDir b;
  const auto cfg = a.write("c.cfg", kTiny);
  REQUIRE(run_cli("pareto --config " + cfg + " --out " + a.path.string()).code == 0);
  REQUIRE(run_cli("pareto --config " + cfg + " --out " + b.path.string(), "MGEM_THREADS=3").code == 0);
  CHECK(testutil::read_file(a.path / "pareto.csv") == testutil::read_file(b.path / "pareto.csv"));
  CHECK(run_cli("pareto --config " + cfg + " --out " + b.path.string(), "MGEM_THREADS=zero").code == 1);
}

TEST_CASE("pareto: one-task stream is rejected") {
  testutil::TempDir dir;
  const auto cfg = dir.write("c.cfg", "stream.n_tasks = 1\n");
  const Result r = run_cli("pareto --config " + cfg + " --out " + dir.path.string());
  CHECK(r.code == 1);
  CHECK(r.output.find("pareto requires ≥ 2 tasks") != std::string::npos);
}

TEST_CASE("selfcheck --quick passes every suite") {
  const Result r = run_cli("selfcheck --quick");
  CHECK_MESSAGE(r.code == 0, r.output);
  CHECK(lines(r.output) == 6);
  CHECK(r.output.find("FAIL") == std::string::npos);
  for (const char* suite : {"oracle-equivalence", "single-constraint", "gradient-check",
                            "block-separability", "strength-ordering"}) {
    CHECK(r.output.find(suite) != std::string::npos);
  }
}

TEST_CASE("usage errors exit 1") {
  CHECK(run_cli("").code == 1);
  CHECK(run_cli("frobnicate").code == 1);
  CHECK(run_cli("run --seeds 0").code == 1);
  CHECK(run_cli("run --config /nonexistent.cfg").code == 1);
  CHECK(run_cli("--help").code == 0);
}
