// SPDX-License-Identifier: Apache-2.0
#include <cstring>
#include <string>
#include <vector>

#include "doctest.h"
#include "mgem/mgem.h"
#include "test_util.hpp"

namespace {

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

struct Config {
  mgem_config* p = nullptr;
  explicit Config(const std::string& text) { REQUIRE(mgem_config_parse(text.c_str(), &p) == MGEM_OK); }
  ~Config() { mgem_config_free(p); }
};

std::size_t lines(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

}  // namespace

TEST_CASE("qp solve: single active constraint") {
  const double rows[] = {0, 1};
  const double g[] = {1, -1};
  const double q[] = {0};
  double z[2];
  double v[1];
  double kkt = -1;
  int conv = 0;
  for (auto solver : {MGEM_SOLVER_EXACT, MGEM_SOLVER_APPROX, MGEM_SOLVER_ENUMERATE}) {
    REQUIRE(mgem_qp_solve(1, 2, rows, g, q, MGEM_FORM_BOX, solver, z, v, &kkt, &conv) == MGEM_OK);
    CHECK(v[0] == doctest::Approx(1.0));
    CHECK(z[0] == doctest::Approx(1.0));
    CHECK(std::abs(z[1]) < 1e-12);
    CHECK(conv == 1);
    CHECK(kkt < 1e-12);
  }
}

TEST_CASE("qp solve errors set the last error") {
  const double rows[] = {0, 0};
  const double g[] = {1, -1};
  const double q[] = {0};
  double z[2];
  CHECK(mgem_qp_solve(1, 2, rows, g, q, MGEM_FORM_BOX, MGEM_SOLVER_EXACT, z, nullptr, nullptr,
                      nullptr) == MGEM_ERR_SOLVER);
  CHECK(std::strlen(mgem_last_error()) > 0);
  CHECK(mgem_qp_solve(1, 2, nullptr, g, q, MGEM_FORM_BOX, MGEM_SOLVER_EXACT, z, nullptr, nullptr,
                      nullptr) == MGEM_ERR_INVALID_ARGUMENT);
  const double ok_rows[] = {0, 1};
  CHECK(mgem_qp_solve(1, 2, ok_rows, g, q, MGEM_FORM_REGULARIZED, MGEM_SOLVER_APPROX, z, nullptr,
                      nullptr, nullptr) == MGEM_ERR_INVALID_ARGUMENT);
  CHECK(mgem_qp_solve(1, 2, ok_rows, g, q, MGEM_FORM_BOX, MGEM_SOLVER_EXACT, z, nullptr, nullptr,
                      nullptr) == MGEM_OK);
  CHECK(std::string(mgem_last_error()).empty());
}

TEST_CASE("summarize through the C API") {
  const double r[] = {0.9, 0.2, 0.8, 0.85};
  double acc = 0, bwd = 0, fwd = 0;
  REQUIRE(mgem_summarize(2, r, &acc, &bwd, &fwd) == MGEM_OK);
  CHECK(acc == doctest::Approx(0.825));
  CHECK(fwd == doctest::Approx(0.875));
  CHECK(bwd == doctest::Approx(-0.05));
  CHECK(acc == bwd + fwd);
  CHECK(mgem_summarize(0, r, &acc, &bwd, &fwd) == MGEM_ERR_INVALID_ARGUMENT);
}

TEST_CASE("config parse errors carry the key") {
  mgem_config* cfg = nullptr;
  CHECK(mgem_config_parse("methods.0.kind = mer\n", &cfg) == MGEM_ERR_CONFIG);
  CHECK(cfg == nullptr);
  CHECK(std::string(mgem_last_error()).find("methods.0.kind") != std::string::npos);
  CHECK(mgem_config_load("/nonexistent/x.cfg", &cfg) == MGEM_ERR_CONFIG);
}

TEST_CASE("config serialize round trip") {
  Config c(kTiny);
  char* text = nullptr;
  REQUIRE(mgem_config_serialize(c.p, &text) == MGEM_OK);
  Config again(text);
  char* text2 = nullptr;
  REQUIRE(mgem_config_serialize(again.p, &text2) == MGEM_OK);
  CHECK(std::string(text) == std::string(text2));
  mgem_string_free(text);
  mgem_string_free(text2);
  CHECK(mgem_config_task_count(c.p) == 2);
}

TEST_CASE("run writes one summary row per method and seed") {
  testutil::TempDir dir;
  Config c(std::string(kTiny) + "methods.0.kind = single\nmethods.1.kind = gem\n");
  const std::string out = (dir.path / "out").string();
  mgem_run_options opts{out.c_str(), 2, 1};
  mgem_report rep{};
  REQUIRE(mgem_run(c.p, &opts, &rep) == MGEM_OK);
  CHECK(rep.rows == 4);
  const std::string summary = testutil::read_file(dir.path / "out" / "summary.csv");
  CHECK(lines(summary) == 5);
  CHECK(summary.find("\nsingle,0.5,1,1,exact,0,") != std::string::npos);
  CHECK(summary.find("\ngem,0.5,1,1,exact,1,") != std::string::npos);
  CHECK(lines(testutil::read_file(dir.path / "out" / "rmatrix.csv")) == 1 + 4 * 4);
}

TEST_CASE("run output directory handling") {
  testutil::TempDir dir;
  Config c(std::string(kTiny) + "methods.0.kind = single\n");
  const std::string deep = (dir.path / "missing" / "out").string();
  mgem_run_options opts{deep.c_str(), 1, 1};
  CHECK(mgem_run(c.p, &opts, nullptr) == MGEM_ERR_CONFIG);
  CHECK(std::string(mgem_last_error()).find("output.dir") != std::string::npos);
  const std::string file = dir.write("f", "x");
  mgem_run_options to_file{file.c_str(), 1, 1};
  CHECK(mgem_run(c.p, &to_file, nullptr) == MGEM_ERR_CONFIG);
}

TEST_CASE("reruns are byte-identical") {
  testutil::TempDir a;
  testutil::TempDir b;
  Config c(kTiny);
  const std::string pa = a.path.string();
  const std::string pb = b.path.string();
  mgem_run_options oa{pa.c_str(), 1, 1};
  mgem_run_options ob{pb.c_str(), 1, 1};
  REQUIRE(mgem_run(c.p, &oa, nullptr) == MGEM_OK);
  REQUIRE(mgem_run(c.p, &ob, nullptr) == MGEM_OK);
  CHECK(testutil::read_file(a.path / "summary.csv") == testutil::read_file(b.path / "summary.csv"));
  CHECK(testutil::read_file(a.path / "rmatrix.csv") == testutil::read_file(b.path / "rmatrix.csv"));
}

TEST_CASE("pareto: default grid gives 40 rows per seed") {
  testutil::TempDir dir;
  Config c(kTiny);
  const std::string out = dir.path.string();
  mgem_run_options opts{out.c_str(), 3, 2};
  mgem_report rep{};
  REQUIRE(mgem_pareto(c.p, &opts, &rep) == MGEM_OK);
  CHECK(rep.rows == 120);
  CHECK(lines(testutil::read_file(dir.path / "pareto.csv")) == 121);
}

TEST_CASE("pareto rejects a one-task stream") {
  testutil::TempDir dir;
  Config c(std::string(kTiny).replace(0, std::strlen("stream.n_tasks = 2"), "stream.n_tasks = 1"));
  const std::string out = dir.path.string();
  mgem_run_options opts{out.c_str(), 1, 1};
  CHECK(mgem_pareto(c.p, &opts, nullptr) == MGEM_ERR_INVALID_ARGUMENT);
  CHECK(std::string(mgem_last_error()) == "pareto requires ≥ 2 tasks");
}

TEST_CASE("a run over the unconverged budget is reported after writing") {
  testutil::TempDir dir;
  Config c(std::string(kTinyBase) +
           "stream.n_features = 2\nstream.n_classes = 4\ntrain.iters_per_task = 40\n"
           "train.solver_max_iter = 0\ntrain.solver_tol = 1e-300\ntrain.degraded_budget = 0\n"
           "methods.0.kind = d_mgem\nmethods.0.d_data = 2\n");
  const std::string out = dir.path.string();
  mgem_run_options opts{out.c_str(), 1, 1};
  mgem_report rep{};
  CHECK(mgem_run(c.p, &opts, &rep) == MGEM_ERR_SOLVER);
  CHECK(rep.degraded_runs == 1);
  CHECK(std::filesystem::exists(dir.path / "summary.csv"));
}

namespace {
void count_suites(const char*, int passed, size_t, size_t, const char*, double, void* user) {
  auto* counts = static_cast<std::pair<int, int>*>(user);
  ++counts->first;
  counts->second += passed;
}
}  // namespace

TEST_CASE("selfcheck through the C API") {
  std::pair<int, int> counts{0, 0};
  int all = 0;
  REQUIRE(mgem_selfcheck(1, count_suites, &counts, &all) == MGEM_OK);
  CHECK(all == 1);
  CHECK(counts.first == 5);
  CHECK(counts.second == 5);
}
