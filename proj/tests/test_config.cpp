// SPDX-License-Identifier: Apache-2.0
#include <string>

#include "doctest.h"
#include "mgem/config.hpp"
#include "mgem/error.hpp"
#include "test_util.hpp"

using namespace mgem;

namespace {

std::string key_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "<no error>";
}

}  // namespace

TEST_CASE("empty text gives the defaults") {
  const RunConfig cfg = parse_config("");
  CHECK(cfg.methods == default_methods());
  CHECK(cfg.q_grid == default_q_grid());
  CHECK(cfg.methods.size() == 5);
  CHECK(cfg.q_grid.size() == 8);
}

TEST_CASE("values, comments, lists and methods") {
  const RunConfig cfg = parse_config(
      "# experiment\n"
      "stream.family = permuted\n"
      "stream.n_tasks = 4   # trailing comment\n"
      "stream.noise = 0.25\n"
      "model.hidden = 16, 8\n"
      "model.activation = tanh\n"
      "train.lr = 0.01\n"
      "train.partition = equal_flat\n"
      "methods.0.kind = md_mgem\n"
      "methods.0.d_param = 3\n"
      "methods.0.d_data = 2\n"
      "methods.0.q = 0.1\n"
      "methods.0.solver = approx\n"
      "methods.1.kind = single\n"
      "methods.q_grid = 0, 0.5\n"
      "output.dir = results\n");
  CHECK(cfg.stream.family == StreamFamily::permuted);
  CHECK(cfg.stream.n_tasks == 4);
  CHECK(cfg.stream.noise == 0.25);
  CHECK(cfg.hidden == std::vector<std::size_t>{16, 8});
  CHECK(cfg.activation == Activation::tanh);
  CHECK(cfg.train.lr == 0.01);
  CHECK(cfg.train.partition == PartitionMode::equal_flat);
  REQUIRE(cfg.methods.size() == 2);
  CHECK(cfg.methods[0] == MethodSpec{MethodKind::md_mgem, 3, 2, 0.1, SolverKind::approx});
  CHECK(cfg.methods[1].kind == MethodKind::single);
  CHECK(cfg.q_grid == std::vector<double>{0.0, 0.5});
  CHECK(cfg.output_dir == "results");
}

TEST_CASE("errors name the offending key") {
  CHECK(key_of("methods.0.kind = mer\n") == "methods.0.kind");
  CHECK(key_of("train.learning_rate = 0.1\n") == "train.learning_rate");
  CHECK(key_of("train.lr = fast\n") == "train.lr");
  CHECK(key_of("stream.n_tasks = -1\n") == "stream.n_tasks");
  CHECK(key_of("train.lr = 0.1\ntrain.lr = 0.2\n") == "train.lr");
  CHECK(key_of("methods.0.kind = gem\nmethods.0.d_param = 2\n") == "methods.0");
  CHECK(key_of("methods.1.kind = gem\n") == "methods.0");
  CHECK(key_of("methods.0.q = 0.1\n") == "methods.0.kind");
  CHECK(key_of("methods.0.kind = d_mgem\nmethods.0.d_data = 100\n") == "methods.0.d_data");
  CHECK(key_of("model.hidden = 4, 0\n") == "model.hidden");
  CHECK(key_of("train.lr = 0\n") == "train");
  try {
    parse_config("methods.0.kind = mer\n");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("methods.0.kind") != std::string::npos);
    CHECK(std::string(e.what()).find("mer") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config("just some words\n"), ConfigError);
}

TEST_CASE("serialize then parse is idempotent") {
  RunConfig cfg = default_config();
  cfg.stream.noise = 0.1 + 0.2;  // not exactly representable in short decimal
  cfg.train.lr = 1.0 / 3.0;
  cfg.hidden = {7, 5};
  cfg.methods.push_back({MethodKind::md_mgem, 3, 4, 0.05, SolverKind::approx});
  const std::string once = serialize_config(cfg);
  const RunConfig back = parse_config(once);
  CHECK(serialize_config(back) == once);
  CHECK(back.stream.noise == cfg.stream.noise);
  CHECK(back.train.lr == cfg.train.lr);
  CHECK(back.methods == cfg.methods);
}

TEST_CASE("round trip of a hand-written file") {
  const std::string text = "train.iters_per_task = 10\nmethods.0.kind = gem\n";
  const std::string first = serialize_config(parse_config(text));
  CHECK(serialize_config(parse_config(first)) == first);
}

TEST_CASE("load_config reads files and reports missing ones") {
  testutil::TempDir dir;
  const auto p = dir.write("c.cfg", "\xEF\xBB\xBFstream.n_tasks = 3\n");
  CHECK(load_config(p).stream.n_tasks == 3);
  CHECK_THROWS_AS(load_config(dir.path / "nope.cfg"), ConfigError);
}

TEST_CASE("model_for wraps hidden sizes with stream dimensions") {
  RunConfig cfg = default_config();
  cfg.hidden = {5};
  TaskStream s;
  s.n_features = 3;
  s.n_classes = 4;
  CHECK(cfg.model_for(s).layer_sizes == std::vector<std::size_t>{3, 5, 4});
}
