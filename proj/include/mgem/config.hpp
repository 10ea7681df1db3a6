// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "mgem/constraints.hpp"
#include "mgem/engine.hpp"
#include "mgem/mlp.hpp"
#include "mgem/taskgen.hpp"

namespace mgem {

/// Contents of a run configuration file.
///
/// The format is UTF-8 text with one `section.key = value` per line; `#`
/// starts a comment. Lists are comma separated. Method entries are indexed:
/// `methods.0.kind = gem`, `methods.0.q = 0.5`, ... with indices 0..N-1.
/// Every key is optional; unknown keys and duplicates are errors.
struct RunConfig {
  StreamSpec stream;
  std::vector<std::size_t> hidden{32};
  Activation activation = Activation::relu;
  TrainConfig train;  // train.method is unused; see `methods`
  std::vector<MethodSpec> methods;
  std::vector<double> q_grid;
  std::string output_dir = "out";

  /// Network for a stream: (features, hidden..., classes).
  MlpSpec model_for(const TaskStream& stream) const;
};

/// Single, GEM, p-mGEM(2), d-mGEM(2), md-mGEM(2, 2) at q = 0.5, exact solver.
std::vector<MethodSpec> default_methods();

RunConfig default_config();

/// Throws ConfigError naming the offending key.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

/// Canonical text: every key, fixed order, shortest round-trip reals.
std::string serialize_config(const RunConfig& cfg);

}  // namespace mgem
