// SPDX-License-Identifier: Apache-2.0
#include "mgem/config.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "mgem/error.hpp"

namespace mgem {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  if (trim(value).empty()) return out;
  std::istringstream in(value);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(trim(item));
  return out;
}

double parse_real(const std::string& key, const std::string& v) {
  double x = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(x)) {
    throw ConfigError(key, "expected a real number, got '" + v + "'");
  }
  return x;
}

std::uint64_t parse_uint(const std::string& key, const std::string& v) {
  std::uint64_t x = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError(key, "expected a non-negative integer, got '" + v + "'");
  }
  return x;
}

std::string real_text(double x) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  (void)ec;
  return std::string(buf.data(), ptr);
}

template <class Fn>
auto parse_enum(const std::string& key, const std::string& v, Fn fn) {
  try {
    return fn(v);
  } catch (const Error& e) {
    throw ConfigError(key, e.what());
  }
}

template <class T>
std::string join(const std::vector<T>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    if constexpr (std::is_floating_point_v<T>) {
      out += real_text(items[i]);
    } else if constexpr (std::is_same_v<T, std::string>) {
      out += items[i];
    } else {
      out += std::to_string(items[i]);
    }
  }
  return out;
}

void apply_method_key(MethodSpec& m, const std::string& key, const std::string& field,
                      const std::string& v) {
  if (field == "kind") {
    m.kind = parse_enum(key, v, method_from_string);
  } else if (field == "d_param") {
    m.d_param = parse_uint(key, v);
  } else if (field == "d_data") {
    m.d_data = parse_uint(key, v);
  } else if (field == "q") {
    m.strength = parse_real(key, v);
  } else if (field == "solver") {
    m.solver = parse_enum(key, v, solver_from_string);
  } else {
    throw ConfigError(key, "unknown key");
  }
}

void apply_key(RunConfig& cfg, const std::string& key, const std::string& v) {
  auto& s = cfg.stream;
  auto& t = cfg.train;
  if (key == "stream.family") s.family = parse_enum(key, v, family_from_string);
  else if (key == "stream.n_tasks") s.n_tasks = parse_uint(key, v);
  else if (key == "stream.n_train") s.n_train = parse_uint(key, v);
  else if (key == "stream.n_test") s.n_test = parse_uint(key, v);
  else if (key == "stream.n_features") s.n_features = parse_uint(key, v);
  else if (key == "stream.n_classes") s.n_classes = parse_uint(key, v);
  else if (key == "stream.noise") s.noise = parse_real(key, v);
  else if (key == "stream.seed") s.seed = parse_uint(key, v);
  else if (key == "stream.csv_paths") s.csv_paths = split_list(v);
  else if (key == "stream.train_fraction") s.train_fraction = parse_real(key, v);
  else if (key == "model.hidden") {
    cfg.hidden.clear();
    for (const auto& item : split_list(v)) {
      const auto h = parse_uint(key, item);
      if (h == 0) throw ConfigError(key, "hidden sizes must be positive");
      cfg.hidden.push_back(h);
    }
  } else if (key == "model.activation") cfg.activation = parse_enum(key, v, activation_from_string);
  else if (key == "train.lr") t.lr = parse_real(key, v);
  else if (key == "train.iters_per_task") t.iters_per_task = parse_uint(key, v);
  else if (key == "train.batch_size") t.batch_size = parse_uint(key, v);
  else if (key == "train.memory_per_task") t.memory_per_task = parse_uint(key, v);
  else if (key == "train.partition") t.partition = parse_enum(key, v, partition_from_string);
  else if (key == "train.seed") t.seed = parse_uint(key, v);
  else if (key == "train.solver_tol") t.solver_tol = parse_real(key, v);
  else if (key == "train.solver_max_iter") t.solver_max_iter = parse_uint(key, v);
  else if (key == "train.degraded_budget") t.degraded_budget = parse_real(key, v);
  else if (key == "methods.q_grid") {
    cfg.q_grid.clear();
    for (const auto& item : split_list(v)) cfg.q_grid.push_back(parse_real(key, item));
  } else if (key == "output.dir") cfg.output_dir = v;
  else throw ConfigError(key, "unknown key");
}

void validate(const RunConfig& cfg) {
  auto check = [](const std::string& key, auto&& fn) {
    try {
      fn();
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError(key, e.what());
    }
  };
  check("stream", [&] { cfg.stream.validate(); });
  check("train", [&] {
    TrainConfig t = cfg.train;
    t.method = MethodSpec{MethodKind::single, 1, 1, 0.0, SolverKind::exact};
    t.validate();
  });
  for (std::size_t i = 0; i < cfg.methods.size(); ++i) {
    const std::string key = "methods." + std::to_string(i);
    check(key, [&] { cfg.methods[i].validate(); });
    if (cfg.methods[i].d_data > cfg.train.memory_per_task) {
      throw ConfigError(key + ".d_data", "exceeds train.memory_per_task");
    }
  }
  for (double q : cfg.q_grid) {
    if (q < 0.0) throw ConfigError("methods.q_grid", "memory strengths must be >= 0");
  }
  if (cfg.output_dir.empty()) throw ConfigError("output.dir", "must not be empty");
}

}  // namespace

MlpSpec RunConfig::model_for(const TaskStream& stream) const {
  MlpSpec spec;
  spec.layer_sizes.push_back(stream.n_features);
  spec.layer_sizes.insert(spec.layer_sizes.end(), hidden.begin(), hidden.end());
  spec.layer_sizes.push_back(stream.n_classes);
  spec.activation = activation;
  return spec;
}

std::vector<MethodSpec> default_methods() {
  return {
      {MethodKind::single, 1, 1, 0.5, SolverKind::exact},
      {MethodKind::gem, 1, 1, 0.5, SolverKind::exact},
      {MethodKind::p_mgem, 2, 1, 0.5, SolverKind::exact},
      {MethodKind::d_mgem, 1, 2, 0.5, SolverKind::exact},
      {MethodKind::md_mgem, 2, 2, 0.5, SolverKind::exact},
  };
}

RunConfig default_config() {
  RunConfig cfg;
  cfg.methods = default_methods();
  cfg.q_grid = default_q_grid();
  return cfg;
}

RunConfig parse_config(std::string_view text) {
  RunConfig cfg = default_config();
  std::map<std::size_t, std::map<std::string, std::string>> method_keys;
  std::map<std::string, std::size_t> seen;
  bool methods_given = false;

  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("", "line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (key.empty()) throw ConfigError("", "line " + std::to_string(line_no) + ": empty key");
    if (!seen.emplace(key, line_no).second) {
      throw ConfigError(key, "duplicate key (line " + std::to_string(line_no) + ")");
    }

    if (key.rfind("methods.", 0) == 0 && key != "methods.q_grid") {
      const std::string rest = key.substr(8);
      const auto dot = rest.find('.');
      if (dot == std::string::npos) throw ConfigError(key, "unknown key");
      const std::string idx_text = rest.substr(0, dot);
      const std::uint64_t idx = parse_uint(key, idx_text);
      if (std::to_string(idx) != idx_text) throw ConfigError(key, "malformed method index");
      method_keys[idx][rest.substr(dot + 1)] = value;
      methods_given = true;
      continue;
    }
    apply_key(cfg, key, value);
  }

  if (methods_given) {
    cfg.methods.clear();
    std::size_t expected = 0;
    for (const auto& [idx, fields] : method_keys) {
      if (idx != expected) {
        throw ConfigError("methods." + std::to_string(expected),
                          "method indices must be contiguous from 0");
      }
      ++expected;
      MethodSpec m;
      m.strength = 0.5;
      if (!fields.contains("kind")) {
        throw ConfigError("methods." + std::to_string(idx) + ".kind", "missing");
      }
      for (const auto& [field, value] : fields) {
        apply_method_key(m, "methods." + std::to_string(idx) + "." + field, field, value);
      }
      cfg.methods.push_back(m);
    }
  }
  validate(cfg);
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", "cannot read config file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const RunConfig& cfg) {
  std::ostringstream out;
  const auto& s = cfg.stream;
  const auto& t = cfg.train;
  out << "stream.family = " << to_string(s.family) << "\n"
      << "stream.n_tasks = " << s.n_tasks << "\n"
      << "stream.n_train = " << s.n_train << "\n"
      << "stream.n_test = " << s.n_test << "\n"
      << "stream.n_features = " << s.n_features << "\n"
      << "stream.n_classes = " << s.n_classes << "\n"
      << "stream.noise = " << real_text(s.noise) << "\n"
      << "stream.seed = " << s.seed << "\n"
      << "stream.csv_paths = " << join(s.csv_paths) << "\n"
      << "stream.train_fraction = " << real_text(s.train_fraction) << "\n"
      << "model.hidden = " << join(cfg.hidden) << "\n"
      << "model.activation = " << to_string(cfg.activation) << "\n"
      << "train.lr = " << real_text(t.lr) << "\n"
      << "train.iters_per_task = " << t.iters_per_task << "\n"
      << "train.batch_size = " << t.batch_size << "\n"
      << "train.memory_per_task = " << t.memory_per_task << "\n"
      << "train.partition = " << to_string(t.partition) << "\n"
      << "train.seed = " << t.seed << "\n"
      << "train.solver_tol = " << real_text(t.solver_tol) << "\n"
      << "train.solver_max_iter = " << t.solver_max_iter << "\n"
      << "train.degraded_budget = " << real_text(t.degraded_budget) << "\n";
  for (std::size_t i = 0; i < cfg.methods.size(); ++i) {
    const auto& m = cfg.methods[i];
    const std::string p = "methods." + std::to_string(i) + ".";
    out << p << "kind = " << to_string(m.kind) << "\n"
        << p << "d_param = " << m.d_param << "\n"
        << p << "d_data = " << m.d_data << "\n"
        << p << "q = " << real_text(m.strength) << "\n"
        << p << "solver = " << to_string(m.solver) << "\n";
  }
  out << "methods.q_grid = " << join(cfg.q_grid) << "\n"
      << "output.dir = " << cfg.output_dir << "\n";
  return out.str();
}

}  // namespace mgem
