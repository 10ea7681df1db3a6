// SPDX-License-Identifier: Apache-2.0
#include "mgem/taskgen.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "mgem/error.hpp"
#include "mgem/rng.hpp"

namespace mgem {

namespace {

Eigen::MatrixXd draw_means(std::size_t classes, std::size_t dim, std::uint64_t seed) {
  Rng rng = make_rng(seed, streams::kClassMeans);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd means(static_cast<Eigen::Index>(classes), static_cast<Eigen::Index>(dim));
  for (Eigen::Index r = 0; r < means.rows(); ++r) {
    for (Eigen::Index c = 0; c < means.cols(); ++c) means(r, c) = normal(rng);
  }
  return means;
}

// Balanced labels (i mod C) and unit Gaussian noise.
struct BlobDraw {
  std::vector<int> labels;
  Eigen::MatrixXd noise;
};

BlobDraw draw_blobs(std::size_t n, std::size_t classes, std::size_t dim, Rng rng) {
  BlobDraw out;
  out.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.labels[i] = static_cast<int>(i % classes);
  std::shuffle(out.labels.begin(), out.labels.end(), rng);
  std::normal_distribution<double> normal(0.0, 1.0);
  out.noise.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  for (Eigen::Index r = 0; r < out.noise.rows(); ++r) {
    for (Eigen::Index c = 0; c < out.noise.cols(); ++c) out.noise(r, c) = normal(rng);
  }
  return out;
}

Dataset realize(const BlobDraw& draw, const Eigen::MatrixXd& means, double noise,
                std::span<const int> class_map = {}) {
  Dataset d;
  d.labels = draw.labels;
  d.features = noise * draw.noise;
  for (std::size_t i = 0; i < d.labels.size(); ++i) {
    const int source = class_map.empty() ? d.labels[i] : class_map[static_cast<std::size_t>(d.labels[i])];
    d.features.row(static_cast<Eigen::Index>(i)) += means.row(source);
  }
  return d;
}

Dataset permute_features(const Dataset& d, const std::vector<std::size_t>& perm) {
  Dataset out;
  out.labels = d.labels;
  out.features.resize(d.features.rows(), d.features.cols());
  for (std::size_t c = 0; c < perm.size(); ++c) {
    out.features.col(static_cast<Eigen::Index>(c)) = d.features.col(static_cast<Eigen::Index>(perm[c]));
  }
  return out;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

struct CsvTable {
  Eigen::MatrixXd features;
  std::vector<int> labels;
  std::vector<std::size_t> line_numbers;
};

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open '" + path + "'");
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  std::vector<std::size_t> line_numbers;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (trim(line).empty()) continue;
    auto cells = split_commas(line);
    if (header.empty()) {
      header = std::move(cells);
      if (header.size() < 2 || header.back() != "label") {
        throw ParseError(path, line_no, header.size(),
                         "header must end with a 'label' column after at least one feature");
      }
      continue;
    }
    if (cells.size() != header.size()) {
      throw ParseError(path, line_no, std::min(cells.size(), header.size()) + 1,
                       "expected " + std::to_string(header.size()) + " cells, found " +
                           std::to_string(cells.size()));
    }
    std::vector<double> row(header.size() - 1);
    for (std::size_t c = 0; c + 1 < cells.size(); ++c) {
      const auto& s = cells[c];
      auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), row[c]);
      if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(row[c])) {
        throw ParseError(path, line_no, c + 1,
                         "non-numeric value '" + s + "' in column '" + header[c] + "'");
      }
    }
    const auto& ls = cells.back();
    long long label = 0;
    auto [ptr, ec] = std::from_chars(ls.data(), ls.data() + ls.size(), label);
    if (ls.empty() || ec != std::errc() || ptr != ls.data() + ls.size()) {
      throw ParseError(path, line_no, cells.size(), "label '" + ls + "' is not an integer");
    }
    if (label < 0 || label > 1'000'000) {
      throw ParseError(path, line_no, cells.size(), "label " + ls + " out of range");
    }
    rows.push_back(std::move(row));
    labels.push_back(static_cast<int>(label));
    line_numbers.push_back(line_no);
  }
  if (header.empty()) throw ParseError(path, line_no, 1, "file has no header");
  if (rows.size() < 2) throw ParseError(path, line_no, 1, "file needs at least two data rows");
  CsvTable table;
  table.labels = std::move(labels);
  table.line_numbers = std::move(line_numbers);
  table.features.resize(static_cast<Eigen::Index>(rows.size()),
                        static_cast<Eigen::Index>(header.size() - 1));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      table.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  return table;
}

}  // namespace

std::string to_string(StreamFamily f) {
  switch (f) {
    case StreamFamily::permuted: return "permuted";
    case StreamFamily::rotated: return "rotated";
    case StreamFamily::split_classes: return "split_classes";
    case StreamFamily::csv: return "csv";
  }
  return "unknown";
}

StreamFamily family_from_string(const std::string& s) {
  if (s == "permuted") return StreamFamily::permuted;
  if (s == "rotated") return StreamFamily::rotated;
  if (s == "split_classes") return StreamFamily::split_classes;
  if (s == "csv") return StreamFamily::csv;
  throw Error(ErrorCode::invalid_argument, "unknown stream family '" + s + "'");
}

void StreamSpec::validate() const {
  if (family == StreamFamily::csv) {
    require(!csv_paths.empty(), "csv stream needs at least one file");
    require(train_fraction > 0.0 && train_fraction < 1.0, "train fraction must be in (0, 1)");
    return;
  }
  require(n_tasks >= 1, "stream needs at least one task");
  require(n_train >= 1 && n_test >= 1, "each task needs train and test samples");
  require(n_features >= 1, "stream needs at least one feature");
  require(n_classes >= 2, "stream needs at least two classes");
  require(noise >= 0.0 && std::isfinite(noise), "noise must be finite and >= 0");
  if (family == StreamFamily::rotated) require(n_features >= 2, "rotation needs two features");
}

TaskStream TaskStream::prefix(std::size_t count) const {
  TaskStream out = *this;
  out.tasks.resize(std::min(count, tasks.size()));
  return out;
}

Eigen::MatrixXd plane_rotation(std::size_t dim, std::size_t axis_a, std::size_t axis_b,
                               double angle) {
  Eigen::MatrixXd r = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(dim),
                                                static_cast<Eigen::Index>(dim));
  const auto a = static_cast<Eigen::Index>(axis_a);
  const auto b = static_cast<Eigen::Index>(axis_b);
  r(a, a) = std::cos(angle);
  r(a, b) = -std::sin(angle);
  r(b, a) = std::sin(angle);
  r(b, b) = std::cos(angle);
  return r;
}

std::pair<std::size_t, std::size_t> rotation_plane(std::uint64_t seed, std::size_t dim) {
  require(dim >= 2, "rotation needs two features");
  Rng rng = make_rng(seed, streams::kRotationPlane);
  std::vector<std::size_t> axes(dim);
  std::iota(axes.begin(), axes.end(), std::size_t{0});
  std::shuffle(axes.begin(), axes.end(), rng);
  return {std::min(axes[0], axes[1]), std::max(axes[0], axes[1])};
}

TaskStream generate(const StreamSpec& spec) {
  spec.validate();
  if (spec.family == StreamFamily::csv) {
    return load_csv(spec.csv_paths, CsvSchema{spec.train_fraction, spec.seed, spec.n_classes});
  }
  TaskStream stream;
  stream.n_features = spec.n_features;
  stream.n_classes = spec.n_classes;
  const std::size_t C = spec.n_classes;
  const std::size_t F = spec.n_features;

  if (spec.family == StreamFamily::split_classes) {
    const Eigen::MatrixXd means = draw_means(C * spec.n_tasks, F, spec.seed);
    for (std::size_t k = 0; k < spec.n_tasks; ++k) {
      std::vector<int> class_map(C);
      std::iota(class_map.begin(), class_map.end(), static_cast<int>(k * C));
      Task task;
      task.descriptor = k + 1;
      task.class_means = means.middleRows(static_cast<Eigen::Index>(k * C), static_cast<Eigen::Index>(C));
      task.train = realize(draw_blobs(spec.n_train, C, F, make_rng(spec.seed, streams::for_task(streams::kTrainSamples, k + 1))),
                           means, spec.noise, class_map);
      task.test = realize(draw_blobs(spec.n_test, C, F, make_rng(spec.seed, streams::for_task(streams::kTestSamples, k + 1))),
                          means, spec.noise, class_map);
      stream.tasks.push_back(std::move(task));
    }
    return stream;
  }

  const Eigen::MatrixXd means = draw_means(C, F, spec.seed);
  const BlobDraw train_draw = draw_blobs(spec.n_train, C, F, make_rng(spec.seed, streams::kTrainSamples));
  const BlobDraw test_draw = draw_blobs(spec.n_test, C, F, make_rng(spec.seed, streams::kTestSamples));

  if (spec.family == StreamFamily::permuted) {
    const Dataset base_train = realize(train_draw, means, spec.noise);
    const Dataset base_test = realize(test_draw, means, spec.noise);
    for (std::size_t k = 0; k < spec.n_tasks; ++k) {
      std::vector<std::size_t> perm(F);
      std::iota(perm.begin(), perm.end(), std::size_t{0});
      if (k > 0) {
        Rng rng = make_rng(spec.seed, streams::for_task(streams::kPermutation, k + 1));
        std::shuffle(perm.begin(), perm.end(), rng);
      }
      Task task;
      task.descriptor = k + 1;
      task.train = permute_features(base_train, perm);
      task.test = permute_features(base_test, perm);
      task.class_means.resize(means.rows(), means.cols());
      for (std::size_t c = 0; c < F; ++c) {
        task.class_means.col(static_cast<Eigen::Index>(c)) = means.col(static_cast<Eigen::Index>(perm[c]));
      }
      stream.tasks.push_back(std::move(task));
    }
    return stream;
  }

  const auto [axis_a, axis_b] = rotation_plane(spec.seed, F);
  for (std::size_t k = 0; k < spec.n_tasks; ++k) {
    const double angle = static_cast<double>(k) * std::numbers::pi / static_cast<double>(spec.n_tasks);
    const Eigen::MatrixXd rot = plane_rotation(F, axis_a, axis_b, angle);
    Task task;
    task.descriptor = k + 1;
    task.class_means = means * rot.transpose();
    task.train = realize(train_draw, task.class_means, spec.noise);
    task.test = realize(test_draw, task.class_means, spec.noise);
    stream.tasks.push_back(std::move(task));
  }
  return stream;
}

TaskStream load_csv(const std::vector<std::string>& paths, const CsvSchema& schema) {
  require(!paths.empty(), "csv stream needs at least one file");
  require(schema.train_fraction > 0.0 && schema.train_fraction < 1.0,
          "train fraction must be in (0, 1)");
  std::vector<CsvTable> tables;
  for (const auto& p : paths) tables.push_back(read_csv(p));

  TaskStream stream;
  stream.n_features = static_cast<std::size_t>(tables.front().features.cols());
  int max_label = 0;
  for (std::size_t f = 0; f < tables.size(); ++f) {
    if (static_cast<std::size_t>(tables[f].features.cols()) != stream.n_features) {
      throw ParseError(paths[f], 1, 1, "feature count differs from '" + paths.front() + "'");
    }
    for (int y : tables[f].labels) max_label = std::max(max_label, y);
  }
  stream.n_classes = schema.n_classes > 0 ? schema.n_classes : static_cast<std::size_t>(max_label) + 1;
  if (stream.n_classes < 2) stream.n_classes = 2;
  if (static_cast<std::size_t>(max_label) >= stream.n_classes) {
    for (std::size_t f = 0; f < tables.size(); ++f) {
      for (std::size_t r = 0; r < tables[f].labels.size(); ++r) {
        if (static_cast<std::size_t>(tables[f].labels[r]) >= stream.n_classes) {
          throw ParseError(paths[f], tables[f].line_numbers[r], stream.n_features + 1,
                           "label " + std::to_string(tables[f].labels[r]) + " outside [0, " +
                               std::to_string(stream.n_classes) + ")");
        }
      }
    }
  }

  for (std::size_t f = 0; f < tables.size(); ++f) {
    const auto& t = tables[f];
    const std::size_t n = t.labels.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng = make_rng(schema.seed, streams::for_task(streams::kCsvSplit, f + 1));
    std::shuffle(order.begin(), order.end(), rng);
    auto n_train = static_cast<std::size_t>(std::llround(schema.train_fraction * static_cast<double>(n)));
    n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
    Dataset all{t.features, t.labels};
    Task task;
    task.descriptor = f + 1;
    task.train = all.subset(std::span(order).first(n_train));
    task.test = all.subset(std::span(order).subspan(n_train));
    stream.tasks.push_back(std::move(task));
  }
  return stream;
}

}  // namespace mgem
