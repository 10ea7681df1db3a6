// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mgem/mlp.hpp"

namespace mgem {

enum class StreamFamily { permuted, rotated, split_classes, csv };

std::string to_string(StreamFamily f);
StreamFamily family_from_string(const std::string& s);

struct StreamSpec {
  StreamFamily family = StreamFamily::rotated;
  std::size_t n_tasks = 2;
  std::size_t n_train = 400;  // per task
  std::size_t n_test = 200;   // per task
  std::size_t n_features = 8;
  std::size_t n_classes = 4;
  double noise = 0.5;
  std::uint64_t seed = 0;
  std::vector<std::string> csv_paths;
  double train_fraction = 0.8;  // csv only

  void validate() const;
};

struct Task {
  Dataset train;
  Dataset test;
  std::size_t descriptor = 0;  // 1-based
  /// Class means the samples were drawn around (empty for csv tasks).
  Eigen::MatrixXd class_means;
};

struct TaskStream {
  std::vector<Task> tasks;
  std::size_t n_features = 0;
  std::size_t n_classes = 0;

  std::size_t size() const { return tasks.size(); }
  /// The first `count` tasks.
  TaskStream prefix(std::size_t count) const;
};

/// Seeded Gaussian class blobs. Labels are balanced: sample i has class i mod C.
///  permuted:      one base set; task k applies a fixed feature permutation
///                 (task 1 uses the identity).
///  rotated:       task k rotates the class means by (k-1)*pi/n_tasks inside a
///                 seeded coordinate plane shared by all tasks; per-sample noise
///                 is shared across tasks.
///  split_classes: n_classes*n_tasks base classes; task k takes its own block
///                 of n_classes and relabels it to [0, n_classes).
///  csv:           delegates to load_csv(csv_paths).
TaskStream generate(const StreamSpec& spec);

struct CsvSchema {
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
  /// 0 infers max(label) + 1 over all files.
  std::size_t n_classes = 0;
};

/// One task per file. Each file has a header whose last column is "label",
/// numeric feature columns, and integer labels.
TaskStream load_csv(const std::vector<std::string>& paths, const CsvSchema& schema);

/// Rotation by `angle` in the (axis_a, axis_b) coordinate plane.
Eigen::MatrixXd plane_rotation(std::size_t dim, std::size_t axis_a, std::size_t axis_b,
                               double angle);

/// The plane `generate` rotates in, for a given stream seed and dimension.
std::pair<std::size_t, std::size_t> rotation_plane(std::uint64_t seed, std::size_t dim);

}  // namespace mgem
