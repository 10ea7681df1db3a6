// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mgem/param.hpp"

namespace mgem {

enum class Activation { relu, tanh };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

/// Fully connected classifier. layer_sizes = (input, hidden..., output).
struct MlpSpec {
  std::vector<std::size_t> layer_sizes;
  Activation activation = Activation::relu;

  void validate() const;
  std::size_t n_layers() const { return layer_sizes.size() - 1; }
  std::size_t input_size() const { return layer_sizes.front(); }
  std::size_t n_classes() const { return layer_sizes.back(); }

  /// Blocks "L{i}.w" (out x in, row-major) and "L{i}.b" per layer, in order.
  LayoutPtr layout() const;
};

struct Dataset {
  Eigen::MatrixXd features;  // n_samples x n_features
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
  std::size_t n_features() const { return static_cast<std::size_t>(features.cols()); }

  Dataset subset(std::span<const std::size_t> indices) const;
};

/// Xavier-uniform weights, zero biases.
ParamVector init_params(const MlpSpec& spec, std::uint64_t seed);

struct LossGrad {
  double loss = 0.0;
  ParamVector grad;
};

/// Mean softmax cross-entropy over `data` and its gradient (one backward pass).
LossGrad loss_and_grad(const ParamVector& params, const MlpSpec& spec, const Dataset& data);

/// Forward pass only.
double loss(const ParamVector& params, const MlpSpec& spec, const Dataset& data);

Eigen::MatrixXd logits(const ParamVector& params, const MlpSpec& spec,
                       const Eigen::MatrixXd& features);

/// Row-wise argmax; ties go to the lowest class index.
std::vector<int> argmax_rows(const Eigen::MatrixXd& scores);

std::vector<int> predict(const ParamVector& params, const MlpSpec& spec,
                         const Eigen::MatrixXd& features);

/// Fraction of correctly predicted labels.
double accuracy(const ParamVector& params, const MlpSpec& spec, const Dataset& data);

}  // namespace mgem
