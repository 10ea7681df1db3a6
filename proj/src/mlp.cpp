// SPDX-License-Identifier: Apache-2.0
#include "mgem/mlp.hpp"

#include <cmath>
#include <random>

#include "mgem/error.hpp"
#include "mgem/rng.hpp"

namespace mgem {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstWeights = Eigen::Map<const RowMatrix>;
using Weights = Eigen::Map<RowMatrix>;

void check_params(const ParamVector& params, const MlpSpec& spec) {
  spec.validate();
  std::size_t expected = 0;
  for (std::size_t l = 0; l < spec.n_layers(); ++l) {
    expected += spec.layer_sizes[l] * spec.layer_sizes[l + 1] + spec.layer_sizes[l + 1];
  }
  if (params.size() != expected || params.layout().size() != 2 * spec.n_layers()) {
    throw ShapeError("parameter vector of length " + std::to_string(params.size()) +
                     " does not fit the network (expected " + std::to_string(expected) + ")");
  }
}

void check_features(const Eigen::MatrixXd& features, const MlpSpec& spec) {
  if (static_cast<std::size_t>(features.cols()) != spec.input_size()) {
    throw ShapeError("feature dimension " + std::to_string(features.cols()) +
                     " does not match network input " + std::to_string(spec.input_size()));
  }
}

void check_dataset(const Dataset& data, const MlpSpec& spec) {
  check_features(data.features, spec);
  if (data.size() == 0) throw ShapeError("dataset is empty");
  if (static_cast<std::size_t>(data.features.rows()) != data.size()) {
    throw ShapeError("dataset has " + std::to_string(data.features.rows()) + " feature rows but " +
                     std::to_string(data.size()) + " labels");
  }
  const int n_classes = static_cast<int>(spec.n_classes());
  for (int y : data.labels) {
    if (y < 0 || y >= n_classes) {
      throw ShapeError("label " + std::to_string(y) + " outside [0, " +
                       std::to_string(n_classes) + ")");
    }
  }
}

// Pointers into the flat vector for layer l.
struct LayerRef {
  std::size_t w_offset;
  std::size_t b_offset;
  std::size_t in;
  std::size_t out;
};

std::vector<LayerRef> layer_refs(const MlpSpec& spec) {
  std::vector<LayerRef> refs;
  std::size_t offset = 0;
  for (std::size_t l = 0; l < spec.n_layers(); ++l) {
    const std::size_t in = spec.layer_sizes[l];
    const std::size_t out = spec.layer_sizes[l + 1];
    refs.push_back({offset, offset + in * out, in, out});
    offset += in * out + out;
  }
  return refs;
}

void activate(Eigen::MatrixXd& z, Activation a) {
  if (a == Activation::relu) {
    z = z.cwiseMax(0.0);
  } else {
    z = z.array().tanh().matrix();
  }
}

// Forward pass keeping every layer's activations (input included).
std::vector<Eigen::MatrixXd> forward(const ParamVector& params, const MlpSpec& spec,
                                     const Eigen::MatrixXd& features) {
  const auto refs = layer_refs(spec);
  std::vector<Eigen::MatrixXd> acts;
  acts.reserve(refs.size() + 1);
  acts.push_back(features);
  const double* base = params.data().data();
  for (std::size_t l = 0; l < refs.size(); ++l) {
    const auto& r = refs[l];
    ConstWeights w(base + r.w_offset, static_cast<Eigen::Index>(r.out),
                   static_cast<Eigen::Index>(r.in));
    Eigen::Map<const Eigen::RowVectorXd> b(base + r.b_offset, static_cast<Eigen::Index>(r.out));
    Eigen::MatrixXd z = acts.back() * w.transpose();
    z.rowwise() += b;
    if (l + 1 < refs.size()) activate(z, spec.activation);
    acts.push_back(std::move(z));
  }
  return acts;
}

// Log-softmax rows (numerically stable).
Eigen::MatrixXd log_softmax(const Eigen::MatrixXd& logits) {
  Eigen::VectorXd row_max = logits.rowwise().maxCoeff();
  Eigen::MatrixXd shifted = logits.colwise() - row_max;
  Eigen::VectorXd lse = shifted.array().exp().rowwise().sum().log().matrix();
  return shifted.colwise() - lse;
}

double mean_nll(const Eigen::MatrixXd& log_probs, const std::vector<int>& labels) {
  double total = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    total -= log_probs(static_cast<Eigen::Index>(i), labels[i]);
  }
  return total / static_cast<double>(labels.size());
}

}  // namespace

std::string to_string(Activation a) { return a == Activation::relu ? "relu" : "tanh"; }

Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::relu;
  if (s == "tanh") return Activation::tanh;
  throw Error(ErrorCode::invalid_argument, "unknown activation '" + s + "'");
}

void MlpSpec::validate() const {
  require(layer_sizes.size() >= 2, "network needs at least input and output sizes");
  for (std::size_t s : layer_sizes) require(s > 0, "layer sizes must be positive");
  require(layer_sizes.back() >= 2, "network needs at least two output classes");
}

LayoutPtr MlpSpec::layout() const {
  validate();
  std::vector<std::pair<std::string, std::size_t>> named;
  for (std::size_t l = 0; l < n_layers(); ++l) {
    const std::string prefix = "L" + std::to_string(l);
    named.emplace_back(prefix + ".w", layer_sizes[l] * layer_sizes[l + 1]);
    named.emplace_back(prefix + ".b", layer_sizes[l + 1]);
  }
  return std::make_shared<const BlockLayout>(named);
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.features.resize(static_cast<Eigen::Index>(indices.size()), features.cols());
  out.labels.reserve(indices.size());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    require(indices[r] < size(), "subset index out of range");
    out.features.row(static_cast<Eigen::Index>(r)) =
        features.row(static_cast<Eigen::Index>(indices[r]));
    out.labels.push_back(labels[indices[r]]);
  }
  return out;
}

ParamVector init_params(const MlpSpec& spec, std::uint64_t seed) {
  auto layout = spec.layout();
  ParamVector params = ParamVector::zeros(layout);
  Rng rng = make_rng(seed, streams::kInit);
  for (const auto& r : layer_refs(spec)) {
    const double s = std::sqrt(6.0 / static_cast<double>(r.in + r.out));
    std::uniform_real_distribution<double> dist(-s, s);
    for (std::size_t k = 0; k < r.in * r.out; ++k) {
      params.data()[static_cast<Eigen::Index>(r.w_offset + k)] = dist(rng);
    }
  }
  return params;
}

Eigen::MatrixXd logits(const ParamVector& params, const MlpSpec& spec,
                       const Eigen::MatrixXd& features) {
  check_params(params, spec);
  check_features(features, spec);
  return std::move(forward(params, spec, features).back());
}

double loss(const ParamVector& params, const MlpSpec& spec, const Dataset& data) {
  check_params(params, spec);
  check_dataset(data, spec);
  return mean_nll(log_softmax(forward(params, spec, data.features).back()), data.labels);
}

LossGrad loss_and_grad(const ParamVector& params, const MlpSpec& spec, const Dataset& data) {
  check_params(params, spec);
  check_dataset(data, spec);
  const auto refs = layer_refs(spec);
  auto acts = forward(params, spec, data.features);

  const Eigen::MatrixXd log_probs = log_softmax(acts.back());
  LossGrad out{mean_nll(log_probs, data.labels), ParamVector::zeros(params.layout_ptr())};

  const double inv_n = 1.0 / static_cast<double>(data.size());
  Eigen::MatrixXd delta = log_probs.array().exp().matrix();
  for (std::size_t i = 0; i < data.size(); ++i) {
    delta(static_cast<Eigen::Index>(i), data.labels[i]) -= 1.0;
  }
  delta *= inv_n;

  const double* base = params.data().data();
  double* grad = out.grad.data().data();
  for (std::size_t l = refs.size(); l-- > 0;) {
    const auto& r = refs[l];
    const auto in = static_cast<Eigen::Index>(r.in);
    const auto n_out = static_cast<Eigen::Index>(r.out);
    Weights dw(grad + r.w_offset, n_out, in);
    Eigen::Map<Eigen::RowVectorXd> db(grad + r.b_offset, n_out);
    dw.noalias() = delta.transpose() * acts[l];
    db = delta.colwise().sum();
    if (l == 0) break;
    ConstWeights w(base + r.w_offset, n_out, in);
    Eigen::MatrixXd upstream = delta * w;
    const Eigen::MatrixXd& a = acts[l];
    if (spec.activation == Activation::relu) {
      delta = (a.array() > 0.0).select(upstream, 0.0);
    } else {
      delta = (upstream.array() * (1.0 - a.array().square())).matrix();
    }
  }
  return out;
}

std::vector<int> argmax_rows(const Eigen::MatrixXd& scores) {
  std::vector<int> out(static_cast<std::size_t>(scores.rows()));
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < scores.cols(); ++c) {
      if (scores(i, c) > scores(i, best)) best = c;
    }
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

std::vector<int> predict(const ParamVector& params, const MlpSpec& spec,
                         const Eigen::MatrixXd& features) {
  return argmax_rows(logits(params, spec, features));
}

double accuracy(const ParamVector& params, const MlpSpec& spec, const Dataset& data) {
  check_dataset(data, spec);
  const auto pred = predict(params, spec, data.features);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) correct += (pred[i] == data.labels[i]);
  return static_cast<double>(correct) / static_cast<double>(pred.size());
}

}  // namespace mgem
