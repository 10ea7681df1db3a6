// SPDX-License-Identifier: Apache-2.0
#include "mgem/instances.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "mgem/error.hpp"

namespace mgem {

namespace {

std::size_t uniform_index(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

double uniform_real(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Dataset blob_dataset(Rng& rng, std::size_t n, std::size_t features, std::size_t classes,
                     const Eigen::MatrixXd& means) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Dataset d;
  d.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(features));
  d.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int y = static_cast<int>(uniform_index(rng, 0, classes - 1));
    d.labels[i] = y;
    for (std::size_t c = 0; c < features; ++c) {
      d.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
          means(y, static_cast<Eigen::Index>(c)) + 0.7 * normal(rng);
    }
  }
  return d;
}

Eigen::MatrixXd random_means(Rng& rng, std::size_t classes, std::size_t features) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(classes), static_cast<Eigen::Index>(features));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = normal(rng);
  }
  return m;
}

bool has_degenerate_row(const QpInstance& inst) { return inst.dropped_rows > 0; }

}  // namespace

QpInstance random_qp(Rng& rng, const RandomQpOptions& options) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t n = uniform_index(rng, 1, options.max_n);
  const std::size_t m = uniform_index(rng, options.min_m, options.max_m);
  QpInstance inst;
  inst.form = options.form;
  inst.rows.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  inst.target.resize(static_cast<Eigen::Index>(n));
  inst.strength.resize(static_cast<Eigen::Index>(m));
  for (Eigen::Index k = 0; k < inst.rows.rows(); ++k) {
    for (Eigen::Index j = 0; j < inst.rows.cols(); ++j) inst.rows(k, j) = normal(rng);
  }
  for (Eigen::Index j = 0; j < inst.target.size(); ++j) inst.target[j] = normal(rng);
  for (Eigen::Index k = 0; k < inst.strength.size(); ++k) {
    inst.strength[k] = options.q_values[uniform_index(rng, 0, options.q_values.size() - 1)];
  }
  return inst;
}

GradientCase make_gradient_case(std::uint64_t seed, const GradientCaseOptions& options) {
  Rng rng = make_rng(seed, streams::kSelfcheck);
  GradientCase c;
  const std::size_t input = uniform_index(rng, 3, 6);
  const std::size_t classes = uniform_index(rng, 2, 4);
  c.spec.layer_sizes.push_back(input);
  const std::size_t hidden_layers = uniform_index(rng, 1, 2);
  for (std::size_t h = 0; h < hidden_layers; ++h) c.spec.layer_sizes.push_back(uniform_index(rng, 3, 8));
  c.spec.layer_sizes.push_back(classes);
  c.spec.activation = uniform_index(rng, 0, 1) == 0 ? Activation::relu : Activation::tanh;

  c.params = init_params(c.spec, rng());
  std::normal_distribution<double> normal(0.0, 0.1);
  for (const auto& b : c.params.layout().blocks()) {
    if (b.name.ends_with(".b")) {
      auto blk = c.params.block(b.name);
      for (Eigen::Index i = 0; i < blk.size(); ++i) blk[i] = normal(rng);
    }
  }

  const Eigen::MatrixXd current_means = random_means(rng, classes, input);
  c.batch = blob_dataset(rng, options.batch_size, input, classes, current_means);
  c.current_grad = loss_and_grad(c.params, c.spec, c.batch).grad;
  for (std::size_t s = 0; s < options.past_tasks; ++s) {
    const Eigen::MatrixXd means = random_means(rng, classes, input);
    Dataset mem = blob_dataset(rng, options.memory_size, input, classes, means);
    c.memories.push_back(EpisodicMemory::create(s + 1, std::move(mem), options.d_data, rng()));
  }
  return c;
}

Eigen::VectorXd finite_difference_gradient(const ParamVector& params, const MlpSpec& spec,
                                           const Dataset& data, double step) {
  ParamVector probe = params;
  Eigen::VectorXd out(params.data().size());
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    const double orig = probe.data()[i];
    probe.data()[i] = orig + step;
    const double up = loss(probe, spec, data);
    probe.data()[i] = orig - step;
    const double down = loss(probe, spec, data);
    probe.data()[i] = orig;
    out[i] = (up - down) / (2.0 * step);
  }
  return out;
}

double max_relative_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double floor) {
  if (a.size() != b.size()) throw ShapeError("vectors differ in length");
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double denom = std::max({std::abs(a[i]), std::abs(b[i]), floor});
    worst = std::max(worst, std::abs(a[i] - b[i]) / denom);
  }
  return worst;
}

double block_separability_deviation(std::uint64_t seed) {
  Rng rng = make_rng(seed, streams::kSelfcheck + 1);
  GradientCaseOptions opts;
  opts.past_tasks = uniform_index(rng, 1, 3);
  GradientCase c = make_gradient_case(seed, opts);
  const std::size_t d = uniform_index(rng, 2, 4);
  const PartitionSpec partition =
      resolve_partition(c.params.layout_ptr(), PartitionMode::by_layer, d);

  const bool regularized = uniform_index(rng, 0, 1) == 1;
  const double q = regularized ? 0.0 : std::vector<double>{0.0, 0.1, 0.5}[uniform_index(rng, 0, 2)];
  MethodSpec method{MethodKind::p_mgem, d, 1, q, SolverKind::exact};
  auto modules = build_instances(method, partition, c.memories, c.current_grad, c.params, c.spec);

  // Joint system: each module row embedded into a full-length row.
  std::size_t total_rows = 0;
  for (auto& inst : modules) {
    if (regularized) {
      inst.form = DualForm::linear_regularized;
      for (Eigen::Index k = 0; k < inst.strength.size(); ++k) {
        inst.strength[k] = uniform_real(rng, 0.0, 0.05);
      }
    }
    total_rows += inst.m();
  }
  QpInstance joint;
  joint.form = regularized ? DualForm::linear_regularized : DualForm::box_lower_bound;
  joint.target = c.current_grad.data();
  joint.rows = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(total_rows), joint.target.size());
  joint.strength.resize(static_cast<Eigen::Index>(total_rows));
  Eigen::Index row = 0;
  for (std::size_t p = 0; p < modules.size(); ++p) {
    for (Eigen::Index k = 0; k < modules[p].rows.rows(); ++k, ++row) {
      ParamVector embed = ParamVector::zeros(partition.layout);
      scatter_blocks(embed, partition.resolved[p], modules[p].rows.row(k).transpose());
      joint.rows.row(row) = embed.data().transpose();
      joint.strength[row] = modules[p].strength[k];
    }
  }

  std::vector<DualSolution> per_module;
  for (const auto& inst : modules) per_module.push_back(solve_exact(inst));
  const ParamVector stitched = assemble_direction(partition, per_module, c.current_grad);
  const DualSolution joint_sol = solve_exact(joint);
  return (joint_sol.direction - stitched.data()).cwiseAbs().maxCoeff();
}

OrderingCase ordering_case(std::uint64_t seed) {
  Rng rng = make_rng(seed, streams::kSelfcheck + 2);
  for (std::uint64_t attempt = 0; attempt < 100; ++attempt) {
    const std::size_t d_splits = uniform_index(rng, 2, 3);
    GradientCaseOptions opts;
    opts.past_tasks = 1;
    opts.d_data = d_splits;
    opts.memory_size = 24;  // divisible by 2 and 3, so splits are equal-sized
    GradientCase c = make_gradient_case(derive_seed(seed, attempt), opts);
    const std::size_t blocks = c.params.layout().size();
    const std::size_t p_modules = uniform_index(rng, 2, blocks);

    const ParamVector& g = c.current_grad;
    const MethodSpec full{MethodKind::gem, 1, 1, 0.0, SolverKind::exact};
    const MethodSpec split{MethodKind::d_mgem, 1, d_splits, 0.0, SolverKind::exact};
    const ParamVector mem_grad = memory_gradients(full, c.memories, c.params, c.spec).front();

    const double scale = mem_grad.data().norm() * g.data().norm();
    const double gamma = uniform_real(rng, 0.0, 0.5) * scale;

    auto regularized = [](QpInstance inst, const Eigen::VectorXd& gammas) {
      inst.form = DualForm::linear_regularized;
      inst.strength = gammas;
      return inst;
    };

    const PartitionSpec whole = resolve_partition(c.params.layout_ptr(), PartitionMode::by_layer, 1);
    const PartitionSpec modules =
        resolve_partition(c.params.layout_ptr(), PartitionMode::by_layer, p_modules);

    auto base = build_instances(full, whole, c.memories, g, c.params, c.spec);
    auto per_module = build_instances(full, modules, c.memories, g, c.params, c.spec);
    auto splits = build_instances(split, whole, c.memories, g, c.params, c.spec);
    bool degenerate = has_degenerate_row(base.front()) || has_degenerate_row(splits.front());
    for (const auto& inst : per_module) degenerate = degenerate || has_degenerate_row(inst);
    if (degenerate) continue;

    OrderingCase out;
    out.gamma = gamma;
    out.p_modules = p_modules;
    out.d_splits = d_splits;
    auto inner = [&](const Eigen::VectorXd& z) { return mem_grad.data().dot(z); };
    auto solve = [&](const QpInstance& inst) {
      DualSolution s = solve_exact(inst);
      out.all_converged = out.all_converged && s.converged;
      return s;
    };

    out.gem = inner(solve(regularized(base.front(), Eigen::VectorXd::Zero(1))).direction);
    out.memory_strength =
        inner(solve(regularized(base.front(), Eigen::VectorXd::Constant(1, gamma))).direction);

    // Module strengths: positive weights rescaled so they sum to at least gamma.
    Eigen::VectorXd weights(static_cast<Eigen::Index>(p_modules));
    for (Eigen::Index d = 0; d < weights.size(); ++d) weights[d] = uniform_real(rng, 0.1, 1.0);
    weights /= weights.sum();
    std::vector<DualSolution> module_solutions;
    for (std::size_t d = 0; d < p_modules; ++d) {
      const double gamma_d = gamma * weights[static_cast<Eigen::Index>(d)] * uniform_real(rng, 1.0, 1.5);
      module_solutions.push_back(
          solve(regularized(per_module[d], Eigen::VectorXd::Constant(1, gamma_d))));
    }
    out.p_mgem = inner(assemble_direction(modules, module_solutions, g).data());

    Eigen::VectorXd split_gammas(static_cast<Eigen::Index>(d_splits));
    for (Eigen::Index d = 0; d < split_gammas.size(); ++d) {
      split_gammas[d] = gamma * uniform_real(rng, 1.0, 1.5);
    }
    out.d_mgem = inner(solve(regularized(splits.front(), split_gammas)).direction);
    return out;
  }
  throw Error(ErrorCode::solver, "could not draw a non-degenerate ordering case");
}

}  // namespace mgem
