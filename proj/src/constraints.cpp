// SPDX-License-Identifier: Apache-2.0
#include "mgem/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mgem/error.hpp"
#include "mgem/rng.hpp"

namespace mgem {

namespace {

// Sizes of `groups` near-equal parts of `total`, remainder to the front.
std::vector<std::size_t> near_equal_sizes(std::size_t total, std::size_t groups) {
  std::vector<std::size_t> sizes(groups, total / groups);
  for (std::size_t i = 0; i < total % groups; ++i) ++sizes[i];
  return sizes;
}

}  // namespace

std::string to_string(MethodKind k) {
  switch (k) {
    case MethodKind::single: return "single";
    case MethodKind::gem: return "gem";
    case MethodKind::p_mgem: return "p_mgem";
    case MethodKind::d_mgem: return "d_mgem";
    case MethodKind::md_mgem: return "md_mgem";
  }
  return "unknown";
}

std::string to_string(SolverKind k) { return k == SolverKind::exact ? "exact" : "approx"; }

MethodKind method_from_string(const std::string& s) {
  if (s == "single") return MethodKind::single;
  if (s == "gem") return MethodKind::gem;
  if (s == "p_mgem") return MethodKind::p_mgem;
  if (s == "d_mgem") return MethodKind::d_mgem;
  if (s == "md_mgem") return MethodKind::md_mgem;
  throw Error(ErrorCode::invalid_argument, "unknown method '" + s + "'");
}

SolverKind solver_from_string(const std::string& s) {
  if (s == "exact") return SolverKind::exact;
  if (s == "approx") return SolverKind::approx;
  throw Error(ErrorCode::invalid_argument, "unknown solver '" + s + "'");
}

std::string to_string(PartitionMode m) {
  return m == PartitionMode::by_layer ? "by_layer" : "equal_flat";
}

PartitionMode partition_from_string(const std::string& s) {
  if (s == "by_layer") return PartitionMode::by_layer;
  if (s == "equal_flat") return PartitionMode::equal_flat;
  throw Error(ErrorCode::invalid_argument, "unknown partition mode '" + s + "'");
}

void MethodSpec::validate() const {
  require(d_param >= 1 && d_data >= 1, "module counts must be at least 1");
  require(strength >= 0.0 && std::isfinite(strength), "memory strength must be finite and >= 0");
  switch (kind) {
    case MethodKind::single:
      break;
    case MethodKind::gem:
      require(d_param == 1 && d_data == 1, "gem uses d_param = 1 and d_data = 1");
      break;
    case MethodKind::p_mgem:
      require(d_param >= 2 && d_data == 1, "p_mgem needs d_param >= 2 and d_data = 1");
      break;
    case MethodKind::d_mgem:
      require(d_data >= 2 && d_param == 1, "d_mgem needs d_data >= 2 and d_param = 1");
      break;
    case MethodKind::md_mgem:
      require(d_param >= 2 && d_data >= 2, "md_mgem needs d_param >= 2 and d_data >= 2");
      break;
  }
}

PartitionSpec resolve_partition(const LayoutPtr& layout, PartitionMode mode, std::size_t d) {
  require(layout != nullptr, "partition requires a layout");
  require(d >= 1, "number of parameter modules must be at least 1");
  PartitionSpec out;
  out.mode = mode;
  out.requested = d;
  if (mode == PartitionMode::by_layer) {
    out.layout = layout;
    const auto names = layout->names();
    const std::size_t groups = std::min(d, names.size());
    std::size_t pos = 0;
    for (std::size_t size : near_equal_sizes(names.size(), groups)) {
      out.resolved.emplace_back(names.begin() + static_cast<std::ptrdiff_t>(pos),
                                names.begin() + static_cast<std::ptrdiff_t>(pos + size));
      pos += size;
    }
  } else {
    const std::size_t groups = std::min(d, layout->total_len());
    std::vector<std::pair<std::string, std::size_t>> named;
    for (std::size_t size : near_equal_sizes(layout->total_len(), groups)) {
      const std::string name = "F" + std::to_string(named.size());
      named.emplace_back(name, size);
      out.resolved.push_back({name});
    }
    out.layout = std::make_shared<const BlockLayout>(named);
  }
  return out;
}

std::vector<std::vector<std::size_t>> split_memory(std::size_t memory_size, std::size_t d_data,
                                                   std::uint64_t seed) {
  require(d_data >= 1, "number of memory splits must be at least 1");
  if (memory_size < d_data) {
    throw Error(ErrorCode::invalid_argument,
                "memory of " + std::to_string(memory_size) + " samples cannot be split into " +
                    std::to_string(d_data) + " groups");
  }
  std::vector<std::size_t> order(memory_size);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (d_data > 1) {
    Rng rng = make_rng(seed, streams::kMemorySplit);
    std::shuffle(order.begin(), order.end(), rng);
  }
  std::vector<std::vector<std::size_t>> splits;
  std::size_t pos = 0;
  for (std::size_t size : near_equal_sizes(memory_size, d_data)) {
    std::vector<std::size_t> part(order.begin() + static_cast<std::ptrdiff_t>(pos),
                                  order.begin() + static_cast<std::ptrdiff_t>(pos + size));
    std::sort(part.begin(), part.end());
    splits.push_back(std::move(part));
    pos += size;
  }
  return splits;
}

EpisodicMemory EpisodicMemory::create(std::size_t task, Dataset samples, std::size_t d_data,
                                      std::uint64_t seed) {
  EpisodicMemory mem;
  mem.task = task;
  mem.splits = split_memory(samples.size(), d_data, seed);
  for (const auto& s : mem.splits) mem.split_data.push_back(samples.subset(s));
  mem.samples = std::move(samples);
  return mem;
}

std::vector<ParamVector> memory_gradients(const MethodSpec& method,
                                          std::span<const EpisodicMemory> memories,
                                          const ParamVector& params, const MlpSpec& spec) {
  std::vector<ParamVector> grads;
  for (const auto& mem : memories) {
    if (mem.samples.size() == 0) {
      throw Error(ErrorCode::invalid_argument,
                  "episodic memory of task " + std::to_string(mem.task) + " is empty");
    }
    if (method.d_data == 1) {
      grads.push_back(loss_and_grad(params, spec, mem.samples).grad);
      continue;
    }
    if (mem.split_data.size() != method.d_data) {
      throw Error(ErrorCode::invalid_argument,
                  "memory of task " + std::to_string(mem.task) + " has " +
                      std::to_string(mem.split_data.size()) + " splits, method needs " +
                      std::to_string(method.d_data));
    }
    for (const auto& part : mem.split_data) grads.push_back(loss_and_grad(params, spec, part).grad);
  }
  return grads;
}

std::vector<QpInstance> instances_from_gradients(const PartitionSpec& partition,
                                                 std::span<const ParamVector> constraint_grads,
                                                 std::span<const RowTag> tags,
                                                 const ParamVector& current_grad, double strength) {
  require(partition.layout != nullptr, "partition is unresolved");
  if (partition.layout->total_len() != current_grad.size()) {
    throw ShapeError("partition layout does not match the gradient length");
  }
  require(tags.size() == constraint_grads.size(), "one tag per constraint gradient required");
  const ParamVector target_view = current_grad.relabeled(partition.layout);
  std::vector<ParamVector> grad_views;
  grad_views.reserve(constraint_grads.size());
  for (const auto& g : constraint_grads) grad_views.push_back(g.relabeled(partition.layout));

  std::vector<QpInstance> out;
  out.reserve(partition.modules());
  const auto m = static_cast<Eigen::Index>(constraint_grads.size());
  for (std::size_t p = 0; p < partition.modules(); ++p) {
    const auto& ids = partition.resolved[p];
    QpInstance inst;
    inst.target = block_view(target_view, ids);
    inst.rows.resize(m, inst.target.size());
    for (Eigen::Index k = 0; k < m; ++k) {
      inst.rows.row(k) = block_view(grad_views[static_cast<std::size_t>(k)], ids).transpose();
      RowTag tag = tags[static_cast<std::size_t>(k)];
      tag.module = p;
      inst.tags.push_back(tag);
    }
    inst.strength = Eigen::VectorXd::Constant(m, strength);
    inst.form = DualForm::box_lower_bound;
    drop_degenerate_rows(inst);
    out.push_back(std::move(inst));
  }
  return out;
}

std::vector<QpInstance> build_instances(const MethodSpec& method, const PartitionSpec& partition,
                                        std::span<const EpisodicMemory> memories,
                                        const ParamVector& current_grad, const ParamVector& params,
                                        const MlpSpec& spec) {
  require(method.d_param >= 1 && method.d_data >= 1, "module counts must be at least 1");
  if (!method.constrained() || memories.empty()) return {};
  if (partition.modules() == 0) throw Error(ErrorCode::invalid_argument, "partition is empty");

  const auto grads = memory_gradients(method, memories, params, spec);
  std::vector<RowTag> tags;
  for (const auto& mem : memories) {
    const std::size_t splits = method.d_data == 1 ? 1 : method.d_data;
    for (std::size_t d = 0; d < splits; ++d) tags.push_back(RowTag{mem.task, d, 0});
  }
  return instances_from_gradients(partition, grads, tags, current_grad, method.strength);
}

ParamVector assemble_direction(const PartitionSpec& partition,
                               std::span<const DualSolution> solutions,
                               const ParamVector& current_grad) {
  ParamVector z = current_grad;
  if (solutions.empty()) return z;
  if (solutions.size() != partition.modules()) {
    throw ShapeError("got " + std::to_string(solutions.size()) + " module solutions for " +
                     std::to_string(partition.modules()) + " modules");
  }
  if (partition.layout->total_len() != current_grad.size()) {
    throw ShapeError("partition layout does not match the gradient length");
  }
  ParamVector view = z.relabeled(partition.layout);
  for (std::size_t p = 0; p < solutions.size(); ++p) {
    scatter_blocks(view, partition.resolved[p], solutions[p].direction);
  }
  return ParamVector(current_grad.layout_ptr(), std::move(view.data()));
}

}  // namespace mgem
