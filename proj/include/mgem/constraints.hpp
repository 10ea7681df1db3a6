// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mgem/mlp.hpp"
#include "mgem/param.hpp"
#include "mgem/qp.hpp"

namespace mgem {

enum class MethodKind { single, gem, p_mgem, d_mgem, md_mgem };
enum class SolverKind { exact, approx };

std::string to_string(MethodKind k);
std::string to_string(SolverKind k);
MethodKind method_from_string(const std::string& s);
SolverKind solver_from_string(const std::string& s);

struct MethodSpec {
  MethodKind kind = MethodKind::gem;
  std::size_t d_param = 1;
  std::size_t d_data = 1;
  double strength = 0.0;  // memory strength q, broadcast to every constraint
  SolverKind solver = SolverKind::exact;

  /// Enforces the naming rules: gem has one module of each kind, p_mgem has
  /// d_param >= 2, d_mgem has d_data >= 2, md_mgem has both.
  void validate() const;

  bool constrained() const { return kind != MethodKind::single; }

  bool operator==(const MethodSpec&) const = default;
};

enum class PartitionMode { by_layer, equal_flat };

std::string to_string(PartitionMode m);
PartitionMode partition_from_string(const std::string& s);

/// Parameter modules. `resolved[i]` names the blocks of module i in `layout`,
/// which is the network layout for by_layer and a synthetic flat layout
/// ("F0", "F1", ...) for equal_flat.
struct PartitionSpec {
  PartitionMode mode = PartitionMode::by_layer;
  std::size_t requested = 1;
  LayoutPtr layout;
  std::vector<std::vector<std::string>> resolved;

  std::size_t modules() const { return resolved.size(); }
};

/// by_layer: consecutive blocks in min(d, #blocks) near-equal groups, the
/// remainder going to the earliest groups. equal_flat: min(d, total_len)
/// contiguous index ranges sized the same way.
PartitionSpec resolve_partition(const LayoutPtr& layout, PartitionMode mode, std::size_t d);

/// Seeded shuffle of 0..memory_size-1, then contiguous near-equal split.
std::vector<std::vector<std::size_t>> split_memory(std::size_t memory_size, std::size_t d_data,
                                                   std::uint64_t seed);

/// Stored samples of one finished task, with their fixed split assignment.
struct EpisodicMemory {
  std::size_t task = 0;  // descriptor of the task the samples came from
  Dataset samples;
  std::vector<std::vector<std::size_t>> splits;
  std::vector<Dataset> split_data;  // samples.subset(splits[d])

  static EpisodicMemory create(std::size_t task, Dataset samples, std::size_t d_data,
                               std::uint64_t seed);
};

/// One QP per parameter module. Rows are ordered by past task, then memory
/// split. Degenerate rows are dropped (counted in QpInstance::dropped_rows).
/// Returns no instances when `memories` is empty or the method is `single`.
std::vector<QpInstance> build_instances(const MethodSpec& method, const PartitionSpec& partition,
                                        std::span<const EpisodicMemory> memories,
                                        const ParamVector& current_grad, const ParamVector& params,
                                        const MlpSpec& spec);

/// Memory gradients used by build_instances, one per (task, split) in row
/// order. Split gradients are used when method.d_data > 1.
std::vector<ParamVector> memory_gradients(const MethodSpec& method,
                                          std::span<const EpisodicMemory> memories,
                                          const ParamVector& params, const MlpSpec& spec);

/// Slices full-length gradients into per-module instances.
std::vector<QpInstance> instances_from_gradients(const PartitionSpec& partition,
                                                 std::span<const ParamVector> constraint_grads,
                                                 std::span<const RowTag> tags,
                                                 const ParamVector& current_grad, double strength);

/// Scatters module directions into a full-length vector. Coordinates outside
/// every module keep the value of `current_grad`. With no solutions the
/// result is current_grad.
ParamVector assemble_direction(const PartitionSpec& partition,
                               std::span<const DualSolution> solutions,
                               const ParamVector& current_grad);

}  // namespace mgem
