// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace mgem {

struct Block {
  std::string name;
  std::size_t offset = 0;
  std::size_t length = 0;

  bool operator==(const Block&) const = default;
};

/// Named contiguous blocks covering [0, total_len) in order.
class BlockLayout {
 public:
  BlockLayout() = default;

  /// Builds offsets from (name, length) pairs. Names must be unique and every
  /// length positive.
  explicit BlockLayout(
      const std::vector<std::pair<std::string, std::size_t>>& named_lengths);

  std::span<const Block> blocks() const { return blocks_; }
  std::size_t size() const { return blocks_.size(); }
  std::size_t total_len() const { return total_len_; }

  std::optional<std::size_t> index_of(std::string_view name) const;
  const Block& find(std::string_view name) const;

  std::vector<std::string> names() const;

  bool operator==(const BlockLayout&) const = default;

 private:
  std::vector<Block> blocks_;
  std::size_t total_len_ = 0;
};

using LayoutPtr = std::shared_ptr<const BlockLayout>;

/// Flat parameter (or gradient, or direction) storage tied to a layout.
class ParamVector {
 public:
  ParamVector() = default;
  ParamVector(LayoutPtr layout, Eigen::VectorXd data);

  static ParamVector zeros(LayoutPtr layout);

  const BlockLayout& layout() const { return *layout_; }
  const LayoutPtr& layout_ptr() const { return layout_; }

  const Eigen::VectorXd& data() const { return data_; }
  Eigen::VectorXd& data() { return data_; }
  std::size_t size() const { return static_cast<std::size_t>(data_.size()); }

  Eigen::Map<const Eigen::VectorXd> block(std::string_view name) const;
  Eigen::Map<Eigen::VectorXd> block(std::string_view name);

  bool all_finite() const { return data_.allFinite(); }

  /// Same data under a different layout with the same total length.
  ParamVector relabeled(LayoutPtr layout) const;

 private:
  LayoutPtr layout_;
  Eigen::VectorXd data_;
};

/// Gathers the named blocks, in layout order, into one vector. Throws on an
/// empty set, duplicates, or unknown names.
Eigen::VectorXd block_view(const ParamVector& v, std::span<const std::string> block_ids);

/// Inverse of block_view: writes `values` back into the named blocks.
void scatter_blocks(ParamVector& dst, std::span<const std::string> block_ids,
                    const Eigen::VectorXd& values);

/// Index ranges (offset, length) of the named blocks in layout order.
std::vector<std::pair<std::size_t, std::size_t>> block_ranges(
    const BlockLayout& layout, std::span<const std::string> block_ids);

}  // namespace mgem
