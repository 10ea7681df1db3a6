// SPDX-License-Identifier: Apache-2.0
#include "mgem/param.hpp"

#include <algorithm>
#include <unordered_set>

#include "mgem/error.hpp"

namespace mgem {

BlockLayout::BlockLayout(
    const std::vector<std::pair<std::string, std::size_t>>& named_lengths) {
  std::unordered_set<std::string> seen;
  blocks_.reserve(named_lengths.size());
  for (const auto& [name, length] : named_lengths) {
    require(!name.empty(), "block name must not be empty");
    require(length > 0, "block '" + name + "' has zero length");
    require(seen.insert(name).second, "duplicate block name '" + name + "'");
    blocks_.push_back(Block{name, total_len_, length});
    total_len_ += length;
  }
}

std::optional<std::size_t> BlockLayout::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    if (blocks_[i].name == name) return i;
  }
  return std::nullopt;
}

const Block& BlockLayout::find(std::string_view name) const {
  auto idx = index_of(name);
  if (!idx) throw Error(ErrorCode::invalid_argument, "unknown block '" + std::string(name) + "'");
  return blocks_[*idx];
}

std::vector<std::string> BlockLayout::names() const {
  std::vector<std::string> out;
  out.reserve(blocks_.size());
  for (const auto& b : blocks_) out.push_back(b.name);
  return out;
}

ParamVector::ParamVector(LayoutPtr layout, Eigen::VectorXd data)
    : layout_(std::move(layout)), data_(std::move(data)) {
  require(layout_ != nullptr, "ParamVector requires a layout");
  if (static_cast<std::size_t>(data_.size()) != layout_->total_len()) {
    throw ShapeError("ParamVector: data length " + std::to_string(data_.size()) +
                     " does not match layout length " +
                     std::to_string(layout_->total_len()));
  }
}

ParamVector ParamVector::zeros(LayoutPtr layout) {
  require(layout != nullptr, "ParamVector requires a layout");
  const auto n = static_cast<Eigen::Index>(layout->total_len());
  return ParamVector(std::move(layout), Eigen::VectorXd::Zero(n));
}

Eigen::Map<const Eigen::VectorXd> ParamVector::block(std::string_view name) const {
  const Block& b = layout_->find(name);
  return {data_.data() + b.offset, static_cast<Eigen::Index>(b.length)};
}

Eigen::Map<Eigen::VectorXd> ParamVector::block(std::string_view name) {
  const Block& b = layout_->find(name);
  return {data_.data() + b.offset, static_cast<Eigen::Index>(b.length)};
}

ParamVector ParamVector::relabeled(LayoutPtr layout) const {
  return ParamVector(std::move(layout), data_);
}

std::vector<std::pair<std::size_t, std::size_t>> block_ranges(
    const BlockLayout& layout, std::span<const std::string> block_ids) {
  require(!block_ids.empty(), "block selection must not be empty");
  std::vector<std::size_t> indices;
  indices.reserve(block_ids.size());
  for (const auto& id : block_ids) {
    auto idx = layout.index_of(id);
    if (!idx) throw Error(ErrorCode::invalid_argument, "unknown block '" + id + "'");
    indices.push_back(*idx);
  }
  std::sort(indices.begin(), indices.end());
  if (std::adjacent_find(indices.begin(), indices.end()) != indices.end()) {
    throw Error(ErrorCode::invalid_argument, "duplicate block in selection");
  }
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  for (std::size_t idx : indices) {
    const Block& b = layout.blocks()[idx];
    if (!ranges.empty() && ranges.back().first + ranges.back().second == b.offset) {
      ranges.back().second += b.length;
    } else {
      ranges.emplace_back(b.offset, b.length);
    }
  }
  return ranges;
}

Eigen::VectorXd block_view(const ParamVector& v, std::span<const std::string> block_ids) {
  const auto ranges = block_ranges(v.layout(), block_ids);
  std::size_t total = 0;
  for (const auto& r : ranges) total += r.second;
  Eigen::VectorXd out(static_cast<Eigen::Index>(total));
  Eigen::Index pos = 0;
  for (const auto& [offset, length] : ranges) {
    const auto len = static_cast<Eigen::Index>(length);
    out.segment(pos, len) = v.data().segment(static_cast<Eigen::Index>(offset), len);
    pos += len;
  }
  return out;
}

void scatter_blocks(ParamVector& dst, std::span<const std::string> block_ids,
                    const Eigen::VectorXd& values) {
  const auto ranges = block_ranges(dst.layout(), block_ids);
  std::size_t total = 0;
  for (const auto& r : ranges) total += r.second;
  if (static_cast<std::size_t>(values.size()) != total) {
    throw ShapeError("scatter_blocks: got " + std::to_string(values.size()) +
                     " values for " + std::to_string(total) + " coordinates");
  }
  Eigen::Index pos = 0;
  for (const auto& [offset, length] : ranges) {
    const auto len = static_cast<Eigen::Index>(length);
    dst.data().segment(static_cast<Eigen::Index>(offset), len) = values.segment(pos, len);
    pos += len;
  }
}

}  // namespace mgem
