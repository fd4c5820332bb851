#include "geoquery/geocell/partition.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace geoquery::geocell {

namespace {

struct KeyedPoint {
  std::uint64_t key;
  GeoPoint point;
};

struct Leaf {
  CellId cell;
  std::size_t begin;
  std::size_t end;
};

// Splits [begin, end) of the key-sorted points, which is exactly `cell`'s range.
void split_cell(const std::vector<KeyedPoint>& sorted, const CellId& cell, std::size_t begin,
                std::size_t end, std::int64_t t_min, std::int64_t t_max, std::vector<Leaf>& leaves) {
  const auto count = static_cast<std::int64_t>(end - begin);
  if (count == 0) return;
  if (count > t_max && cell.depth < kMaxDepth) {
    auto lo = begin;
    for (const auto& child : cell.children()) {
      const auto hi_key = child.range_end();
      const auto hi = static_cast<std::size_t>(
          std::lower_bound(sorted.begin() + static_cast<std::ptrdiff_t>(lo),
                           sorted.begin() + static_cast<std::ptrdiff_t>(end), hi_key,
                           [](const KeyedPoint& kp, std::uint64_t k) { return kp.key < k; }) -
          sorted.begin());
      split_cell(sorted, child, lo, hi, t_min, t_max, leaves);
      lo = hi;
    }
    return;
  }
  if (count >= t_min) leaves.push_back({cell, begin, end});
}

}  // namespace

std::optional<std::size_t> HierarchyPartition::find_class(const GeoPoint& p) const {
  const auto leaf = cell_from_leaf_key(leaf_key(p));
  for (int d : depths_) {
    if (auto it = class_of_cell.find(leaf.ancestor(d)); it != class_of_cell.end()) return it->second;
  }
  return std::nullopt;
}

void HierarchyPartition::reindex() {
  class_of_cell.clear();
  depths_.clear();
  for (std::size_t c = 0; c < classes.size(); ++c) {
    class_of_cell.emplace(classes[c], c);
    depths_.push_back(classes[c].depth);
  }
  std::sort(depths_.begin(), depths_.end());
  depths_.erase(std::unique(depths_.begin(), depths_.end()), depths_.end());
}

HierarchyPartition build_hierarchy(std::span<const GeoPoint> points, std::int64_t t_min,
                                   std::int64_t t_max, int level) {
  if (t_min < 1) throw std::invalid_argument("t_min must be at least 1");
  if (t_max < t_min) throw std::invalid_argument("t_max must be at least t_min");

  std::vector<KeyedPoint> sorted;
  sorted.reserve(points.size());
  for (const auto& p : points) sorted.push_back({leaf_key(p), p});
  // Secondary keys make member order (and thus centroid rounding) canonical.
  std::sort(sorted.begin(), sorted.end(), [](const KeyedPoint& a, const KeyedPoint& b) {
    if (a.key != b.key) return a.key < b.key;
    if (a.point.lat_deg() != b.point.lat_deg()) return a.point.lat_deg() < b.point.lat_deg();
    return a.point.lon_deg() < b.point.lon_deg();
  });

  std::vector<Leaf> leaves;
  std::size_t lo = 0;
  for (std::uint8_t face = 0; face < 6; ++face) {
    const CellId root{face, 0, 0, 0};
    const auto hi = static_cast<std::size_t>(
        std::lower_bound(sorted.begin(), sorted.end(), root.range_end(),
                         [](const KeyedPoint& kp, std::uint64_t k) { return kp.key < k; }) -
        sorted.begin());
    split_cell(sorted, root, lo, hi, t_min, t_max, leaves);
    lo = hi;
  }
  std::sort(leaves.begin(), leaves.end(),
            [](const Leaf& a, const Leaf& b) { return a.cell < b.cell; });

  HierarchyPartition out;
  out.level = level;
  out.t_min = t_min;
  out.t_max = t_max;
  std::vector<GeoPoint> members;
  for (const auto& leaf : leaves) {
    members.clear();
    for (auto k = leaf.begin; k < leaf.end; ++k) members.push_back(sorted[k].point);
    out.classes.push_back(leaf.cell);
    out.counts.push_back(static_cast<std::int64_t>(leaf.end - leaf.begin));
    out.centroids.push_back(spherical_mean(members));
  }
  out.reindex();
  return out;
}

std::vector<std::size_t> PartitionStack::class_counts() const {
  std::vector<std::size_t> out;
  for (const auto& h : hierarchies) out.push_back(h.size());
  return out;
}

std::vector<std::int64_t> default_t_max(std::size_t hierarchy_count) {
  const auto full = kDefaultTMax.size();
  if (hierarchy_count == 0 || hierarchy_count > full) {
    throw std::invalid_argument("hierarchy count must be in [1, " + std::to_string(full) + "]");
  }
  if (hierarchy_count == 1) return {kDefaultTMax.back()};
  std::vector<std::int64_t> out;
  for (std::size_t k = 0; k < hierarchy_count; ++k) {
    const auto idx = std::lround(static_cast<double>(k * (full - 1)) /
                                 static_cast<double>(hierarchy_count - 1));
    out.push_back(kDefaultTMax[static_cast<std::size_t>(idx)]);
  }
  return out;
}

std::vector<std::vector<std::size_t>> derive_parent_maps(
    const std::vector<HierarchyPartition>& hierarchies) {
  std::vector<std::vector<std::size_t>> maps;
  for (std::size_t k = 0; k + 1 < hierarchies.size(); ++k) {
    const auto& coarse = hierarchies[k];
    const auto& fine = hierarchies[k + 1];
    std::vector<std::size_t> parents(fine.size());
    for (std::size_t c = 0; c < fine.size(); ++c) {
      const auto& cell = fine.classes[c];
      std::optional<std::size_t> found;
      for (int d = cell.depth; d >= 0 && !found; --d) {
        if (auto it = coarse.class_of_cell.find(cell.ancestor(d)); it != coarse.class_of_cell.end()) {
          found = it->second;
        }
      }
      if (!found) {
        throw std::logic_error("class " + cell.to_string() + " of hierarchy " +
                               std::to_string(fine.level) + " has no ancestor in hierarchy " +
                               std::to_string(coarse.level));
      }
      parents[c] = *found;
    }
    maps.push_back(std::move(parents));
  }
  return maps;
}

PartitionStack build_stack(std::span<const GeoPoint> points,
                           std::span<const std::int64_t> t_max_list, std::int64_t t_min) {
  if (t_max_list.empty()) throw std::invalid_argument("t_max list is empty");
  for (std::size_t k = 1; k < t_max_list.size(); ++k) {
    if (t_max_list[k] >= t_max_list[k - 1]) {
      throw std::invalid_argument("t_max list must be strictly decreasing (entry " +
                                  std::to_string(k) + ": " + std::to_string(t_max_list[k]) +
                                  " >= " + std::to_string(t_max_list[k - 1]) + ")");
    }
  }
  PartitionStack stack;
  for (std::size_t k = 0; k < t_max_list.size(); ++k) {
    stack.hierarchies.push_back(
        build_hierarchy(points, t_min, t_max_list[k], static_cast<int>(k + 1)));
  }
  stack.parent_maps = derive_parent_maps(stack.hierarchies);
  return stack;
}

LabelChain assign_labels(const GeoPoint& p, const PartitionStack& stack) {
  LabelChain out;
  out.reserve(stack.depth());
  for (const auto& h : stack.hierarchies) out.push_back(h.find_class(p));
  return out;
}

bool is_complete(const LabelChain& labels) {
  return std::all_of(labels.begin(), labels.end(), [](const auto& l) { return l.has_value(); });
}

GeoPoint class_centroid(const HierarchyPartition& partition, std::size_t class_index) {
  if (class_index >= partition.centroids.size()) {
    throw std::out_of_range("class " + std::to_string(class_index) + " not in hierarchy " +
                            std::to_string(partition.level) + " (" +
                            std::to_string(partition.centroids.size()) + " classes)");
  }
  return partition.centroids[class_index];
}

}  // namespace geoquery::geocell
