#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "geoquery/geocell/cell_id.hpp"
#include "geoquery/geocell/geo_point.hpp"

namespace geoquery::geocell {

/// One granularity level: the retained quadtree leaves become classes.
struct HierarchyPartition {
  int level = 1;
  std::int64_t t_max = 0;
  std::int64_t t_min = 1;
  /// Canonical (face, depth, i, j) order; the position is the class index.
  std::vector<CellId> classes;
  std::unordered_map<CellId, std::size_t, CellIdHash> class_of_cell;
  std::vector<GeoPoint> centroids;
  std::vector<std::int64_t> counts;

  std::size_t size() const { return classes.size(); }

  /// Class whose cell contains p, if that region was retained.
  std::optional<std::size_t> find_class(const GeoPoint& p) const;

  /// Rebuilds class_of_cell and the depth index from `classes`.
  void reindex();

 private:
  std::vector<int> depths_;
};

/**
 * Builds one hierarchy: starting from the six face cells, any cell holding
 * more than t_max points is split into its four children (never beyond
 * kMaxDepth); leaves with fewer than t_min points are dropped.
 *
 * The result depends only on the multiset of points, not their order.
 * Requires 1 ≤ t_min ≤ t_max.
 */
HierarchyPartition build_hierarchy(std::span<const GeoPoint> points, std::int64_t t_min,
                                   std::int64_t t_max, int level = 1);

/// Hierarchies ordered coarse to fine plus fine→coarse parent maps.
struct PartitionStack {
  std::vector<HierarchyPartition> hierarchies;
  /// parent_maps[k][c] is the class in hierarchies[k] containing class c of
  /// hierarchies[k + 1].
  std::vector<std::vector<std::size_t>> parent_maps;

  std::size_t depth() const { return hierarchies.size(); }
  const HierarchyPartition& finest() const { return hierarchies.back(); }
  std::vector<std::size_t> class_counts() const;
};

/// Default per-hierarchy split thresholds, coarse to fine.
inline constexpr std::array<std::int64_t, 7> kDefaultTMax{25000, 10000, 5000, 2000, 1000, 750, 500};
inline constexpr std::int64_t kDefaultTMin = 50;

/// Evenly spaced subset of kDefaultTMax (always including the finest); the
/// full list for 7.
std::vector<std::int64_t> default_t_max(std::size_t hierarchy_count);

/// Throws std::invalid_argument unless t_max_list is nonempty and strictly
/// decreasing.
PartitionStack build_stack(std::span<const GeoPoint> points, std::span<const std::int64_t> t_max_list,
                           std::int64_t t_min);

/// Recomputes parent maps from cell ancestry. Throws std::logic_error when a
/// fine class has no containing coarse class.
std::vector<std::vector<std::size_t>> derive_parent_maps(
    const std::vector<HierarchyPartition>& hierarchies);

using LabelChain = std::vector<std::optional<std::size_t>>;

/// Per-hierarchy class of p, absent where p's region was dropped.
LabelChain assign_labels(const GeoPoint& p, const PartitionStack& stack);

bool is_complete(const LabelChain& labels);

/// Stored spherical mean of the class members. Throws std::out_of_range.
GeoPoint class_centroid(const HierarchyPartition& partition, std::size_t class_index);

}  // namespace geoquery::geocell
