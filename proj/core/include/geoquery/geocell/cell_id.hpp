#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <string>

#include "geoquery/geocell/geo_point.hpp"

namespace geoquery::geocell {

/// Deepest subdivision level. Cells at this depth are never split.
inline constexpr int kMaxDepth = 30;

/**
 * Node of the cube-face quadtree.
 *
 * The sphere is projected gnomonically onto the six faces of the unit cube
 * (faces 0..2 are +x, +y, +z; 3..5 are −x, −y, −z), with linear (u, v)
 * face coordinates in [0, 1). A depth-d cell covers
 * [i/2^d, (i+1)/2^d) × [j/2^d, (j+1)/2^d). Ordering is (face, depth, i, j).
 */
struct CellId {
  std::uint8_t face = 0;
  std::uint8_t depth = 0;
  std::uint32_t i = 0;
  std::uint32_t j = 0;

  auto operator<=>(const CellId&) const = default;

  CellId parent() const;
  std::array<CellId, 4> children() const;
  /// Ancestor at a shallower (or equal) depth.
  CellId ancestor(int at_depth) const;
  bool is_ancestor_or_equal_of(const CellId& other) const;

  /// First key of this cell's range in the face-prefixed Morton order.
  std::uint64_t range_begin() const;
  /// One past the last key of the range.
  std::uint64_t range_end() const;

  std::string to_string() const;
};

struct CellIdHash {
  std::size_t operator()(const CellId& c) const noexcept;
};

struct FaceUV {
  int face;
  double u;
  double v;
};

/// Face selection and linear face coordinates. Exact ties between axes go to
/// x, then y, then z; coordinates of exactly 1 fall into the last cell.
FaceUV face_uv(const GeoPoint& p);

CellId point_to_cell(const GeoPoint& p, int depth);

/// Morton key of the depth-kMaxDepth cell containing p.
std::uint64_t leaf_key(const GeoPoint& p);
/// Inverse of leaf_key at depth kMaxDepth.
CellId cell_from_leaf_key(std::uint64_t key);

}  // namespace geoquery::geocell
