#include "geoquery/geocell/cell_id.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace geoquery::geocell {

namespace {

constexpr std::uint64_t kFaceShift = 2 * kMaxDepth;
constexpr std::uint32_t kLeafCells = 1u << kMaxDepth;

std::uint64_t spread_bits(std::uint32_t x) {
  std::uint64_t v = x;
  v = (v | (v << 16)) & 0x0000FFFF0000FFFFull;
  v = (v | (v << 8)) & 0x00FF00FF00FF00FFull;
  v = (v | (v << 4)) & 0x0F0F0F0F0F0F0F0Full;
  v = (v | (v << 2)) & 0x3333333333333333ull;
  v = (v | (v << 1)) & 0x5555555555555555ull;
  return v;
}

std::uint32_t compact_bits(std::uint64_t v) {
  v &= 0x5555555555555555ull;
  v = (v | (v >> 1)) & 0x3333333333333333ull;
  v = (v | (v >> 2)) & 0x0F0F0F0F0F0F0F0Full;
  v = (v | (v >> 4)) & 0x00FF00FF00FF00FFull;
  v = (v | (v >> 8)) & 0x0000FFFF0000FFFFull;
  v = (v | (v >> 16)) & 0x00000000FFFFFFFFull;
  return static_cast<std::uint32_t>(v);
}

std::uint64_t morton(int face, std::uint32_t i, std::uint32_t j) {
  return (static_cast<std::uint64_t>(face) << kFaceShift) | (spread_bits(i) << 1) | spread_bits(j);
}

std::uint32_t to_leaf_index(double s) {
  const double scaled = std::floor(s * static_cast<double>(kLeafCells));
  if (scaled <= 0) return 0;
  if (scaled >= kLeafCells) return kLeafCells - 1;
  return static_cast<std::uint32_t>(scaled);
}

}  // namespace

CellId CellId::parent() const {
  if (depth == 0) throw std::logic_error("face cell has no parent");
  return ancestor(depth - 1);
}

std::array<CellId, 4> CellId::children() const {
  if (depth >= kMaxDepth) throw std::logic_error("cell at maximum depth has no children");
  const auto d = static_cast<std::uint8_t>(depth + 1);
  return {CellId{face, d, 2 * i, 2 * j}, CellId{face, d, 2 * i, 2 * j + 1},
          CellId{face, d, 2 * i + 1, 2 * j}, CellId{face, d, 2 * i + 1, 2 * j + 1}};
}

CellId CellId::ancestor(int at_depth) const {
  if (at_depth < 0 || at_depth > depth) {
    throw std::invalid_argument("ancestor depth " + std::to_string(at_depth) + " invalid for " +
                                to_string());
  }
  const int shift = depth - at_depth;
  return CellId{face, static_cast<std::uint8_t>(at_depth), i >> shift, j >> shift};
}

bool CellId::is_ancestor_or_equal_of(const CellId& other) const {
  return face == other.face && depth <= other.depth && other.ancestor(depth) == *this;
}

std::uint64_t CellId::range_begin() const {
  const int shift = kMaxDepth - depth;
  return morton(face, i << shift, j << shift);
}

std::uint64_t CellId::range_end() const {
  return range_begin() + (std::uint64_t{1} << (2 * (kMaxDepth - depth)));
}

std::string CellId::to_string() const {
  return "cell(face=" + std::to_string(face) + ", depth=" + std::to_string(depth) +
         ", i=" + std::to_string(i) + ", j=" + std::to_string(j) + ")";
}

std::size_t CellIdHash::operator()(const CellId& c) const noexcept {
  // range_begin is unique per (face, i, j) only within a depth; fold depth in.
  return std::hash<std::uint64_t>{}(c.range_begin() ^ (static_cast<std::uint64_t>(c.depth) << 58));
}

FaceUV face_uv(const GeoPoint& p) {
  const auto xyz = to_unit_vector(p);
  const double ax = std::abs(xyz[0]);
  const double ay = std::abs(xyz[1]);
  const double az = std::abs(xyz[2]);
  int axis = 0;
  if (ay > ax) axis = 1;
  if (az > std::max(ax, ay)) axis = 2;
  const int face = axis + (xyz[axis] < 0 ? 3 : 0);
  const double x = xyz[0];
  const double y = xyz[1];
  const double z = xyz[2];
  double u = 0;
  double v = 0;
  switch (face) {
    case 0: u = y / x; v = z / x; break;
    case 1: u = -x / y; v = z / y; break;
    case 2: u = -x / z; v = -y / z; break;
    case 3: u = z / x; v = y / x; break;
    case 4: u = z / y; v = -x / y; break;
    default: u = -y / z; v = -x / z; break;
  }
  return {face, std::clamp(0.5 * (u + 1.0), 0.0, 1.0), std::clamp(0.5 * (v + 1.0), 0.0, 1.0)};
}

std::uint64_t leaf_key(const GeoPoint& p) {
  const auto f = face_uv(p);
  return morton(f.face, to_leaf_index(f.u), to_leaf_index(f.v));
}

CellId cell_from_leaf_key(std::uint64_t key) {
  const auto face = static_cast<std::uint8_t>(key >> kFaceShift);
  const auto bits = key & ((std::uint64_t{1} << kFaceShift) - 1);
  return CellId{face, static_cast<std::uint8_t>(kMaxDepth), compact_bits(bits >> 1), compact_bits(bits)};
}

CellId point_to_cell(const GeoPoint& p, int depth) {
  if (depth < 0 || depth > kMaxDepth) {
    throw std::invalid_argument("depth " + std::to_string(depth) + " outside [0, " +
                                std::to_string(kMaxDepth) + "]");
  }
  return cell_from_leaf_key(leaf_key(p)).ancestor(depth);
}

}  // namespace geoquery::geocell
