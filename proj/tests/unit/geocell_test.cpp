#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "geoquery/common/errors.hpp"
#include "geoquery/geocell/cell_id.hpp"
#include "geoquery/geocell/partition.hpp"
#include "geoquery/geocell/partition_io.hpp"
#include "point_sets.hpp"

namespace {

using namespace geoquery::geocell;
using geoquery::testing::clustered_points;
using geoquery::testing::random_sphere_point;

TEST(GeoPoint, NormalizesLongitude) {
  EXPECT_EQ(GeoPoint(0, 180).lon_deg(), -180.0);
  EXPECT_EQ(GeoPoint(0, 540).lon_deg(), -180.0);
  EXPECT_EQ(GeoPoint(0, -190).lon_deg(), 170.0);
  EXPECT_EQ(GeoPoint(0, -180).lon_deg(), -180.0);
  EXPECT_THROW(GeoPoint(91, 0), std::invalid_argument);
  EXPECT_THROW(GeoPoint(NAN, 0), std::invalid_argument);
}

TEST(PointToCell, DepthZeroIsAFaceCell) {
  std::mt19937_64 rng(1);
  for (int n = 0; n < 1000; ++n) {
    const auto c = point_to_cell(random_sphere_point(rng), 0);
    EXPECT_LT(c.face, 6);
    EXPECT_EQ(c.i, 0u);
    EXPECT_EQ(c.j, 0u);
  }
}

TEST(PointToCell, ParentOfNextDepthFuzz) {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> depth(0, kMaxDepth - 1);
  for (int n = 0; n < 10000; ++n) {
    const auto p = random_sphere_point(rng);
    const int d = depth(rng);
    EXPECT_EQ(point_to_cell(p, d + 1).parent(), point_to_cell(p, d));
  }
}

// Face oracle: the face whose outward normal has the largest dot product.
int face_by_dot_products(const GeoPoint& p) {
  const auto v = to_unit_vector(p);
  int best = 0;
  double best_dot = -2;
  for (int f = 0; f < 6; ++f) {
    const double dot = (f < 3 ? 1.0 : -1.0) * v[f % 3];
    if (dot > best_dot) {
      best_dot = dot;
      best = f;
    }
  }
  return best;
}

TEST(PointToCell, FaceMatchesDotProductOracleAndAntipodesDiffer) {
  std::mt19937_64 rng(3);
  for (int n = 0; n < 10000; ++n) {
    const auto p = random_sphere_point(rng);
    const GeoPoint antipode(-p.lat_deg(), p.lon_deg() + 180.0);
    const auto a = point_to_cell(p, 0).face;
    const auto b = point_to_cell(antipode, 0).face;
    EXPECT_EQ(a, face_by_dot_products(p));
    EXPECT_EQ(b, face_by_dot_products(antipode));
    EXPECT_NE(a, b);
  }
}

TEST(PointToCell, RejectsBadDepth) {
  EXPECT_THROW(point_to_cell(GeoPoint(0, 0), kMaxDepth + 1), std::invalid_argument);
  EXPECT_THROW(point_to_cell(GeoPoint(0, 0), -1), std::invalid_argument);
}

TEST(CellId, ChildrenAndRanges) {
  const CellId c{2, 3, 5, 6};
  for (const auto& child : c.children()) {
    EXPECT_EQ(child.depth, 4);
    EXPECT_TRUE(child.i == 10 || child.i == 11);
    EXPECT_TRUE(child.j == 12 || child.j == 13);
    EXPECT_EQ(child.parent(), c);
    EXPECT_TRUE(c.is_ancestor_or_equal_of(child));
    EXPECT_GE(child.range_begin(), c.range_begin());
    EXPECT_LE(child.range_end(), c.range_end());
  }
  const auto kids = c.children();
  for (std::size_t a = 0; a + 1 < kids.size(); ++a) EXPECT_EQ(kids[a].range_end(), kids[a + 1].range_begin());
}

TEST(Centroid, IdenticalMembers) {
  const std::vector<GeoPoint> pts(5, GeoPoint(41.5, -12.25));
  const auto c = spherical_mean(pts);
  EXPECT_NEAR(c.lat_deg(), 41.5, 1e-12);
  EXPECT_NEAR(c.lon_deg(), -12.25, 1e-12);
}

TEST(Centroid, SymmetricPair) {
  const std::vector<GeoPoint> pts{GeoPoint(0, 10), GeoPoint(0, -10)};
  const auto c = spherical_mean(pts);
  EXPECT_NEAR(c.lat_deg(), 0.0, 1e-12);
  EXPECT_NEAR(c.lon_deg(), 0.0, 1e-12);
}

TEST(Centroid, AntimeridianSafe) {
  const std::vector<GeoPoint> pts{GeoPoint(10, 179), GeoPoint(10, -179), GeoPoint(12, 178.5)};
  const auto c = spherical_mean(pts);
  // 3-D mean oracle.
  double x = 0, y = 0, z = 0;
  for (const auto& p : pts) {
    const auto v = to_unit_vector(p);
    x += v[0];
    y += v[1];
    z += v[2];
  }
  const double lon = std::atan2(y, x) * 180 / M_PI;
  EXPECT_GT(std::abs(c.lon_deg()), 179.0);
  EXPECT_NEAR(c.lon_deg(), lon, 1e-9);
}

TEST(Centroid, CancellingMembersRaise) {
  const std::vector<GeoPoint> pts{GeoPoint(0, 0), GeoPoint(0, 180)};
  EXPECT_THROW(spherical_mean(pts), std::domain_error);
  EXPECT_THROW(spherical_mean({}), std::domain_error);
}

TEST(BuildHierarchy, AllBelowTMin) {
  std::mt19937_64 rng(5);
  std::vector<GeoPoint> pts;
  for (int i = 0; i < 40; ++i) pts.push_back(random_sphere_point(rng));
  EXPECT_EQ(build_hierarchy(pts, 50, 100).size(), 0u);
}

TEST(BuildHierarchy, TwoFacesSixtyEach) {
  std::mt19937_64 rng(6);
  std::vector<GeoPoint> pts;
  // Face 0 is centred on (0, 0); face 2 on the north pole.
  for (int i = 0; i < 60; ++i) pts.push_back(geoquery::testing::jitter(GeoPoint(0, 0), 5, rng));
  for (int i = 0; i < 60; ++i) pts.push_back(geoquery::testing::jitter(GeoPoint(80, 30), 2, rng));
  const auto h = build_hierarchy(pts, 50, 100);
  ASSERT_EQ(h.size(), 2u);
  EXPECT_EQ(h.classes[0], (CellId{0, 0, 0, 0}));
  EXPECT_EQ(h.classes[1], (CellId{2, 0, 0, 0}));
  EXPECT_EQ(h.counts, (std::vector<std::int64_t>{60, 60}));
}

TEST(BuildHierarchy, InseparableClusterStopsAtMaxDepth) {
  const std::vector<GeoPoint> pts(120, GeoPoint(35.6895, 139.6917));
  const auto h = build_hierarchy(pts, 50, 100);
  ASSERT_EQ(h.size(), 1u);
  EXPECT_EQ(h.classes[0].depth, kMaxDepth);
  EXPECT_EQ(h.counts[0], 120);
  EXPECT_EQ(h.classes[0], point_to_cell(pts[0], kMaxDepth));
}

TEST(BuildHierarchy, EmptyInput) { EXPECT_EQ(build_hierarchy({}, 1, 10).size(), 0u); }

TEST(BuildHierarchy, RejectsBadThresholds) {
  EXPECT_THROW(build_hierarchy({}, 0, 10), std::invalid_argument);
  EXPECT_THROW(build_hierarchy({}, 10, 5), std::invalid_argument);
}

TEST(BuildStack, SingleHierarchyEqualsBuildHierarchy) {
  std::mt19937_64 rng(7);
  const auto pts = clustered_points(rng, 2000);
  const std::vector<std::int64_t> t{100};
  const auto stack = build_stack(pts, t, 10);
  const auto h = build_hierarchy(pts, 10, 100);
  ASSERT_EQ(stack.depth(), 1u);
  EXPECT_TRUE(stack.parent_maps.empty());
  EXPECT_EQ(stack.hierarchies[0].classes, h.classes);
  EXPECT_EQ(stack.hierarchies[0].counts, h.counts);
}

TEST(BuildStack, RejectsNonDecreasingThresholds) {
  const std::vector<std::int64_t> t{100, 100};
  EXPECT_THROW(build_stack({}, t, 1), std::invalid_argument);
  const std::vector<std::int64_t> u{10, 20};
  EXPECT_THROW(build_stack({}, u, 1), std::invalid_argument);
}

TEST(BuildStack, DefaultThresholdSubsets) {
  EXPECT_EQ(default_t_max(7), (std::vector<std::int64_t>{25000, 10000, 5000, 2000, 1000, 750, 500}));
  EXPECT_EQ(default_t_max(5), (std::vector<std::int64_t>{25000, 5000, 2000, 750, 500}));
  EXPECT_EQ(default_t_max(3), (std::vector<std::int64_t>{25000, 2000, 500}));
  EXPECT_EQ(default_t_max(1), (std::vector<std::int64_t>{500}));
  EXPECT_THROW(default_t_max(8), std::invalid_argument);
}

TEST(AssignLabels, MembersGetTheirClassAndDroppedRegionsAreAbsent) {
  std::vector<GeoPoint> pts(60, GeoPoint(0, 0));
  const std::vector<std::int64_t> t{100, 59};
  const auto stack = build_stack(pts, t, 50);
  // 60 > 59 forces splitting to max depth at the fine level; still one class.
  ASSERT_EQ(stack.class_counts(), (std::vector<std::size_t>{1, 1}));
  const auto labels = assign_labels(GeoPoint(0, 0), stack);
  EXPECT_TRUE(is_complete(labels));
  EXPECT_EQ(labels[0], 0u);
  EXPECT_EQ(labels[1], 0u);
  const auto far = assign_labels(GeoPoint(-45, 120), stack);
  EXPECT_FALSE(far[0].has_value());
  EXPECT_FALSE(far[1].has_value());
  // Same face, but outside the fine max-depth cell.
  const auto near = assign_labels(GeoPoint(1, 1), stack);
  EXPECT_TRUE(near[0].has_value());
  EXPECT_FALSE(near[1].has_value());
}

TEST(ClassCentroid, OutOfRange) {
  HierarchyPartition h;
  EXPECT_THROW(class_centroid(h, 0), std::out_of_range);
}

TEST(PartitionFile, RoundTripIsByteStable) {
  std::mt19937_64 rng(8);
  const auto pts = clustered_points(rng, 3000);
  const std::vector<std::int64_t> t{800, 300, 120, 60};
  const auto stack = build_stack(pts, t, 10);
  const auto text = to_partition_text(stack, {{"config_hash", "abc"}});
  const auto back = parse_partition_text(text);
  EXPECT_EQ(to_partition_text(back, {{"config_hash", "abc"}}), text);
  for (std::size_t k = 0; k < stack.depth(); ++k) {
    EXPECT_EQ(back.hierarchies[k].classes, stack.hierarchies[k].classes);
    for (std::size_t c = 0; c < stack.hierarchies[k].size(); ++c) {
      EXPECT_NEAR(back.hierarchies[k].centroids[c].lat_deg(), stack.hierarchies[k].centroids[c].lat_deg(), 5e-10);
    }
  }
  EXPECT_EQ(back.parent_maps, stack.parent_maps);
}

TEST(PartitionFile, NineDecimalCentroids) {
  const std::vector<GeoPoint> pts(3, GeoPoint(12.3456789012345, -45.5));
  const std::vector<std::int64_t> t{5};
  const auto text = to_partition_text(build_stack(pts, t, 1));
  EXPECT_NE(text.find("\"lat\": 12.345678901"), std::string::npos);
  EXPECT_NE(text.find("\"lon\": -45.500000000"), std::string::npos);
}

TEST(PartitionFile, RejectsMalformedDocuments) {
  EXPECT_THROW(parse_partition_text("not json"), geoquery::DataError);
  EXPECT_THROW(parse_partition_text(R"({"format":"other","version":1})"), geoquery::DataError);
  const std::vector<GeoPoint> pts(3, GeoPoint(1, 2));
  const std::vector<std::int64_t> t{5, 2};
  auto text = to_partition_text(build_stack(pts, t, 1));
  const auto pos = text.find("\"parent_maps\": [\n[0]");
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, 20, "\"parent_maps\": [\n[7]");
  EXPECT_THROW(parse_partition_text(text), geoquery::DataError);
}

}  // namespace
