#include <gtest/gtest.h>

#include <random>

#include "geoquery/geocell/partition.hpp"
#include "partition_invariants.hpp"
#include "point_sets.hpp"

namespace {

using namespace geoquery::geocell;

TEST(PartitionFuzz, InvariantsHoldOnRandomPointSets) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> size(50, 1500);
  std::uniform_int_distribution<std::int64_t> tmin(1, 12);
  for (int trial = 0; trial < 120; ++trial) {
    const auto pts = geoquery::testing::clustered_points(rng, size(rng));
    const auto t_min = tmin(rng);
    std::vector<std::int64_t> t_max{t_min * 40, t_min * 16, t_min * 8, t_min * 4, t_min * 3, t_min * 2, t_min};
    const auto stack = build_stack(pts, t_max, t_min);
    const auto violation = geoquery::testing::check_stack_invariants(pts, stack, rng);
    ASSERT_TRUE(violation.empty()) << "trial " << trial << ": " << violation;
  }
}

TEST(PartitionFuzz, ClassCountsGrowWhenNothingIsDropped) {
  std::mt19937_64 rng(77);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    // Dense clusters of identical-ish points so fine cells rarely fall below t_min.
    std::vector<GeoPoint> pts;
    std::uniform_int_distribution<int> k(1, 6);
    const int clusters = k(rng);
    for (int c = 0; c < clusters; ++c) {
      const auto center = geoquery::testing::random_sphere_point(rng);
      for (int n = 0; n < 200; ++n) pts.push_back(geoquery::testing::jitter(center, 1e-4, rng));
    }
    const std::vector<std::int64_t> t_max{800, 400, 200, 100};
    const auto stack = build_stack(pts, t_max, 1 + trial % 2);
    std::int64_t total_fine = 0;
    for (auto c : stack.finest().counts) total_fine += c;
    if (total_fine != static_cast<std::int64_t>(pts.size())) continue;
    ++checked;
    const auto counts = stack.class_counts();
    for (std::size_t h = 1; h < counts.size(); ++h) EXPECT_GE(counts[h], counts[h - 1]);
  }
  EXPECT_GT(checked, 100);
}

}  // namespace
