#include <benchmark/benchmark.h>

#include <algorithm>
#include <random>

#include "geoquery/datatools/inequality.hpp"
#include "geoquery/geocell/partition.hpp"
#include "geoquery/inference/geodesy.hpp"

namespace {

namespace gc = geoquery::geocell;

std::vector<gc::GeoPoint> clustered_points(std::size_t n) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> lat(-60.0, 70.0), lon(-180.0, 180.0);
  std::normal_distribution<double> jitter(0.0, 0.3);
  std::vector<gc::GeoPoint> centres;
  for (int i = 0; i < 200; ++i) centres.emplace_back(lat(rng), lon(rng));
  std::vector<gc::GeoPoint> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& c = centres[i % centres.size()];
    out.emplace_back(std::clamp(c.lat_deg() + jitter(rng), -90.0, 90.0), c.lon_deg() + jitter(rng));
  }
  return out;
}

void BM_BuildHierarchy(benchmark::State& state) {
  const auto points = clustered_points(static_cast<std::size_t>(state.range(0)));
  const std::vector<std::int64_t> t_max{2500, 1000, 500, 200, 100, 75, 50};
  for (auto _ : state) benchmark::DoNotOptimize(gc::build_stack(points, t_max, 5));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BuildHierarchy)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_Haversine(benchmark::State& state) {
  const auto points = clustered_points(1024);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(geoquery::inference::haversine_km(points[i & 1023], points[(i * 7 + 3) & 1023]));
    ++i;
  }
}
BENCHMARK(BM_Haversine);

void BM_Gini(benchmark::State& state) {
  std::mt19937_64 rng(8);
  std::geometric_distribution<int> counts(0.01);
  std::vector<double> x(static_cast<std::size_t>(state.range(0)));
  for (auto& v : x) v = counts(rng);
  x[0] += 1.0;
  for (auto _ : state) benchmark::DoNotOptimize(geoquery::datatools::gini(x));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Gini)->Arg(1000)->Arg(100000);

}  // namespace
