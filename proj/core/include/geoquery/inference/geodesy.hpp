#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "geoquery/geocell/geo_point.hpp"

namespace geoquery::inference {

/// Mean Earth radius used for every distance in the toolkit.
inline constexpr double kEarthRadiusKm = 6371.0;

/// Great-circle distance by the haversine formula.
double haversine_km(const geocell::GeoPoint& a, const geocell::GeoPoint& b);

/// Street, city, region, country and continent radii.
inline constexpr std::array<double, 5> kThresholdsKm{1.0, 25.0, 200.0, 750.0, 2500.0};

struct EvalReport {
  std::array<double, 5> thresholds_km = kThresholdsKm;
  std::array<double, 5> accuracy{};
  /// Integer hit counts per threshold; accuracy = hits / n.
  std::array<std::size_t, 5> hits{};
  std::size_t n = 0;
};

/// Per-threshold hit flags for one error distance.
std::array<bool, 5> threshold_hits(double error_km);

/// Throws std::invalid_argument when the spans differ in length. An empty
/// input gives n = 0 and zero accuracies.
EvalReport evaluate(std::span<const geocell::GeoPoint> predicted,
                    std::span<const geocell::GeoPoint> truth);

}  // namespace geoquery::inference
