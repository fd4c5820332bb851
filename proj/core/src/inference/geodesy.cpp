#include "geoquery/inference/geodesy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace geoquery::inference {

double haversine_km(const geocell::GeoPoint& a, const geocell::GeoPoint& b) {
  constexpr double rad = std::numbers::pi / 180.0;
  const double phi1 = a.lat_deg() * rad;
  const double phi2 = b.lat_deg() * rad;
  const double s_phi = std::sin((phi2 - phi1) / 2.0);
  const double s_lam = std::sin((b.lon_deg() - a.lon_deg()) * rad / 2.0);
  const double h = s_phi * s_phi + std::cos(phi1) * std::cos(phi2) * s_lam * s_lam;
  return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(std::clamp(h, 0.0, 1.0)));
}

std::array<bool, 5> threshold_hits(double error_km) {
  std::array<bool, 5> out{};
  for (std::size_t t = 0; t < kThresholdsKm.size(); ++t) out[t] = error_km <= kThresholdsKm[t];
  return out;
}

EvalReport evaluate(std::span<const geocell::GeoPoint> predicted,
                    std::span<const geocell::GeoPoint> truth) {
  if (predicted.size() != truth.size()) {
    throw std::invalid_argument("evaluate: " + std::to_string(predicted.size()) +
                                " predictions for " + std::to_string(truth.size()) +
                                " ground-truth points");
  }
  EvalReport report;
  report.n = truth.size();
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const auto hits = threshold_hits(haversine_km(predicted[i], truth[i]));
    for (std::size_t t = 0; t < hits.size(); ++t) report.hits[t] += hits[t] ? 1 : 0;
  }
  if (report.n > 0) {
    for (std::size_t t = 0; t < report.hits.size(); ++t) {
      report.accuracy[t] = static_cast<double>(report.hits[t]) / static_cast<double>(report.n);
    }
  }
  return report;
}

}  // namespace geoquery::inference
