#include "geoquery/geocell/geo_point.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace geoquery::geocell {

namespace {
constexpr double kDeg = std::numbers::pi / 180.0;
}

double normalize_longitude(double lon_deg) {
  double r = std::fmod(lon_deg + 180.0, 360.0);
  if (r < 0) r += 360.0;
  if (r >= 360.0) r -= 360.0;
  return r - 180.0;
}

GeoPoint::GeoPoint(double lat_deg, double lon_deg) {
  if (!std::isfinite(lat_deg) || !std::isfinite(lon_deg)) {
    throw std::invalid_argument("non-finite coordinate");
  }
  if (lat_deg < -90.0 || lat_deg > 90.0) {
    throw std::invalid_argument("latitude " + std::to_string(lat_deg) + " outside [-90, 90]");
  }
  lat_ = lat_deg;
  lon_ = normalize_longitude(lon_deg);
}

Vec3 to_unit_vector(const GeoPoint& p) {
  const double lat = p.lat_deg() * kDeg;
  const double lon = p.lon_deg() * kDeg;
  return {std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon), std::sin(lat)};
}

GeoPoint from_vector(const Vec3& v) {
  const double lat = std::atan2(v[2], std::hypot(v[0], v[1])) / kDeg;
  const double lon = std::atan2(v[1], v[0]) / kDeg;
  return GeoPoint(std::clamp(lat, -90.0, 90.0), lon);
}

GeoPoint spherical_mean(std::span<const GeoPoint> points) {
  Vec3 acc{0, 0, 0};
  for (const auto& p : points) {
    const auto u = to_unit_vector(p);
    for (int k = 0; k < 3; ++k) acc[k] += u[k];
  }
  const double norm = std::sqrt(acc[0] * acc[0] + acc[1] * acc[1] + acc[2] * acc[2]);
  if (norm < 1e-9) throw std::domain_error("spherical mean undefined: member vectors cancel");
  return from_vector(acc);
}

}  // namespace geoquery::geocell
