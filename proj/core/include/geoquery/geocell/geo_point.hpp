#pragma once

#include <array>
#include <span>

namespace geoquery::geocell {

using Vec3 = std::array<double, 3>;

/// Latitude/longitude in degrees. Longitude is normalized into [-180, 180).
class GeoPoint {
 public:
  GeoPoint() = default;
  /// Throws std::invalid_argument for non-finite values or |lat| > 90.
  GeoPoint(double lat_deg, double lon_deg);

  double lat_deg() const { return lat_; }
  double lon_deg() const { return lon_; }

  bool operator==(const GeoPoint&) const = default;

 private:
  double lat_ = 0.0;
  double lon_ = 0.0;
};

double normalize_longitude(double lon_deg);

Vec3 to_unit_vector(const GeoPoint& p);
/// Direction of a nonzero vector as a GeoPoint.
GeoPoint from_vector(const Vec3& v);

/// Average of member unit vectors, renormalized. Throws std::domain_error when
/// the vector sum has norm < 1e-9 (including an empty input).
GeoPoint spherical_mean(std::span<const GeoPoint> points);

}  // namespace geoquery::geocell
