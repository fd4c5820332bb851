#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "geoquery/geocell/geo_point.hpp"

namespace geoquery::datatools {

struct City {
  std::string name;
  geocell::GeoPoint center;
};

struct CountryRecord {
  std::string name;
  double surface_area_km2 = 0.0;
  std::vector<City> cities;
};

/**
 * Country database as JSON:
 *
 *     {"countries": [{"name": "...", "area_km2": 643801.0,
 *                     "cities": [{"name": "...", "lat": 48.85, "lon": 2.35}]}]}
 *
 * Every country needs a positive area and at least one city; violations are
 * DataError messages naming the country's position in the list.
 */
std::vector<CountryRecord> parse_countries_json(std::string_view text,
                                                std::string_view source = "countries");

struct SimplemapsImport {
  std::vector<CountryRecord> countries;
  /// Countries that have cities but no area row, sorted.
  std::vector<std::string> missing_area;
};

/**
 * Builds the database from a simplemaps-style world-cities CSV (header with
 * at least "city", "lat", "lng" and "country" columns; quoted fields allowed)
 * and an area CSV with "country" and "area_km2" columns. Countries are sorted
 * by name, cities keep file order. Malformed rows raise DataError with the
 * file name and 1-based line number.
 */
SimplemapsImport import_simplemaps(std::string_view cities_csv, std::string_view areas_csv);

std::vector<CountryRecord> load_countries(const std::filesystem::path& path);

inline constexpr double kSampleRadiusKm = 5.0;

struct SampleManifestEntry {
  std::size_t index = 0;
  std::string country;
  std::string city;
  geocell::GeoPoint point;
  double radius_km = kSampleRadiusKm;
};

/**
 * n sampled locations. Entry k draws from its own generator seeded with
 * (seed, k), so the manifest is reproducible and any prefix is stable.
 *
 * Country ~ area-weighted categorical; city ~ uniform; point ~ uniform by
 * area over the spherical cap of radius kSampleRadiusKm around the city
 * centre. Throws std::invalid_argument on an empty country list or n = 0.
 */
std::vector<SampleManifestEntry> sample_locations(std::span<const CountryRecord> countries,
                                                  std::size_t n, std::uint64_t seed);

/// Destination after travelling distance_km along an initial bearing
/// (radians, clockwise from north) on the sphere of radius kEarthRadiusKm.
geocell::GeoPoint destination_point(const geocell::GeoPoint& origin, double bearing_rad,
                                    double distance_km);

/// {"index", "country", "city", "lat", "lon", "radius_km"}.
std::string manifest_line(const SampleManifestEntry& entry);

}  // namespace geoquery::datatools
