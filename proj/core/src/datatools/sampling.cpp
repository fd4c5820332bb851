#include "geoquery/datatools/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <stdexcept>

#include <boost/tokenizer.hpp>
#include <nlohmann/json.hpp>

#include "geoquery/common/errors.hpp"
#include "geoquery/common/hash.hpp"
#include "geoquery/inference/geodesy.hpp"

namespace geoquery::datatools {

namespace {

std::string where(std::string_view source, std::size_t index) {
  return std::string(source) + "[" + std::to_string(index) + "]";
}

// 53 random mantissa bits -> [0, 1).
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1p-53; }

using Row = std::vector<std::string>;

// Splits CSV text into rows with their 1-based line numbers.
std::vector<std::pair<std::size_t, Row>> csv_rows(std::string_view text, std::string_view source) {
  using Tokenizer = boost::tokenizer<boost::escaped_list_separator<char>>;
  std::vector<std::pair<std::size_t, Row>> rows;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string line(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      Tokenizer tok(line, boost::escaped_list_separator<char>('\\', ',', '"'));
      rows.emplace_back(line_no, Row(tok.begin(), tok.end()));
    } catch (const boost::escaped_list_error& ex) {
      throw DataError(std::string(source) + ":" + std::to_string(line_no) + ": " + ex.what());
    }
  }
  return rows;
}

std::size_t column(const Row& header, std::string_view name, std::string_view source) {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) {
    throw DataError(std::string(source) + ": header lacks column '" + std::string(name) + "'");
  }
  return static_cast<std::size_t>(it - header.begin());
}

double parse_double(const std::string& s, std::string_view what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size() || !std::isfinite(v)) {
    throw std::invalid_argument("bad " + std::string(what) + " '" + s + "'");
  }
  return v;
}

}  // namespace

std::vector<CountryRecord> parse_countries_json(std::string_view text, std::string_view source) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& ex) {
    throw DataError(std::string(source) + ": " + ex.what());
  }
  if (!doc.is_object() || !doc.contains("countries") || !doc.at("countries").is_array()) {
    throw DataError(std::string(source) + ": expected an object with a 'countries' array");
  }
  std::vector<CountryRecord> out;
  const auto& list = doc.at("countries");
  for (std::size_t i = 0; i < list.size(); ++i) {
    try {
      const auto& c = list[i];
      CountryRecord rec;
      rec.name = c.at("name").get<std::string>();
      rec.surface_area_km2 = c.at("area_km2").get<double>();
      if (!(rec.surface_area_km2 > 0.0) || !std::isfinite(rec.surface_area_km2)) {
        throw std::invalid_argument("area_km2 must be positive");
      }
      for (const auto& city : c.at("cities")) {
        rec.cities.push_back({city.at("name").get<std::string>(),
                              geocell::GeoPoint(city.at("lat").get<double>(), city.at("lon").get<double>())});
      }
      if (rec.cities.empty()) throw std::invalid_argument("country '" + rec.name + "' has no cities");
      out.push_back(std::move(rec));
    } catch (const std::exception& ex) {
      throw DataError(where(source, i) + ": " + ex.what());
    }
  }
  return out;
}

SimplemapsImport import_simplemaps(std::string_view cities_csv, std::string_view areas_csv) {
  const auto area_rows = csv_rows(areas_csv, "areas csv");
  if (area_rows.empty()) throw DataError("areas csv: empty file");
  const auto& area_header = area_rows.front().second;
  const auto a_country = column(area_header, "country", "areas csv");
  const auto a_area = column(area_header, "area_km2", "areas csv");
  std::map<std::string, double> areas;
  for (std::size_t r = 1; r < area_rows.size(); ++r) {
    const auto& [line_no, row] = area_rows[r];
    try {
      if (row.size() != area_header.size()) throw std::invalid_argument("wrong field count");
      const double area = parse_double(row[a_area], "area");
      if (!(area > 0.0)) throw std::invalid_argument("area must be positive");
      areas[row[a_country]] = area;
    } catch (const std::invalid_argument& ex) {
      throw DataError("areas csv:" + std::to_string(line_no) + ": " + ex.what());
    }
  }

  const auto city_rows = csv_rows(cities_csv, "cities csv");
  if (city_rows.empty()) throw DataError("cities csv: empty file");
  const auto& header = city_rows.front().second;
  const auto c_city = column(header, "city", "cities csv");
  const auto c_lat = column(header, "lat", "cities csv");
  const auto c_lng = column(header, "lng", "cities csv");
  const auto c_country = column(header, "country", "cities csv");
  std::map<std::string, std::vector<City>> cities;
  for (std::size_t r = 1; r < city_rows.size(); ++r) {
    const auto& [line_no, row] = city_rows[r];
    try {
      if (row.size() != header.size()) throw std::invalid_argument("wrong field count");
      cities[row[c_country]].push_back(
          {row[c_city], geocell::GeoPoint(parse_double(row[c_lat], "lat"), parse_double(row[c_lng], "lng"))});
    } catch (const std::invalid_argument& ex) {
      throw DataError("cities csv:" + std::to_string(line_no) + ": " + ex.what());
    }
  }

  SimplemapsImport out;
  for (auto& [name, list] : cities) {
    const auto it = areas.find(name);
    if (it == areas.end()) {
      out.missing_area.push_back(name);
      continue;
    }
    out.countries.push_back({name, it->second, std::move(list)});
  }
  return out;
}

std::vector<CountryRecord> load_countries(const std::filesystem::path& path) {
  return parse_countries_json(read_file(path), path.string());
}

geocell::GeoPoint destination_point(const geocell::GeoPoint& origin, double bearing_rad,
                                    double distance_km) {
  constexpr double rad = std::numbers::pi / 180.0;
  const double delta = distance_km / inference::kEarthRadiusKm;
  const double phi1 = origin.lat_deg() * rad;
  const double lam1 = origin.lon_deg() * rad;
  const double sin_phi2 = std::sin(phi1) * std::cos(delta) +
                          std::cos(phi1) * std::sin(delta) * std::cos(bearing_rad);
  const double phi2 = std::asin(std::clamp(sin_phi2, -1.0, 1.0));
  const double lam2 = lam1 + std::atan2(std::sin(bearing_rad) * std::sin(delta) * std::cos(phi1),
                                        std::cos(delta) - std::sin(phi1) * sin_phi2);
  return {std::clamp(phi2 / rad, -90.0, 90.0), lam2 / rad};
}

std::vector<SampleManifestEntry> sample_locations(std::span<const CountryRecord> countries,
                                                  std::size_t n, std::uint64_t seed) {
  if (countries.empty()) throw std::invalid_argument("cannot sample from an empty country list");
  if (n == 0) throw std::invalid_argument("sample count must be at least 1");
  std::vector<double> cumulative;
  double total = 0.0;
  for (const auto& c : countries) {
    if (!(c.surface_area_km2 > 0.0) || c.cities.empty()) {
      throw std::invalid_argument("country '" + c.name + "' needs a positive area and a city");
    }
    total += c.surface_area_km2;
    cumulative.push_back(total);
  }
  // Angular cap radius, shrunk by one part in 1e9 so round-off never pushes
  // a point past the nominal 5 km.
  const double cap = kSampleRadiusKm / inference::kEarthRadiusKm * (1.0 - 1e-9);
  const double one_minus_cos_cap = 2.0 * std::sin(cap / 2.0) * std::sin(cap / 2.0);

  std::vector<SampleManifestEntry> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
    std::mt19937_64 rng(seq);
    const double target = unit(rng) * total;
    const auto ci = std::min<std::size_t>(
        static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), target) -
                                 cumulative.begin()),
        countries.size() - 1);
    const auto& country = countries[ci];
    const auto city_index = std::min<std::size_t>(
        static_cast<std::size_t>(unit(rng) * static_cast<double>(country.cities.size())),
        country.cities.size() - 1);
    const auto& city = country.cities[city_index];
    // Area-uniform on the cap: 1 - cos(theta) is uniform in [0, 1 - cos(cap)].
    const double v = unit(rng) * one_minus_cos_cap;
    const double theta = 2.0 * std::asin(std::sqrt(v / 2.0));
    const double bearing = 2.0 * std::numbers::pi * unit(rng);
    out.push_back({k, country.name, city.name,
                   destination_point(city.center, bearing, theta * inference::kEarthRadiusKm),
                   kSampleRadiusKm});
  }
  return out;
}

std::string manifest_line(const SampleManifestEntry& e) {
  nlohmann::json j = {{"index", e.index},          {"country", e.country},
                      {"city", e.city},            {"lat", e.point.lat_deg()},
                      {"lon", e.point.lon_deg()},  {"radius_km", e.radius_km}};
  return j.dump();
}

}  // namespace geoquery::datatools
