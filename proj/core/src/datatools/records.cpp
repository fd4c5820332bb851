#include "geoquery/datatools/records.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "geoquery/common/errors.hpp"
#include "geoquery/common/hash.hpp"

namespace geoquery::datatools {

namespace {

ImageRecord parse_record(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("expected a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (key != "id" && key != "lat" && key != "lon" && key != "photographer" &&
        key != "scene_id" && key != "city") {
      throw std::invalid_argument("unknown key '" + key + "'");
    }
  }
  ImageRecord r;
  const auto& id = j.at("id");
  r.id = id.is_string() ? id.get<std::string>() : id.dump();
  r.location = geocell::GeoPoint(j.at("lat").get<double>(), j.at("lon").get<double>());
  if (j.contains("photographer")) {
    const auto& p = j.at("photographer");
    r.photographer = p.is_string() ? p.get<std::string>() : p.dump();
  }
  if (j.contains("scene_id") && !j.at("scene_id").is_null()) {
    const auto& s = j.at("scene_id");
    if (!s.is_number_integer() || s.get<std::int64_t>() < 0) {
      throw std::invalid_argument("scene_id must be a non-negative integer");
    }
    r.scene_id = s.get<std::size_t>();
  }
  if (j.contains("city") && !j.at("city").is_null()) r.city = j.at("city").get<std::string>();
  return r;
}

}  // namespace

std::vector<ImageRecord> parse_records(std::string_view text, std::string_view source) {
  std::vector<ImageRecord> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      out.push_back(parse_record(nlohmann::json::parse(line)));
    } catch (const std::exception& ex) {
      throw DataError(std::string(source) + ":" + std::to_string(line_no) + ": " + ex.what());
    }
  }
  return out;
}

std::vector<ImageRecord> load_records(const std::filesystem::path& path) {
  return parse_records(read_file(path), path.string());
}

std::string record_line(const ImageRecord& r) {
  nlohmann::json j = {{"id", r.id}, {"lat", r.location.lat_deg()}, {"lon", r.location.lon_deg()}};
  if (!r.photographer.empty()) j["photographer"] = r.photographer;
  if (r.scene_id) j["scene_id"] = *r.scene_id;
  if (r.city) j["city"] = *r.city;
  return j.dump();
}

Split split_by_photographer(std::span<const ImageRecord> records, double test_fraction,
                            std::uint64_t seed) {
  if (!(test_fraction >= 0.0 && test_fraction <= 1.0)) {
    throw std::invalid_argument("test fraction must lie in [0, 1]");
  }
  std::vector<std::string> photographers;
  std::unordered_map<std::string, std::size_t> images;
  for (const auto& r : records) {
    if (r.photographer.empty()) {
      throw std::invalid_argument("record '" + r.id + "' has no photographer");
    }
    if (images[r.photographer]++ == 0) photographers.push_back(r.photographer);
  }
  std::mt19937_64 rng(seed);
  std::shuffle(photographers.begin(), photographers.end(), rng);

  const auto target = static_cast<std::size_t>(
      std::llround(test_fraction * static_cast<double>(records.size())));
  std::unordered_map<std::string, bool> in_test;
  std::size_t test_images = 0;
  for (const auto& p : photographers) {
    const bool take = test_images < target;
    in_test[p] = take;
    if (take) test_images += images[p];
  }
  Split split;
  for (const auto& r : records) (in_test[r.photographer] ? split.test : split.train).push_back(r);
  return split;
}

}  // namespace geoquery::datatools
