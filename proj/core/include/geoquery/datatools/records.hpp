#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "geoquery/geocell/geo_point.hpp"

namespace geoquery::datatools {

/// One image of a dataset. Only id and location are required.
struct ImageRecord {
  std::string id;
  geocell::GeoPoint location;
  std::string photographer;
  std::optional<std::size_t> scene_id;
  std::optional<std::string> city;

  bool operator==(const ImageRecord&) const = default;
};

/**
 * Line-delimited JSON, one object per non-blank line:
 *
 *     {"id": "...", "lat": 48.85, "lon": 2.35,
 *      "photographer": "...", "scene_id": 3, "city": "Paris"}
 *
 * Unknown keys are rejected. Errors are DataError messages naming the source
 * and the 1-based line number.
 */
std::vector<ImageRecord> parse_records(std::string_view text, std::string_view source = "records");
std::vector<ImageRecord> load_records(const std::filesystem::path& path);
std::string record_line(const ImageRecord& record);

struct Split {
  std::vector<ImageRecord> train;
  std::vector<ImageRecord> test;
};

/**
 * Photographer-disjoint split. Photographers are shuffled with `seed` and
 * moved to the test side until it holds round(test_fraction · n) images;
 * every later photographer goes to train. Record order is preserved within
 * each side. Throws std::invalid_argument for a fraction outside [0, 1] or a
 * record without a photographer.
 */
Split split_by_photographer(std::span<const ImageRecord> records, double test_fraction,
                            std::uint64_t seed);

}  // namespace geoquery::datatools
