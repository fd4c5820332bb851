#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "geoquery/geocell/partition.hpp"

namespace geoquery::geocell {

inline constexpr int kPartitionFormatVersion = 1;

/**
 * JSON partition document, one class per line:
 *
 *     {"format": "geoquery-partition", "version": 1, "t_min": 50,
 *      "t_max": [...], "provenance": {...},
 *      "hierarchies": [{"level": 1, "t_max": 25000, "t_min": 50, "classes": [
 *        {"face": 0, "depth": 3, "i": 1, "j": 5, "count": 812,
 *         "lat": 12.345678901, "lon": -3.000000000}, ...]}, ...],
 *      "parent_maps": [[...], ...]}
 *
 * Centroids carry 9 decimal places. Class order is canonical, so equal
 * stacks always serialize to equal bytes.
 */
std::string to_partition_text(const PartitionStack& stack,
                              const nlohmann::json& provenance = nlohmann::json::object());

/// Throws DataError on schema violations or inconsistent parent maps.
PartitionStack parse_partition_text(std::string_view text);

void save_partition(const std::filesystem::path& path, const PartitionStack& stack,
                    const nlohmann::json& provenance = nlohmann::json::object());
PartitionStack load_partition(const std::filesystem::path& path);

}  // namespace geoquery::geocell
