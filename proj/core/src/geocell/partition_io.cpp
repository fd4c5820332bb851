#include "geoquery/geocell/partition_io.hpp"

#include <cstdio>

#include "geoquery/common/errors.hpp"
#include "geoquery/common/hash.hpp"

namespace geoquery::geocell {

namespace {

std::string fixed9(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9f", v);
  return buf;
}

template <typename T>
T require(const nlohmann::json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw DataError(where + ": missing '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& ex) {
    throw DataError(where + ": bad '" + key + "': " + ex.what());
  }
}

}  // namespace

std::string to_partition_text(const PartitionStack& stack, const nlohmann::json& provenance) {
  nlohmann::json t_max = nlohmann::json::array();
  for (const auto& h : stack.hierarchies) t_max.push_back(h.t_max);
  const auto t_min = stack.hierarchies.empty() ? std::int64_t{1} : stack.hierarchies.front().t_min;

  std::string out = "{\n";
  out += "\"format\": \"geoquery-partition\",\n";
  out += "\"version\": " + std::to_string(kPartitionFormatVersion) + ",\n";
  out += "\"t_min\": " + std::to_string(t_min) + ",\n";
  out += "\"t_max\": " + t_max.dump() + ",\n";
  out += "\"provenance\": " + provenance.dump() + ",\n";
  out += "\"hierarchies\": [";
  for (std::size_t k = 0; k < stack.hierarchies.size(); ++k) {
    const auto& h = stack.hierarchies[k];
    out += k ? ",\n" : "\n";
    out += "{\"level\": " + std::to_string(h.level) + ", \"t_max\": " + std::to_string(h.t_max) +
           ", \"t_min\": " + std::to_string(h.t_min) + ", \"classes\": [";
    for (std::size_t c = 0; c < h.size(); ++c) {
      const auto& cell = h.classes[c];
      out += c ? ",\n" : "\n";
      out += "{\"face\": " + std::to_string(cell.face) + ", \"depth\": " + std::to_string(cell.depth) +
             ", \"i\": " + std::to_string(cell.i) + ", \"j\": " + std::to_string(cell.j) +
             ", \"count\": " + std::to_string(h.counts[c]) +
             ", \"lat\": " + fixed9(h.centroids[c].lat_deg()) +
             ", \"lon\": " + fixed9(h.centroids[c].lon_deg()) + "}";
    }
    out += "]}";
  }
  out += "\n],\n\"parent_maps\": [";
  for (std::size_t k = 0; k < stack.parent_maps.size(); ++k) {
    out += k ? ",\n" : "\n";
    out += nlohmann::json(stack.parent_maps[k]).dump();
  }
  out += "\n]\n}\n";
  return out;
}

PartitionStack parse_partition_text(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& ex) {
    throw DataError(std::string("partition file is not valid JSON: ") + ex.what());
  }
  if (require<std::string>(doc, "format", "partition") != "geoquery-partition") {
    throw DataError("partition: unexpected format tag");
  }
  const auto version = require<int>(doc, "version", "partition");
  if (version != kPartitionFormatVersion) {
    throw DataError("partition: unsupported version " + std::to_string(version));
  }
  PartitionStack stack;
  const auto& hs = doc.at("hierarchies");
  if (!hs.is_array()) throw DataError("partition: 'hierarchies' must be an array");
  for (std::size_t k = 0; k < hs.size(); ++k) {
    const auto where = "partition hierarchy " + std::to_string(k + 1);
    HierarchyPartition h;
    h.level = require<int>(hs[k], "level", where);
    h.t_max = require<std::int64_t>(hs[k], "t_max", where);
    h.t_min = require<std::int64_t>(hs[k], "t_min", where);
    const auto& classes = hs[k].at("classes");
    for (std::size_t c = 0; c < classes.size(); ++c) {
      const auto cw = where + " class " + std::to_string(c);
      const auto& e = classes[c];
      const auto face = require<int>(e, "face", cw);
      const auto depth = require<int>(e, "depth", cw);
      const auto i = require<std::uint64_t>(e, "i", cw);
      const auto j = require<std::uint64_t>(e, "j", cw);
      if (face < 0 || face > 5 || depth < 0 || depth > kMaxDepth || i >> depth != 0 ||
          j >> depth != 0) {
        throw DataError(cw + ": invalid cell coordinates");
      }
      h.classes.push_back(CellId{static_cast<std::uint8_t>(face), static_cast<std::uint8_t>(depth),
                                 static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)});
      h.counts.push_back(require<std::int64_t>(e, "count", cw));
      try {
        h.centroids.emplace_back(require<double>(e, "lat", cw), require<double>(e, "lon", cw));
      } catch (const std::invalid_argument& ex) {
        throw DataError(cw + ": " + ex.what());
      }
      if (c > 0 && !(h.classes[c - 1] < h.classes[c])) {
        throw DataError(cw + ": classes are not in canonical order");
      }
    }
    h.reindex();
    stack.hierarchies.push_back(std::move(h));
  }
  const auto stored = require<std::vector<std::vector<std::size_t>>>(doc, "parent_maps", "partition");
  try {
    stack.parent_maps = derive_parent_maps(stack.hierarchies);
  } catch (const std::logic_error& ex) {
    throw DataError(std::string("partition: ") + ex.what());
  }
  if (stored != stack.parent_maps) {
    throw DataError("partition: stored parent maps disagree with cell ancestry");
  }
  return stack;
}

void save_partition(const std::filesystem::path& path, const PartitionStack& stack,
                    const nlohmann::json& provenance) {
  write_file(path, to_partition_text(stack, provenance));
}

PartitionStack load_partition(const std::filesystem::path& path) {
  return parse_partition_text(read_file(path));
}

}  // namespace geoquery::geocell
