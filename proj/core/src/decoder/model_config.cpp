#include "geoquery/decoder/model_config.hpp"

#include <set>
#include <string>

#include "geoquery/common/errors.hpp"

namespace geoquery::decoder {

std::size_t EncoderConfig::token_count() const {
  if (kind == EncoderKind::kPrecomputed) return 0;
  const auto per_side = image_size / patch_size;
  return per_side * per_side;
}

void ModelConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError("model config: " + msg); };
  if (hierarchies == 0) fail("hierarchies must be at least 1");
  if (dim == 0) fail("dim must be positive");
  if (heads == 0 || dim % heads != 0) {
    fail("dim " + std::to_string(dim) + " is not divisible by " + std::to_string(heads) + " heads");
  }
  if (depth() == 0) fail("independent_layers + dependent_layers must be at least 1");
  if (ffn_multiplier == 0) fail("ffn_multiplier must be positive");
  if (classes_per_hierarchy.size() != hierarchies) {
    fail("classes_per_hierarchy has " + std::to_string(classes_per_hierarchy.size()) +
         " entries for " + std::to_string(hierarchies) + " hierarchies");
  }
  for (auto c : classes_per_hierarchy) {
    if (c == 0) fail("every hierarchy needs at least one class");
  }
  if (encoder.kind == EncoderKind::kImage) {
    if (encoder.patch_size == 0 || encoder.image_size % encoder.patch_size != 0) {
      fail("image_size must be a positive multiple of patch_size");
    }
    if (encoder.channels == 0) fail("channels must be positive");
  } else if (encoder.token_dim == 0) {
    fail("token_dim must be positive");
  }
}

nlohmann::json to_json(const ModelConfig& c) {
  nlohmann::json enc = {
      {"kind", c.encoder.kind == EncoderKind::kImage ? "image" : "precomputed"},
      {"image_size", c.encoder.image_size},
      {"patch_size", c.encoder.patch_size},
      {"channels", c.encoder.channels},
      {"depth", c.encoder.depth},
      {"token_dim", c.encoder.token_dim},
  };
  return {
      {"hierarchies", c.hierarchies},
      {"scenes", c.scenes},
      {"dim", c.dim},
      {"heads", c.heads},
      {"independent_layers", c.independent_layers},
      {"dependent_layers", c.dependent_layers},
      {"ffn_multiplier", c.ffn_multiplier},
      {"classes_per_hierarchy", c.classes_per_hierarchy},
      {"encoder", enc},
      {"values_equal_keys", c.values_equal_keys},
      {"zero_init_heads", c.zero_init_heads},
      {"seed", c.seed},
  };
}

namespace {

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known, const char* where) {
  if (!j.is_object()) throw ConfigError(std::string(where) + " must be an object");
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw ConfigError(std::string(where) + ": unknown key '" + key + "'");
  }
}

template <typename T>
void read(const nlohmann::json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError(std::string("model config: bad value for '") + key + "': " + ex.what());
  }
}

}  // namespace

ModelConfig model_config_from_json(const nlohmann::json& j) {
  reject_unknown(j,
                 {"hierarchies", "scenes", "dim", "heads", "independent_layers", "dependent_layers",
                  "ffn_multiplier", "classes_per_hierarchy", "encoder", "values_equal_keys",
                  "zero_init_heads", "seed"},
                 "model config");
  ModelConfig c;
  read(j, "hierarchies", c.hierarchies);
  read(j, "scenes", c.scenes);
  read(j, "dim", c.dim);
  read(j, "heads", c.heads);
  read(j, "independent_layers", c.independent_layers);
  read(j, "dependent_layers", c.dependent_layers);
  read(j, "ffn_multiplier", c.ffn_multiplier);
  read(j, "classes_per_hierarchy", c.classes_per_hierarchy);
  read(j, "values_equal_keys", c.values_equal_keys);
  read(j, "zero_init_heads", c.zero_init_heads);
  read(j, "seed", c.seed);
  if (j.contains("encoder")) {
    const auto& e = j.at("encoder");
    reject_unknown(e, {"kind", "image_size", "patch_size", "channels", "depth", "token_dim"},
                   "encoder config");
    std::string kind = "precomputed";
    read(e, "kind", kind);
    if (kind == "image") {
      c.encoder.kind = EncoderKind::kImage;
    } else if (kind == "precomputed") {
      c.encoder.kind = EncoderKind::kPrecomputed;
    } else {
      throw ConfigError("encoder kind must be 'image' or 'precomputed', got '" + kind + "'");
    }
    read(e, "image_size", c.encoder.image_size);
    read(e, "patch_size", c.encoder.patch_size);
    read(e, "channels", c.encoder.channels);
    read(e, "depth", c.encoder.depth);
    read(e, "token_dim", c.encoder.token_dim);
  }
  return c;
}

}  // namespace geoquery::decoder
