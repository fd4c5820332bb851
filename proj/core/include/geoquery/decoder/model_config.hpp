#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

namespace geoquery::decoder {

enum class EncoderKind { kImage, kPrecomputed };

struct EncoderConfig {
  EncoderKind kind = EncoderKind::kPrecomputed;
  // Image path: [channels × image_size × image_size] split into square patches.
  std::size_t image_size = 224;
  std::size_t patch_size = 32;
  std::size_t channels = 3;
  std::size_t depth = 2;
  // Precomputed path: tokens arrive as [T × token_dim].
  std::size_t token_dim = 64;

  std::size_t token_count() const;
};

/**
 * Shape of the GeoDecoder.
 *
 * Queries are laid out hierarchy-major: row(h, s) = h·S + s. With scenes = 0
 * the model keeps one query row per hierarchy and drops the scene loss.
 */
struct ModelConfig {
  std::size_t hierarchies = 7;
  std::size_t scenes = 16;
  std::size_t dim = 64;
  std::size_t heads = 4;
  std::size_t independent_layers = 6;
  std::size_t dependent_layers = 2;
  std::size_t ffn_multiplier = 4;
  std::vector<std::size_t> classes_per_hierarchy;
  EncoderConfig encoder;
  bool values_equal_keys = false;
  /// Linear heads start at zero instead of U(±1/√fan_in).
  bool zero_init_heads = false;
  std::uint64_t seed = 0;

  std::size_t scene_rows() const { return scenes == 0 ? 1 : scenes; }
  std::size_t query_rows() const { return hierarchies * scene_rows(); }
  std::size_t depth() const { return independent_layers + dependent_layers; }

  /// Throws ConfigError when an invariant is violated.
  void validate() const;
};

nlohmann::json to_json(const ModelConfig& config);
/// Rejects unknown keys; missing keys keep their defaults.
ModelConfig model_config_from_json(const nlohmann::json& j);

}  // namespace geoquery::decoder
