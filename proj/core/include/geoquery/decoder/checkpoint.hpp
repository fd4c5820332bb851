#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "geoquery/decoder/geo_decoder.hpp"
#include "geoquery/numerics/optimizer.hpp"

namespace geoquery::decoder {

inline constexpr int kCheckpointFormatVersion = 1;

/// Provenance stored next to the weights.
struct CheckpointManifest {
  /// SHA-256 of the partition file the classifier heads were sized for.
  std::string partition_sha256;
  /// Number of completed epochs.
  int epoch = 0;
  std::uint64_t step = 0;
  std::string config_sha256;
  nlohmann::json extra = nlohmann::json::object();
};

struct LoadedCheckpoint {
  GeoDecoderModel model;
  numerics::OptimizerState optimizer;
  CheckpointManifest manifest;
};

/// Parameters under "param/<name>", momentum buffers under "momentum/<name>".
void save_checkpoint(const std::filesystem::path& path, const GeoDecoderModel& model,
                     const numerics::OptimizerState& optimizer,
                     const CheckpointManifest& manifest);

/// Throws DataError on a malformed file or a parameter set that does not
/// match the embedded config.
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

/// Throws CompatibilityError when the checkpoint was built against another
/// partition file.
void require_partition(const CheckpointManifest& manifest, const std::string& partition_sha256);

}  // namespace geoquery::decoder
