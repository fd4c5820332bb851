#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "geoquery/decoder/model_config.hpp"
#include "geoquery/decoder/synthetic.hpp"
#include "geoquery/numerics/optimizer.hpp"

namespace geoquery::cli {

struct PathsConfig {
  std::string metadata;
  std::string partition;
  std::string inputs;
  std::string checkpoint;
  std::string countries;
  std::string cities_csv;
  std::string areas_csv;
  /// File or directory, depending on the command.
  std::string output;
};

struct PartitionParams {
  std::int64_t t_min = 50;
  /// Empty means the default thresholds for model.hierarchies.
  std::vector<std::int64_t> t_max;
};

struct TrainingParams {
  int epochs = 40;
  /// Clamped to the dataset size.
  std::size_t batch_size = 512;
  /// Epoch checkpoints are kept every this many epochs; the latest one is
  /// always written.
  int checkpoint_every = 1;
};

struct BiasParams {
  std::size_t lat_bins = 18;
  std::size_t lon_bins = 36;
};

/**
 * Everything a command needs, loadable from a JSON file. Unknown keys are
 * rejected at every level; absent keys keep their defaults:
 *
 *     {"seed": 0, "threads": 1, "strict": false,
 *      "paths": {...}, "partition": {"t_min", "t_max"},
 *      "model": {...}, "optimizer": {"learning_rate", "momentum",
 *      "weight_decay", "milestones", "gamma"},
 *      "training": {"epochs", "batch_size", "checkpoint_every"}, "eval": {"tencrop"},
 *      "sample": {"n"}, "bias": {"lat_bins", "lon_bins"},
 *      "synthetic": {"images", "clusters", "scenes", "image_size",
 *                    "channels", "noise", "spread_deg"}}
 */
struct RunConfig {
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  bool strict = false;
  PathsConfig paths;
  PartitionParams partition;
  decoder::ModelConfig model;
  /// True when the file set model.seed; otherwise the run seed is used.
  bool model_seed_set = false;
  numerics::OptimizerState optimizer;
  TrainingParams training;
  bool tencrop = false;
  std::size_t sample_n = 1000;
  BiasParams bias;
  decoder::SyntheticSpec synthetic;
};

/// Throws ConfigError on unknown keys or ill-typed values.
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& c);

/// Hex SHA-256 of the compact JSON of the resolved config and command.
std::string config_hash(const RunConfig& c, const std::string& command);

}  // namespace geoquery::cli
