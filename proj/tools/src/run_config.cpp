#include "run_config.hpp"

#include <set>

#include "geoquery/common/errors.hpp"
#include "geoquery/common/hash.hpp"

namespace geoquery::cli {

namespace {

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
void read(const nlohmann::json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError(where + ": bad value for '" + key + "': " + ex.what());
  }
}

}  // namespace

RunConfig run_config_from_json(const nlohmann::json& j) {
  reject_unknown(j,
                 {"seed", "threads", "strict", "paths", "partition", "model", "optimizer", "training", "eval",
                  "sample", "bias", "synthetic"},
                 "config");
  RunConfig c;
  read(j, "seed", c.seed, "config");
  read(j, "threads", c.threads, "config");
  read(j, "strict", c.strict, "config");
  if (j.contains("paths")) {
    const auto& p = j.at("paths");
    reject_unknown(p, {"metadata", "partition", "inputs", "checkpoint", "countries", "cities_csv", "areas_csv", "output"},
                   "paths");
    read(p, "metadata", c.paths.metadata, "paths");
    read(p, "partition", c.paths.partition, "paths");
    read(p, "inputs", c.paths.inputs, "paths");
    read(p, "checkpoint", c.paths.checkpoint, "paths");
    read(p, "countries", c.paths.countries, "paths");
    read(p, "cities_csv", c.paths.cities_csv, "paths");
    read(p, "areas_csv", c.paths.areas_csv, "paths");
    read(p, "output", c.paths.output, "paths");
  }
  if (j.contains("partition")) {
    const auto& p = j.at("partition");
    reject_unknown(p, {"t_min", "t_max"}, "partition");
    read(p, "t_min", c.partition.t_min, "partition");
    read(p, "t_max", c.partition.t_max, "partition");
  }
  if (j.contains("model")) {
    c.model = decoder::model_config_from_json(j.at("model"));
    c.model_seed_set = j.at("model").contains("seed");
  }
  if (j.contains("optimizer")) {
    const auto& o = j.at("optimizer");
    reject_unknown(o, {"learning_rate", "momentum", "weight_decay", "milestones", "gamma"}, "optimizer");
    read(o, "learning_rate", c.optimizer.initial_learning_rate, "optimizer");
    c.optimizer.learning_rate = c.optimizer.initial_learning_rate;
    read(o, "momentum", c.optimizer.momentum, "optimizer");
    read(o, "weight_decay", c.optimizer.weight_decay, "optimizer");
    read(o, "milestones", c.optimizer.milestones, "optimizer");
    read(o, "gamma", c.optimizer.gamma, "optimizer");
  }
  if (j.contains("training")) {
    const auto& t = j.at("training");
    reject_unknown(t, {"epochs", "batch_size", "checkpoint_every"}, "training");
    read(t, "epochs", c.training.epochs, "training");
    read(t, "batch_size", c.training.batch_size, "training");
    read(t, "checkpoint_every", c.training.checkpoint_every, "training");
    if (c.training.checkpoint_every < 1) throw ConfigError("training: checkpoint_every must be at least 1");
    if (c.training.epochs < 0) throw ConfigError("training: epochs must be nonnegative");
    if (c.training.batch_size == 0) throw ConfigError("training: batch_size must be positive");
  }
  if (j.contains("eval")) {
    reject_unknown(j.at("eval"), {"tencrop"}, "eval");
    read(j.at("eval"), "tencrop", c.tencrop, "eval");
  }
  if (j.contains("sample")) {
    reject_unknown(j.at("sample"), {"n"}, "sample");
    read(j.at("sample"), "n", c.sample_n, "sample");
  }
  if (j.contains("bias")) {
    const auto& b = j.at("bias");
    reject_unknown(b, {"lat_bins", "lon_bins"}, "bias");
    read(b, "lat_bins", c.bias.lat_bins, "bias");
    read(b, "lon_bins", c.bias.lon_bins, "bias");
  }
  if (j.contains("synthetic")) {
    const auto& s = j.at("synthetic");
    reject_unknown(s, {"images", "clusters", "scenes", "image_size", "channels", "noise", "spread_deg"}, "synthetic");
    read(s, "images", c.synthetic.images, "synthetic");
    read(s, "clusters", c.synthetic.clusters, "synthetic");
    read(s, "scenes", c.synthetic.scenes, "synthetic");
    read(s, "image_size", c.synthetic.image_size, "synthetic");
    read(s, "channels", c.synthetic.channels, "synthetic");
    read(s, "noise", c.synthetic.noise, "synthetic");
    read(s, "spread_deg", c.synthetic.spread_deg, "synthetic");
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::exception& ex) {
    throw ConfigError("cannot read config '" + path.string() + "': " + ex.what());
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError("config '" + path.string() + "': " + ex.what());
  }
  return run_config_from_json(j);
}

nlohmann::json to_json(const RunConfig& c) {
  const auto& s = c.synthetic;
  return {
      {"seed", c.seed},
      {"threads", c.threads},
      {"strict", c.strict},
      {"paths",
       {{"metadata", c.paths.metadata},
        {"partition", c.paths.partition},
        {"inputs", c.paths.inputs},
        {"checkpoint", c.paths.checkpoint},
        {"countries", c.paths.countries},
        {"cities_csv", c.paths.cities_csv},
        {"areas_csv", c.paths.areas_csv},
        {"output", c.paths.output}}},
      {"partition", {{"t_min", c.partition.t_min}, {"t_max", c.partition.t_max}}},
      {"model", decoder::to_json(c.model)},
      {"optimizer",
       {{"learning_rate", c.optimizer.initial_learning_rate},
        {"momentum", c.optimizer.momentum},
        {"weight_decay", c.optimizer.weight_decay},
        {"milestones", c.optimizer.milestones},
        {"gamma", c.optimizer.gamma}}},
      {"training",
       {{"epochs", c.training.epochs},
        {"batch_size", c.training.batch_size},
        {"checkpoint_every", c.training.checkpoint_every}}},
      {"eval", {{"tencrop", c.tencrop}}},
      {"sample", {{"n", c.sample_n}}},
      {"bias", {{"lat_bins", c.bias.lat_bins}, {"lon_bins", c.bias.lon_bins}}},
      {"synthetic",
       {{"images", s.images},
        {"clusters", s.clusters},
        {"scenes", s.scenes},
        {"image_size", s.image_size},
        {"channels", s.channels},
        {"noise", s.noise},
        {"spread_deg", s.spread_deg}}},
  };
}

std::string config_hash(const RunConfig& c, const std::string& command) {
  nlohmann::json j = {{"command", command}, {"config", to_json(c)}};
  return sha256_hex(j.dump());
}

}  // namespace geoquery::cli
