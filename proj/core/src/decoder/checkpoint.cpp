#include "geoquery/decoder/checkpoint.hpp"

#include <algorithm>

#include "geoquery/common/errors.hpp"
#include "geoquery/numerics/archive.hpp"

namespace geoquery::decoder {

namespace {

constexpr const char* kFormat = "geoquery-checkpoint";

nlohmann::json optimizer_json(const numerics::OptimizerState& s) {
  return {{"initial_learning_rate", s.initial_learning_rate},
          {"learning_rate", s.learning_rate},
          {"momentum", s.momentum},
          {"weight_decay", s.weight_decay},
          {"milestones", s.milestones},
          {"gamma", s.gamma}};
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const GeoDecoderModel& model,
                     const numerics::OptimizerState& optimizer,
                     const CheckpointManifest& manifest) {
  numerics::TensorArchive archive;
  archive.meta = {{"format", kFormat},
                  {"version", kCheckpointFormatVersion},
                  {"scalar_bytes", sizeof(numerics::Scalar)},
                  {"model", to_json(model.config())},
                  {"optimizer", optimizer_json(optimizer)},
                  {"partition_sha256", manifest.partition_sha256},
                  {"config_sha256", manifest.config_sha256},
                  {"epoch", manifest.epoch},
                  {"step", manifest.step},
                  {"extra", manifest.extra}};
  const auto& params = model.store().parameters();
  for (const auto& p : params) archive.put("param/" + p.name, p.value);
  const auto& buffers = optimizer.momentum_buffers;
  if (!buffers.empty() && buffers.size() != params.size()) {
    throw std::logic_error("optimizer state does not match the model's parameter list");
  }
  for (std::size_t i = 0; i < buffers.size(); ++i) {
    if (buffers[i].empty()) continue;
    archive.put("momentum/" + params[i].name, params[i].value.shape(), buffers[i]);
  }
  archive.save(path);
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  const auto archive = numerics::TensorArchive::load(path);
  const auto& meta = archive.meta;
  if (meta.value("format", "") != kFormat) {
    throw DataError(path.string() + " is not a geoquery checkpoint");
  }
  if (meta.value("version", 0) != kCheckpointFormatVersion) {
    throw DataError("unsupported checkpoint version in " + path.string());
  }

  ModelConfig config;
  numerics::OptimizerState optimizer;
  CheckpointManifest manifest;
  try {
    config = model_config_from_json(meta.at("model"));
    const auto& o = meta.at("optimizer");
    optimizer.initial_learning_rate = o.at("initial_learning_rate").get<double>();
    optimizer.learning_rate = o.at("learning_rate").get<double>();
    optimizer.momentum = o.at("momentum").get<double>();
    optimizer.weight_decay = o.at("weight_decay").get<double>();
    optimizer.milestones = o.at("milestones").get<std::vector<int>>();
    optimizer.gamma = o.at("gamma").get<double>();
    manifest.partition_sha256 = meta.at("partition_sha256").get<std::string>();
    manifest.config_sha256 = meta.at("config_sha256").get<std::string>();
    manifest.epoch = meta.at("epoch").get<int>();
    manifest.step = meta.at("step").get<std::uint64_t>();
    manifest.extra = meta.at("extra");
  } catch (const nlohmann::json::exception& ex) {
    throw DataError("checkpoint metadata in " + path.string() + ": " + ex.what());
  } catch (const ConfigError& ex) {
    throw DataError("checkpoint model config in " + path.string() + ": " + ex.what());
  }

  GeoDecoderModel model(std::move(config));
  auto& params = model.store().parameters();
  std::size_t param_entries = 0;
  std::size_t momentum_entries = 0;
  for (const auto& e : archive.entries()) {
    if (e.name.rfind("param/", 0) == 0) {
      ++param_entries;
    } else if (e.name.rfind("momentum/", 0) == 0) {
      ++momentum_entries;
    } else {
      throw DataError("unexpected checkpoint entry '" + e.name + "'");
    }
  }
  if (param_entries != params.size()) {
    throw DataError("checkpoint holds " + std::to_string(param_entries) + " parameters, the model has " +
                    std::to_string(params.size()));
  }
  for (auto& p : params) {
    const auto* e = archive.find("param/" + p.name);
    if (!e) throw DataError("checkpoint lacks parameter '" + p.name + "'");
    if (e->shape != p.value.shape()) {
      throw DataError("checkpoint parameter '" + p.name + "' has shape " +
                      numerics::to_string(e->shape) + ", expected " +
                      numerics::to_string(p.value.shape()));
    }
    std::copy(e->values.begin(), e->values.end(), p.value.mutable_data().begin());
  }
  if (momentum_entries > 0) {
    optimizer.momentum_buffers.resize(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
      const auto* e = archive.find("momentum/" + params[i].name);
      if (!e) continue;
      if (e->shape != params[i].value.shape()) {
        throw DataError("momentum buffer for '" + params[i].name + "' has the wrong shape");
      }
      optimizer.momentum_buffers[i] = e->values;
    }
  }
  return {std::move(model), std::move(optimizer), std::move(manifest)};
}

void require_partition(const CheckpointManifest& manifest, const std::string& partition_sha256) {
  if (manifest.partition_sha256 != partition_sha256) {
    throw CompatibilityError("checkpoint was trained against partition " +
                             manifest.partition_sha256 + " but " + partition_sha256 +
                             " was supplied");
  }
}

}  // namespace geoquery::decoder
