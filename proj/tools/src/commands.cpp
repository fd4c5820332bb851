#include "commands.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>

#include "geoquery/common/hash.hpp"
#include "geoquery/datatools/inequality.hpp"
#include "geoquery/datatools/records.hpp"
#include "geoquery/datatools/sampling.hpp"
#include "geoquery/decoder/checkpoint.hpp"
#include "geoquery/decoder/geo_decoder.hpp"
#include "geoquery/decoder/synthetic.hpp"
#include "geoquery/decoder/training.hpp"
#include "geoquery/geocell/partition.hpp"
#include "geoquery/geocell/partition_io.hpp"
#include "geoquery/inference/geodesy.hpp"
#include "geoquery/inference/predict.hpp"
#include "geoquery/inference/report.hpp"
#include "geoquery/numerics/archive.hpp"

namespace geoquery::cli {

namespace fs = std::filesystem;
namespace dt = datatools;
namespace dc = decoder;
namespace gc = geocell;
namespace inf = inference;
namespace nx = numerics;

void Context::begin() {
  hash_ = config_hash(config, command);
  nlohmann::json j = {{"command", command}, {"config_sha256", hash_}, {"config", to_json(config)}};
  err << "geoquery: resolved config " << j.dump() << "\n";
}

void Context::warn(const std::string& message) {
  if (config.strict) throw StrictModeError("strict mode: " + message);
  err << "geoquery: warning: " << message << "\n";
}

namespace {

const std::string& require_path(const std::string& value, const char* option) {
  if (value.empty()) throw UsageError(std::string("missing required path: ") + option);
  return value;
}

std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

/// First line of every line-delimited output.
std::string header_line(const Context& ctx, const char* format) {
  nlohmann::json j = {{"format", format}, {"config_sha256", ctx.hash()}, {"command", ctx.command}};
  return j.dump() + "\n";
}

std::string csv_header(const Context& ctx) { return "# config_sha256=" + ctx.hash() + "\n"; }

void write_output(const Context& ctx, const std::string& path, const std::string& text) {
  if (path.empty()) {
    ctx.out << text;
    return;
  }
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  write_file(p, text);
}

fs::path output_dir(const Context& ctx) {
  const fs::path dir(require_path(ctx.config.paths.output, "--out"));
  fs::create_directories(dir);
  return dir;
}

std::vector<std::int64_t> resolved_t_max(const RunConfig& c) {
  if (!c.partition.t_max.empty()) return c.partition.t_max;
  try {
    return gc::default_t_max(c.model.hierarchies);
  } catch (const std::invalid_argument& ex) {
    throw UsageError(ex.what());
  }
}

struct Dataset {
  std::vector<std::string> ids;
  std::vector<gc::GeoPoint> truth;
  std::vector<dc::Example> examples;
};

/// Pairs each record with its input tensor and label chain. Records whose
/// location falls outside every finest class are dropped with a warning.
Dataset build_dataset(Context& ctx, const std::vector<dt::ImageRecord>& records,
                      const nx::TensorArchive& inputs, const gc::PartitionStack& stack, std::size_t scenes,
                      bool need_labels) {
  Dataset d;
  std::size_t dropped = 0;
  for (const auto& r : records) {
    if (!inputs.find(r.id)) throw DataError("inputs archive has no entry for record '" + r.id + "'");
    dc::Example ex;
    if (need_labels) {
      ex.labels = gc::assign_labels(r.location, stack);
      if (!gc::is_complete(ex.labels)) {
        ++dropped;
        continue;
      }
      if (scenes > 0) {
        if (!r.scene_id) throw DataError("record '" + r.id + "' has no scene_id but the model has scene queries");
        if (*r.scene_id >= scenes) {
          throw DataError("record '" + r.id + "' has scene_id " + std::to_string(*r.scene_id) + " >= " +
                          std::to_string(scenes));
        }
        ex.scene = *r.scene_id;
      }
    }
    ex.input = inputs.tensor(r.id);
    d.ids.push_back(r.id);
    d.truth.push_back(r.location);
    d.examples.push_back(std::move(ex));
  }
  if (dropped > 0) {
    ctx.warn(std::to_string(dropped) + " of " + std::to_string(records.size()) +
             " records fall outside the finest partition and were dropped");
  }
  return d;
}

std::vector<dt::ImageRecord> load_metadata(Context& ctx) {
  auto records = dt::load_records(require_path(ctx.config.paths.metadata, "--metadata"));
  if (records.empty()) ctx.warn("metadata '" + ctx.config.paths.metadata + "' has no records");
  return records;
}

}  // namespace

void cmd_partition(Context& ctx) {
  auto& c = ctx.config;
  c.partition.t_max = resolved_t_max(c);
  const auto& t_max = c.partition.t_max;
  if (t_max.empty()) throw UsageError("t_max list is empty");
  for (std::size_t k = 1; k < t_max.size(); ++k) {
    if (t_max[k] >= t_max[k - 1]) throw UsageError("t_max list must be strictly decreasing");
  }
  if (c.partition.t_min < 1 || t_max.back() < c.partition.t_min) {
    throw UsageError("t_min must be at least 1 and at most every t_max");
  }
  c.model.hierarchies = t_max.size();
  const auto& out_path = require_path(c.paths.partition, "--out");
  ctx.begin();

  const auto records = load_metadata(ctx);
  std::vector<gc::GeoPoint> points;
  points.reserve(records.size());
  for (const auto& r : records) points.push_back(r.location);
  const auto stack = gc::build_stack(points, t_max, c.partition.t_min);

  const nlohmann::json provenance = {{"config_sha256", ctx.hash()},
                                     {"metadata_sha256", sha256_file(c.paths.metadata)},
                                     {"records", records.size()}};
  const fs::path p(out_path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  gc::save_partition(p, stack, provenance);

  const auto counts = stack.class_counts();
  for (std::size_t h = 0; h < counts.size(); ++h) {
    ctx.out << "hierarchy " << h + 1 << " (t_max " << t_max[h] << "): " << counts[h] << " classes\n";
  }
}

void cmd_synth(Context& ctx) {
  auto& c = ctx.config;
  c.synthetic.seed = c.seed;
  const auto dir = output_dir(ctx);
  ctx.begin();
  const auto samples = dc::make_synthetic(c.synthetic);
  nx::TensorArchive inputs;
  inputs.meta = {{"config_sha256", ctx.hash()}, {"kind", "image"}};
  std::string metadata;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const auto& s = samples[k];
    dt::ImageRecord r{"img" + std::to_string(k), s.location, "p" + std::to_string(k % 8), s.scene,
                      "cluster" + std::to_string(s.cluster)};
    metadata += dt::record_line(r) + "\n";
    inputs.put(r.id, s.image);
  }
  write_file(dir / "metadata.jsonl", metadata);
  inputs.save(dir / "inputs.gqta");
  ctx.out << "wrote " << samples.size() << " synthetic images to " << dir.string() << "\n";
}

void cmd_train(Context& ctx) {
  auto& c = ctx.config;
  const auto& partition_path = require_path(c.paths.partition, "--partition");
  const auto dir = output_dir(ctx);
  const auto stack = gc::load_partition(partition_path);
  const auto partition_sha = sha256_file(partition_path);

  std::optional<dc::LoadedCheckpoint> resumed;
  if (!c.paths.checkpoint.empty()) {
    resumed.emplace(dc::load_checkpoint(c.paths.checkpoint));
    dc::require_partition(resumed->manifest, partition_sha);
    c.model = resumed->model.config();
    c.model_seed_set = true;
  } else {
    c.model.hierarchies = stack.depth();
    c.model.classes_per_hierarchy = stack.class_counts();
    if (!c.model_seed_set) c.model.seed = c.seed;
  }
  c.model.validate();
  ctx.begin();

  const auto records = load_metadata(ctx);
  const auto inputs = nx::TensorArchive::load(require_path(c.paths.inputs, "--inputs"));
  const auto data = build_dataset(ctx, records, inputs, stack, c.model.scenes, true);
  if (data.examples.empty()) throw DataError("no trainable records");

  dc::GeoDecoderModel model = resumed ? std::move(resumed->model) : dc::GeoDecoderModel(c.model);
  dc::Trainer trainer(model, resumed ? resumed->optimizer : c.optimizer, c.seed);
  if (resumed) trainer.resume(resumed->manifest.epoch, resumed->manifest.step);
  const auto batch = std::min(c.training.batch_size, data.examples.size());

  const auto log_path = dir / "loss.jsonl";
  std::ofstream log(log_path, resumed ? std::ios::app : std::ios::trunc);
  if (!log) throw DataError("cannot open " + log_path.string());
  log << header_line(ctx, "geoquery-loss-log");

  while (trainer.epoch() < c.training.epochs) {
    const int epoch = trainer.epoch();
    const double mean = trainer.run_epoch(data.examples, batch, [&](const dc::StepStats& s) {
      nlohmann::json j = {{"epoch", s.epoch}, {"step", s.step}, {"loss", s.loss}, {"learning_rate", s.learning_rate}};
      log << j.dump() << "\n";
    });
    log.flush();
    dc::CheckpointManifest manifest{partition_sha, trainer.epoch(), trainer.steps(), ctx.hash(),
                                    {{"command", "train"}}};
    if (trainer.epoch() % c.training.checkpoint_every == 0 || trainer.epoch() == c.training.epochs) {
      dc::save_checkpoint(dir / ("checkpoint-epoch" + std::to_string(trainer.epoch()) + ".gqta"), model,
                          trainer.optimizer(), manifest);
    }
    dc::save_checkpoint(dir / "checkpoint.gqta", model, trainer.optimizer(), manifest);
    ctx.out << "epoch " << epoch + 1 << "/" << c.training.epochs << " mean loss " << fixed(mean) << "\n";
  }
  if (!fs::exists(dir / "checkpoint.gqta")) {
    dc::save_checkpoint(dir / "checkpoint.gqta", model, trainer.optimizer(),
                        {partition_sha, trainer.epoch(), trainer.steps(), ctx.hash(), {{"command", "train"}}});
  }
  const double accuracy = dc::finest_accuracy(model, data.examples);
  nlohmann::json summary = {{"config_sha256", ctx.hash()},
                            {"examples", data.examples.size()},
                            {"epochs", trainer.epoch()},
                            {"steps", trainer.steps()},
                            {"train_finest_accuracy", accuracy}};
  write_file(dir / "train_summary.json", summary.dump(2) + "\n");
  ctx.out << "train finest accuracy " << fixed(accuracy, 4) << " over " << data.examples.size() << " images\n";
}

namespace {

struct Loaded {
  dc::LoadedCheckpoint checkpoint;
  gc::PartitionStack stack;
};

Loaded load_for_inference(Context& ctx) {
  auto& c = ctx.config;
  const auto& partition_path = require_path(c.paths.partition, "--partition");
  Loaded l{dc::load_checkpoint(require_path(c.paths.checkpoint, "--checkpoint")), gc::load_partition(partition_path)};
  dc::require_partition(l.checkpoint.manifest, sha256_file(partition_path));
  inf::require_compatible(l.checkpoint.model, l.stack);
  c.model = l.checkpoint.model.config();
  c.model_seed_set = true;
  if (c.tencrop && c.model.encoder.kind != dc::EncoderKind::kImage) {
    throw UsageError("--tencrop needs an image-encoder checkpoint");
  }
  return l;
}

}  // namespace

void cmd_eval(Context& ctx) {
  auto& c = ctx.config;
  const auto loaded = load_for_inference(ctx);
  const auto dir = output_dir(ctx);
  ctx.begin();

  const auto records = load_metadata(ctx);
  const auto inputs = nx::TensorArchive::load(require_path(c.paths.inputs, "--inputs"));
  const auto data = build_dataset(ctx, records, inputs, loaded.stack, 0, false);
  std::vector<nx::Tensor> tensors;
  tensors.reserve(data.examples.size());
  for (const auto& ex : data.examples) tensors.push_back(ex.input);
  const auto predictions = inf::predict_all(tensors, loaded.checkpoint.model, loaded.stack, c.tencrop, c.threads);

  std::vector<gc::GeoPoint> predicted;
  std::string lines = header_line(ctx, "geoquery-predictions");
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    predicted.push_back(predictions[i].point);
    lines += inf::prediction_line(data.ids[i], predictions[i], data.truth[i]) + "\n";
  }
  const auto report = inf::evaluate(predicted, data.truth);
  write_file(dir / "predictions.jsonl", lines);
  nlohmann::json rj = {{"config_sha256", ctx.hash()}, {"tencrop", c.tencrop}, {"report", inf::report_json(report)}};
  write_file(dir / "report.json", rj.dump(2) + "\n");
  const auto table = inf::report_table(report);
  write_file(dir / "report.csv", csv_header(ctx) + table);
  ctx.out << table;
}

void cmd_predict(Context& ctx) {
  auto& c = ctx.config;
  const auto loaded = load_for_inference(ctx);
  ctx.begin();
  const auto inputs = nx::TensorArchive::load(require_path(c.paths.inputs, "--inputs"));
  std::vector<std::string> ids;
  if (!c.paths.metadata.empty()) {
    for (const auto& r : load_metadata(ctx)) ids.push_back(r.id);
  } else {
    for (const auto& e : inputs.entries()) ids.push_back(e.name);
  }
  std::vector<nx::Tensor> tensors;
  for (const auto& id : ids) {
    if (!inputs.find(id)) throw DataError("inputs archive has no entry for record '" + id + "'");
    tensors.push_back(inputs.tensor(id));
  }
  const auto predictions = inf::predict_all(tensors, loaded.checkpoint.model, loaded.stack, c.tencrop, c.threads);
  std::string lines = header_line(ctx, "geoquery-predictions");
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const auto& p = predictions[i];
    nlohmann::json j = {{"id", ids[i]},
                        {"lat", p.point.lat_deg()},
                        {"lon", p.point.lon_deg()},
                        {"fine_class", p.fine_class},
                        {"scene", p.scene}};
    lines += j.dump() + "\n";
  }
  write_output(ctx, c.paths.output, lines);
}

void cmd_sample(Context& ctx) {
  auto& c = ctx.config;
  if (c.sample_n == 0) throw UsageError("--n must be at least 1");
  const bool from_json = !c.paths.countries.empty();
  const bool from_csv = !c.paths.cities_csv.empty() || !c.paths.areas_csv.empty();
  if (from_json == from_csv) throw UsageError("give either --countries or both --cities-csv and --areas-csv");
  ctx.begin();

  std::vector<dt::CountryRecord> countries;
  if (from_json) {
    countries = dt::load_countries(c.paths.countries);
  } else {
    auto imported = dt::import_simplemaps(read_file(require_path(c.paths.cities_csv, "--cities-csv")),
                                          read_file(require_path(c.paths.areas_csv, "--areas-csv")));
    if (!imported.missing_area.empty()) {
      std::string names;
      for (const auto& n : imported.missing_area) names += (names.empty() ? "" : ", ") + n;
      ctx.warn("no area for " + std::to_string(imported.missing_area.size()) + " countries, skipped: " + names);
    }
    countries = std::move(imported.countries);
  }
  if (countries.empty()) throw DataError("country database is empty");
  const auto manifest = dt::sample_locations(countries, c.sample_n, c.seed);
  std::string text = header_line(ctx, "geoquery-sample-manifest");
  for (const auto& e : manifest) text += dt::manifest_line(e) + "\n";
  write_output(ctx, c.paths.output, text);
}

void cmd_bias(Context& ctx) {
  auto& c = ctx.config;
  if (c.bias.lat_bins == 0 || c.bias.lon_bins == 0) throw UsageError("heatmap bins must be at least 1");
  const auto dir = output_dir(ctx);
  ctx.begin();
  const auto records = load_metadata(ctx);
  const auto per_city = dt::counts_per_city(records);
  std::size_t with_city = 0;
  for (const auto& [_, n] : per_city) with_city += n;
  if (with_city < records.size()) {
    ctx.warn(std::to_string(records.size() - with_city) + " records have no city and are left out of the counts");
  }
  if (per_city.empty()) throw DataError("no record carries a city; nothing to measure");

  std::vector<std::string> labels;
  std::vector<double> counts;
  for (const auto& [city, n] : per_city) {
    labels.push_back(city);
    counts.push_back(static_cast<double>(n));
  }
  const auto stats = dt::distribution_stats(labels, counts);

  nlohmann::json cities = nlohmann::json::array();
  for (std::size_t i = 0; i < labels.size(); ++i) cities.push_back({{"city", labels[i]}, {"count", per_city.at(labels[i])}});
  nlohmann::json sj = {{"config_sha256", ctx.hash()},
                       {"images", records.size()},
                       {"cities", labels.size()},
                       {"gini", stats.gini},
                       {"counts", cities}};
  write_file(dir / "stats.json", sj.dump(2) + "\n");

  std::string lorenz = csv_header(ctx) + "population_share,image_share\n";
  for (const auto& [x, y] : stats.lorenz) lorenz += fixed(x, 9) + "," + fixed(y, 9) + "\n";
  write_file(dir / "lorenz.csv", lorenz);

  std::vector<gc::GeoPoint> points;
  for (const auto& r : records) points.push_back(r.location);
  write_file(dir / "heatmap.csv",
             csv_header(ctx) + dt::heatmap_csv(dt::heatmap_grid(points, c.bias.lat_bins, c.bias.lon_bins)));
  ctx.out << "cities " << labels.size() << " images " << with_city << " gini " << fixed(stats.gini) << "\n";
}

}  // namespace geoquery::cli
