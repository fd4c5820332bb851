#include "app.hpp"

#include <functional>
#include <optional>
#include <ostream>

#include <CLI11.hpp>

#include "commands.hpp"

namespace geoquery::cli {

namespace {

/// Command-line values; each one set overrides the config file.
struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  bool strict = false;
  std::optional<std::string> metadata, partition, inputs, checkpoint, countries, cities_csv, areas_csv, output;
  std::optional<std::int64_t> t_min;
  std::vector<std::int64_t> t_max;
  std::optional<std::size_t> hierarchies;
  std::optional<int> epochs;
  std::optional<std::size_t> batch_size;
  bool tencrop = false;
  std::optional<std::size_t> n;
  std::optional<std::size_t> lat_bins, lon_bins;
  std::optional<std::size_t> images, clusters, scenes, image_size;
};

template <typename T>
void apply(const std::optional<T>& value, T& target) {
  if (value) target = *value;
}

RunConfig resolve(const Overrides& o) {
  RunConfig c = o.config_path.empty() ? RunConfig{} : load_run_config(o.config_path);
  apply(o.seed, c.seed);
  apply(o.threads, c.threads);
  if (o.strict) c.strict = true;
  apply(o.metadata, c.paths.metadata);
  apply(o.partition, c.paths.partition);
  apply(o.inputs, c.paths.inputs);
  apply(o.checkpoint, c.paths.checkpoint);
  apply(o.countries, c.paths.countries);
  apply(o.cities_csv, c.paths.cities_csv);
  apply(o.areas_csv, c.paths.areas_csv);
  apply(o.output, c.paths.output);
  apply(o.t_min, c.partition.t_min);
  if (!o.t_max.empty()) c.partition.t_max = o.t_max;
  if (o.hierarchies) {
    c.model.hierarchies = *o.hierarchies;
    c.partition.t_max.clear();
  }
  apply(o.epochs, c.training.epochs);
  apply(o.batch_size, c.training.batch_size);
  if (o.tencrop) c.tencrop = true;
  apply(o.n, c.sample_n);
  apply(o.lat_bins, c.bias.lat_bins);
  apply(o.lon_bins, c.bias.lon_bins);
  apply(o.images, c.synthetic.images);
  apply(o.clusters, c.synthetic.clusters);
  apply(o.scenes, c.synthetic.scenes);
  apply(o.image_size, c.synthetic.image_size);
  if (c.threads == 0) throw UsageError("--threads must be at least 1");
  // Strict runs are single-threaded so that nothing depends on scheduling.
  if (c.strict) c.threads = 1;
  return c;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hierarchical geocell partitioning, geolocation training, evaluation and dataset tooling",
               "geoquery"};
  app.require_subcommand(1);
  app.fallthrough();
  Overrides o;
  app.add_option("--config", o.config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--seed", o.seed, "Seed for every random choice");
  app.add_option("--threads", o.threads, "Worker threads for inference (forced to 1 by --strict)");
  app.add_flag("--strict", o.strict, "Single-threaded, deterministic run; warnings become errors");

  using Command = std::function<void(Context&)>;
  std::map<CLI::App*, std::pair<std::string, Command>> commands;
  const auto add = [&](const char* name, const char* help, Command fn) {
    auto* sub = app.add_subcommand(name, help);
    commands[sub] = {name, std::move(fn)};
    return sub;
  };

  auto* part = add("partition", "Build the geocell hierarchy stack from image metadata", cmd_partition);
  part->add_option("--metadata", o.metadata, "Image records (JSON lines)");
  part->add_option("--out", o.partition, "Partition file to write");
  part->add_option("--t-min", o.t_min, "Minimum images per class");
  part->add_option("--t-max", o.t_max, "Maximum images per class, one per hierarchy, decreasing");
  part->add_option("--hierarchies", o.hierarchies, "Number of hierarchies when --t-max is not given");

  auto* train = add("train", "Train the decoder against a partition", cmd_train);
  train->add_option("--metadata", o.metadata, "Image records (JSON lines)");
  train->add_option("--partition", o.partition, "Partition file");
  train->add_option("--inputs", o.inputs, "Tensor archive of images or token features keyed by record id");
  train->add_option("--out", o.output, "Directory for checkpoints and the loss log");
  train->add_option("--resume", o.checkpoint, "Checkpoint to continue from");
  train->add_option("--epochs", o.epochs, "Total epochs");
  train->add_option("--batch-size", o.batch_size, "Batch size (clamped to the dataset size)");

  auto* eval = add("eval", "Evaluate a checkpoint at the geodesic thresholds", cmd_eval);
  eval->add_option("--checkpoint", o.checkpoint, "Checkpoint file");
  eval->add_option("--partition", o.partition, "Partition file the checkpoint was trained on");
  eval->add_option("--metadata", o.metadata, "Records with true locations");
  eval->add_option("--inputs", o.inputs, "Tensor archive keyed by record id");
  eval->add_option("--out", o.output, "Directory for the report and prediction dump");
  eval->add_flag("--tencrop", o.tencrop, "Average predictions over ten crops");

  auto* predict = add("predict", "Predict locations for inputs", cmd_predict);
  predict->add_option("--checkpoint", o.checkpoint, "Checkpoint file");
  predict->add_option("--partition", o.partition, "Partition file the checkpoint was trained on");
  predict->add_option("--inputs", o.inputs, "Tensor archive keyed by record id");
  predict->add_option("--metadata", o.metadata, "Optional records selecting and ordering the inputs");
  predict->add_option("--out", o.output, "Output file (standard output when omitted)");
  predict->add_flag("--tencrop", o.tencrop, "Average predictions over ten crops");

  auto* sample = add("sample", "Write an area-weighted location sampling manifest", cmd_sample);
  sample->add_option("--countries", o.countries, "Country database (JSON)");
  sample->add_option("--cities-csv", o.cities_csv, "World cities CSV (city, lat, lng, country columns)");
  sample->add_option("--areas-csv", o.areas_csv, "Country areas CSV (country, area_km2 columns)");
  sample->add_option("--n", o.n, "Number of locations");
  sample->add_option("--out", o.output, "Manifest file (standard output when omitted)");

  auto* bias = add("bias", "Per-city inequality statistics, Lorenz curve and heatmap", cmd_bias);
  bias->add_option("--metadata", o.metadata, "Image records (JSON lines) with city fields");
  bias->add_option("--out", o.output, "Directory for stats.json, lorenz.csv and heatmap.csv");
  bias->add_option("--lat-bins", o.lat_bins, "Heatmap rows");
  bias->add_option("--lon-bins", o.lon_bins, "Heatmap columns");

  auto* synth = add("synth", "Generate a synthetic image dataset for smoke runs", cmd_synth);
  synth->add_option("--out", o.output, "Directory for metadata.jsonl and inputs.gqta");
  synth->add_option("--images", o.images, "Number of images");
  synth->add_option("--clusters", o.clusters, "Number of location clusters");
  synth->add_option("--scenes", o.scenes, "Number of scene labels");
  synth->add_option("--image-size", o.image_size, "Image side in pixels");

  std::vector<std::string> reversed(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& ex) {
    err << "geoquery: " << ex.what() << "\n";
    if (const auto* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front()) {
      err << "Run with --help for usage of '" << sub->get_name() << "'.\n";
    }
    return kExitUsage;
  }

  auto* chosen = app.get_subcommands().front();
  const auto& [name, fn] = commands.at(chosen);
  try {
    Context ctx(resolve(o), name, out, err);
    fn(ctx);
    return kExitOk;
  } catch (const ConfigError& ex) {
    err << "geoquery " << name << ": " << ex.what() << "\n";
    return kExitUsage;
  } catch (const DataError& ex) {
    err << "geoquery " << name << ": " << ex.what() << "\n";
    return kExitData;
  } catch (const CompatibilityError& ex) {
    err << "geoquery " << name << ": " << ex.what() << "\n";
    return kExitData;
  } catch (const std::filesystem::filesystem_error& ex) {
    err << "geoquery " << name << ": " << ex.what() << "\n";
    return kExitData;
  } catch (const std::exception& ex) {
    err << "geoquery " << name << ": internal error: " << ex.what() << "\n";
    return kExitInternal;
  }
}

}  // namespace geoquery::cli
