#include "geoquery/decoder/overfit.hpp"

namespace geoquery::decoder {

SyntheticProblem make_synthetic_problem(const SyntheticSpec& spec,
                                        std::span<const std::int64_t> t_max,
                                        std::int64_t t_min) {
  SyntheticProblem p;
  p.samples = make_synthetic(spec);
  std::vector<geocell::GeoPoint> points;
  points.reserve(p.samples.size());
  for (const auto& s : p.samples) points.push_back(s.location);
  p.partition = geocell::build_stack(points, t_max, t_min);
  for (const auto& s : p.samples) {
    auto labels = geocell::assign_labels(s.location, p.partition);
    if (!geocell::is_complete(labels)) continue;
    p.examples.push_back({s.image, std::move(labels), s.scene});
  }
  return p;
}

ModelConfig synthetic_model_config(const SyntheticProblem& problem, const SyntheticSpec& spec,
                                   std::size_t patch_size, std::uint64_t seed) {
  ModelConfig c;
  c.hierarchies = problem.partition.depth();
  c.scenes = spec.scenes;
  c.dim = 16;
  c.heads = 2;
  c.independent_layers = 1;
  c.dependent_layers = 1;
  c.ffn_multiplier = 2;
  c.classes_per_hierarchy = problem.partition.class_counts();
  c.encoder.kind = EncoderKind::kImage;
  c.encoder.image_size = spec.image_size;
  c.encoder.patch_size = patch_size;
  c.encoder.channels = spec.channels;
  c.encoder.depth = 1;
  c.seed = seed;
  return c;
}

}  // namespace geoquery::decoder
