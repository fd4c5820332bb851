#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "geoquery/decoder/geo_decoder.hpp"
#include "geoquery/geocell/geo_point.hpp"
#include "geoquery/geocell/partition.hpp"

namespace geoquery::inference {

struct Prediction {
  std::size_t fine_class = 0;
  /// Centroid of the predicted fine class.
  geocell::GeoPoint point;
  /// Unnormalized product scores over the finest classes.
  std::vector<double> composed_scores;
  std::size_t scene = 0;
};

/// Argmax of the scene logits, lowest index on ties.
std::size_t select_scene(std::span<const numerics::Scalar> scene_logits);
std::size_t select_scene(const decoder::ForwardOutput& out);

/// Lowest index among the maxima.
std::size_t argmax(std::span<const double> values);

/**
 * Score of each finest class: its probability times the probability of each
 * ancestor along the parent chain. Not renormalized.
 *
 * `parent_maps[k]` maps classes of hierarchy k + 1 into hierarchy k. Throws
 * std::invalid_argument on size mismatches and std::out_of_range on a parent
 * index outside the coarser hierarchy.
 */
std::vector<double> compose(const std::vector<std::vector<double>>& per_hierarchy,
                            const std::vector<std::vector<std::size_t>>& parent_maps);
std::vector<double> compose(const std::vector<std::vector<double>>& per_hierarchy,
                            const geocell::PartitionStack& stack);

/// Throws CompatibilityError unless the model heads match the stack's class counts.
void require_compatible(const decoder::GeoDecoderModel& model, const geocell::PartitionStack& stack);

/**
 * Full inference on one input.
 *
 * Image models: an input already at the model resolution is used as is;
 * otherwise the shorter side is resized to resize_target(image_size) and the
 * centre crop taken. With `use_tencrop` the resized image yields ten crops.
 * Precomputed-token models accept only single inputs (no crops).
 *
 * The scene is the argmax of the crop-averaged scene logits. Each hierarchy's
 * logits at that row are softmaxed per crop, the probabilities averaged over
 * crops, then composed along the parent chains.
 */
Prediction predict(const numerics::Tensor& input, const decoder::GeoDecoderModel& model,
                   const geocell::PartitionStack& stack, bool use_tencrop);

/// predict() over many inputs on `threads` workers; results are in input
/// order and independent of the thread count.
std::vector<Prediction> predict_all(std::span<const numerics::Tensor> inputs,
                                    const decoder::GeoDecoderModel& model,
                                    const geocell::PartitionStack& stack, bool use_tencrop,
                                    std::size_t threads = 1);

}  // namespace geoquery::inference
