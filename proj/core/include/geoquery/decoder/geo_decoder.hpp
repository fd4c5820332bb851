#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "geoquery/decoder/model_config.hpp"
#include "geoquery/numerics/layers.hpp"
#include "geoquery/numerics/parameter.hpp"
#include "geoquery/numerics/tensor.hpp"

namespace geoquery::decoder {

using numerics::Tensor;

/// Pre-norm transformer block used by the image encoder.
struct EncoderBlock {
  numerics::LayerNorm attention_norm;
  numerics::AttentionWeights attention;
  numerics::LayerNorm ffn_norm;
  numerics::FeedForward ffn;
};

struct Encoder {
  EncoderConfig config;
  numerics::Linear embed;  // patch pixels or external token features -> D
  Tensor positions;        // [T×D], image path only
  std::vector<EncoderBlock> blocks;
  std::optional<numerics::LayerNorm> final_norm;
};

/**
 * One decoder layer. Independent layers hold a single FFN shared by every
 * query row; dependent layers hold one FFN per hierarchy.
 */
struct DecoderLayer {
  numerics::LayerNorm self_norm;
  numerics::AttentionWeights self_attention;
  numerics::LayerNorm cross_query_norm;
  numerics::LayerNorm memory_norm;
  numerics::AttentionWeights cross_attention;
  numerics::LayerNorm ffn_norm;
  std::vector<numerics::FeedForward> ffn;
};

/// First-head cross-attention of a layer, [(H·S)×T].
struct LayerTrace {
  Tensor cross_attention;
};

/// Every query row attends to every other row.
Tensor independent_layer(const DecoderLayer& layer, const Tensor& queries, const Tensor& tokens,
                         LayerTrace* trace = nullptr);

/// Self-attention and FFN act on each hierarchy's block of `scene_rows` rows
/// separately; cross-attention weights are shared.
Tensor dependent_layer(const DecoderLayer& layer, const Tensor& queries, const Tensor& tokens,
                       std::size_t hierarchies, LayerTrace* trace = nullptr);

struct ForwardOutput {
  std::size_t hierarchies = 0;
  std::size_t scene_rows = 0;
  /// Whether the scene loss applies (scenes > 0).
  bool has_scenes = true;
  /// H tensors of [S×C_h].
  std::vector<Tensor> geo_logits;
  /// [S]: mean over hierarchies of channel 0 of each scene row.
  Tensor scene_logits;
  /// Final queries [(H·S)×D].
  Tensor queries;
  /// One [(H·S)×T] tensor per decoder layer when retention was requested.
  std::vector<Tensor> attention;
};

/// [S]: channel 0 of every query row averaged over hierarchies.
Tensor scene_logits(const Tensor& queries, std::size_t hierarchies);

class GeoDecoderModel {
 public:
  /// Validates the config and initializes parameters from config.seed.
  explicit GeoDecoderModel(ModelConfig config);

  GeoDecoderModel(GeoDecoderModel&&) = default;
  GeoDecoderModel& operator=(GeoDecoderModel&&) = default;

  const ModelConfig& config() const { return config_; }
  numerics::ParameterStore& store() { return store_; }
  const numerics::ParameterStore& store() const { return store_; }

  const Encoder& encoder() const { return encoder_; }
  const std::vector<DecoderLayer>& layers() const { return layers_; }
  std::vector<DecoderLayer>& layers() { return layers_; }
  const std::vector<numerics::Linear>& classifiers() const { return classifiers_; }
  /// The learned initial queries GQ [(H·S)×D].
  const Tensor& queries() const { return queries_; }

  /// [C×S×S] image or [T×token_dim] features -> [T×D].
  Tensor encode(const Tensor& input) const;
  /// Decoder stack and heads on already encoded tokens.
  ForwardOutput decode(const Tensor& tokens, bool retain_attention = false) const;
  ForwardOutput forward(const Tensor& input, bool retain_attention = false) const;
  /// Item-wise forward; safe to call from several threads with gradients off.
  std::vector<ForwardOutput> forward_batch(std::span<const Tensor> inputs,
                                           bool retain_attention = false) const;

 private:
  ModelConfig config_;
  numerics::ParameterStore store_;
  Encoder encoder_;
  Tensor queries_;
  std::vector<DecoderLayer> layers_;
  std::vector<numerics::Linear> classifiers_;
};

/**
 * L = Σ_h CE(geo_logits[h] at the ground-truth scene row, labels[h]) + CE(scene_logits, scene).
 *
 * `labels` must hold a class for every hierarchy; a missing entry throws
 * std::invalid_argument. The scene term is dropped for scene-less models.
 */
Tensor loss(const ForwardOutput& out, std::span<const std::optional<std::size_t>> labels,
            std::size_t scene);

/// Row-major attention map with its patch-grid shape.
struct AttentionMap {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<numerics::Scalar> weights;
};

/// First-head cross-attention of query (h, s) at `layer`. Throws
/// std::logic_error when the forward pass did not retain attention.
AttentionMap export_attention(const ForwardOutput& out, std::size_t layer, std::size_t h,
                              std::size_t s);

/// All H·S maps of one layer, hierarchy-major (H rows of S maps).
std::vector<std::vector<AttentionMap>> export_attention_grid(const ForwardOutput& out,
                                                             std::size_t layer);

}  // namespace geoquery::decoder
