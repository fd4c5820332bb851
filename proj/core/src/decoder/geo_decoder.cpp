#include "geoquery/decoder/geo_decoder.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "geoquery/numerics/ops.hpp"

namespace geoquery::decoder {

namespace ops = geoquery::numerics;
using numerics::Scalar;
using numerics::ShapeError;

namespace {

constexpr Scalar kQueryInitStd = Scalar{1};
constexpr Scalar kPositionInitStd = Scalar{0.02};

DecoderLayer make_layer(numerics::ParameterStore& store, const ModelConfig& c,
                        const std::string& name, bool dependent) {
  const auto d = c.dim;
  DecoderLayer l;
  l.self_norm = numerics::LayerNorm::create(store, name + ".self_norm", d);
  l.self_attention = numerics::AttentionWeights::create(store, name + ".self_attention", d,
                                                        c.heads, c.values_equal_keys);
  l.cross_query_norm = numerics::LayerNorm::create(store, name + ".cross_query_norm", d);
  l.memory_norm = numerics::LayerNorm::create(store, name + ".memory_norm", d);
  l.cross_attention = numerics::AttentionWeights::create(store, name + ".cross_attention", d,
                                                         c.heads, c.values_equal_keys);
  l.ffn_norm = numerics::LayerNorm::create(store, name + ".ffn_norm", d);
  const auto copies = dependent ? c.hierarchies : std::size_t{1};
  for (std::size_t h = 0; h < copies; ++h) {
    const auto ffn_name = dependent ? name + ".ffn" + std::to_string(h) : name + ".ffn";
    l.ffn.push_back(numerics::FeedForward::create(store, ffn_name, d, d * c.ffn_multiplier));
  }
  return l;
}

void check_layer_inputs(const DecoderLayer& layer, const Tensor& queries, const Tensor& tokens) {
  const auto width = layer.self_attention.width();
  if (queries.rank() != 2 || queries.dim(1) != width) {
    throw ShapeError("decoder layer expects queries [rows×" + std::to_string(width) + "], got " +
                     ops::to_string(queries.shape()));
  }
  if (tokens.rank() != 2 || tokens.dim(1) != width || tokens.dim(0) == 0) {
    throw ShapeError("decoder layer expects tokens [T×" + std::to_string(width) + "], got " +
                     ops::to_string(tokens.shape()));
  }
}

// Cross-attention and feed-forward half of a layer, shared by both variants.
Tensor cross_and_ffn(const DecoderLayer& layer, const numerics::FeedForward& ffn,
                     const Tensor& y_sa, const Tensor& memory, Tensor* first_head) {
  auto ca = numerics::cross_attention(layer.cross_query_norm(y_sa), memory, layer.cross_attention);
  if (first_head) *first_head = ca.weights.front();
  const auto y_ca = ops::add(ca.output, y_sa);
  return ops::add(ffn(layer.ffn_norm(y_ca)), y_ca);
}

// [C×N×N] image -> [(N/p)²×C·p·p], patches in row-major grid order.
Tensor patchify(const Tensor& image, const EncoderConfig& e) {
  const auto n = e.image_size;
  const auto p = e.patch_size;
  if (image.rank() != 3 || image.dim(0) != e.channels || image.dim(1) != n || image.dim(2) != n) {
    throw ShapeError("encoder expects an image [" + std::to_string(e.channels) + "x" +
                     std::to_string(n) + "x" + std::to_string(n) + "], got " +
                     ops::to_string(image.shape()));
  }
  const auto grid = n / p;
  const auto patch_len = e.channels * p * p;
  std::vector<Scalar> out(grid * grid * patch_len);
  const auto src = image.data();
  for (std::size_t gy = 0; gy < grid; ++gy) {
    for (std::size_t gx = 0; gx < grid; ++gx) {
      auto* dst = out.data() + (gy * grid + gx) * patch_len;
      for (std::size_t c = 0; c < e.channels; ++c) {
        for (std::size_t y = 0; y < p; ++y) {
          const auto* row = src.data() + (c * n + gy * p + y) * n + gx * p;
          std::copy(row, row + p, dst + (c * p + y) * p);
        }
      }
    }
  }
  return Tensor::from({grid * grid, patch_len}, std::move(out));
}

}  // namespace

Tensor scene_logits(const Tensor& queries, std::size_t hierarchies) {
  if (queries.rank() != 2 || hierarchies == 0 || queries.dim(0) % hierarchies != 0) {
    throw ShapeError("scene logits: " + ops::to_string(queries.shape()) +
                     " does not split into " + std::to_string(hierarchies) + " hierarchies");
  }
  const auto rows = queries.dim(0) / hierarchies;
  const auto confidence = ops::reshape(ops::slice_cols(queries, 0, 1), {hierarchies, rows});
  return ops::scale(ops::sum_rows(confidence), Scalar{1} / static_cast<Scalar>(hierarchies));
}

Tensor independent_layer(const DecoderLayer& layer, const Tensor& queries, const Tensor& tokens,
                         LayerTrace* trace) {
  check_layer_inputs(layer, queries, tokens);
  if (layer.ffn.size() != 1) throw std::logic_error("independent layer needs exactly one FFN");
  const auto sa = numerics::multi_head_self_attention(layer.self_norm(queries), layer.self_attention);
  const auto y_sa = ops::add(sa.output, queries);
  const auto memory = layer.memory_norm(tokens);
  return cross_and_ffn(layer, layer.ffn.front(), y_sa, memory,
                       trace ? &trace->cross_attention : nullptr);
}

Tensor dependent_layer(const DecoderLayer& layer, const Tensor& queries, const Tensor& tokens,
                       std::size_t hierarchies, LayerTrace* trace) {
  check_layer_inputs(layer, queries, tokens);
  if (hierarchies == 0 || queries.dim(0) % hierarchies != 0) {
    throw ShapeError("dependent layer: " + std::to_string(queries.dim(0)) +
                     " query rows do not split into " + std::to_string(hierarchies) +
                     " hierarchies");
  }
  if (layer.ffn.size() != hierarchies) {
    throw ShapeError("dependent layer holds " + std::to_string(layer.ffn.size()) +
                     " FFNs for " + std::to_string(hierarchies) + " hierarchies");
  }
  const auto rows = queries.dim(0) / hierarchies;
  const auto memory = layer.memory_norm(tokens);
  std::vector<Tensor> blocks;
  std::vector<Tensor> maps;
  blocks.reserve(hierarchies);
  for (std::size_t h = 0; h < hierarchies; ++h) {
    const auto gq = ops::slice_rows(queries, h * rows, (h + 1) * rows);
    const auto sa = numerics::multi_head_self_attention(layer.self_norm(gq), layer.self_attention);
    const auto y_sa = ops::add(sa.output, gq);
    Tensor map;
    blocks.push_back(cross_and_ffn(layer, layer.ffn[h], y_sa, memory, trace ? &map : nullptr));
    if (trace) maps.push_back(map);
  }
  if (trace) trace->cross_attention = ops::concat_rows(maps).detach();
  return ops::concat_rows(blocks);
}

GeoDecoderModel::GeoDecoderModel(ModelConfig config)
    : config_(std::move(config)), store_(config_.seed) {
  config_.validate();
  const auto& c = config_;
  const auto d = c.dim;

  // Creation order defines checkpoint layout; keep it stable.
  encoder_.config = c.encoder;
  if (c.encoder.kind == EncoderKind::kImage) {
    const auto patch_len = c.encoder.channels * c.encoder.patch_size * c.encoder.patch_size;
    encoder_.embed = numerics::Linear::create(store_, "encoder.embed", patch_len, d);
    encoder_.positions = store_.add("encoder.positions", {c.encoder.token_count(), d},
                                    numerics::init::normal(kPositionInitStd));
    for (std::size_t b = 0; b < c.encoder.depth; ++b) {
      const auto name = "encoder.block" + std::to_string(b);
      encoder_.blocks.push_back({
          numerics::LayerNorm::create(store_, name + ".attention_norm", d),
          numerics::AttentionWeights::create(store_, name + ".attention", d, c.heads),
          numerics::LayerNorm::create(store_, name + ".ffn_norm", d),
          numerics::FeedForward::create(store_, name + ".ffn", d, d * c.ffn_multiplier),
      });
    }
    encoder_.final_norm = numerics::LayerNorm::create(store_, "encoder.final_norm", d);
  } else {
    encoder_.embed = numerics::Linear::create(store_, "encoder.embed", c.encoder.token_dim, d);
  }

  queries_ = store_.add("queries", {c.query_rows(), d}, numerics::init::normal(kQueryInitStd));

  for (std::size_t k = 0; k < c.depth(); ++k) {
    const bool dependent = k >= c.independent_layers;
    layers_.push_back(make_layer(store_, c, "decoder.layer" + std::to_string(k), dependent));
  }
  for (std::size_t h = 0; h < c.hierarchies; ++h) {
    const auto name = "classifier" + std::to_string(h);
    if (c.zero_init_heads) {
      numerics::Linear l;
      l.weight = store_.add(name + ".weight", {d, c.classes_per_hierarchy[h]},
                            numerics::init::zeros());
      l.bias = store_.add(name + ".bias", {c.classes_per_hierarchy[h]}, numerics::init::zeros());
      classifiers_.push_back(l);
    } else {
      classifiers_.push_back(
          numerics::Linear::create(store_, name, d, c.classes_per_hierarchy[h]));
    }
  }
}

Tensor GeoDecoderModel::encode(const Tensor& input) const {
  const auto& e = config_.encoder;
  if (e.kind == EncoderKind::kPrecomputed) {
    if (input.rank() != 2 || input.dim(1) != e.token_dim || input.dim(0) == 0) {
      throw ShapeError("encoder expects precomputed tokens [T×" + std::to_string(e.token_dim) +
                       "], got " + ops::to_string(input.shape()));
    }
    return encoder_.embed(input);
  }
  auto x = ops::add(encoder_.embed(patchify(input, e)), encoder_.positions);
  for (const auto& b : encoder_.blocks) {
    x = ops::add(numerics::multi_head_self_attention(b.attention_norm(x), b.attention).output, x);
    x = ops::add(b.ffn(b.ffn_norm(x)), x);
  }
  return (*encoder_.final_norm)(x);
}

ForwardOutput GeoDecoderModel::decode(const Tensor& tokens, bool retain_attention) const {
  const auto& c = config_;
  ForwardOutput out;
  out.hierarchies = c.hierarchies;
  out.scene_rows = c.scene_rows();
  out.has_scenes = c.scenes > 0;

  auto gq = queries_;
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    LayerTrace trace;
    auto* t = retain_attention ? &trace : nullptr;
    gq = k < c.independent_layers ? independent_layer(layers_[k], gq, tokens, t)
                                  : dependent_layer(layers_[k], gq, tokens, c.hierarchies, t);
    if (retain_attention) out.attention.push_back(trace.cross_attention);
  }
  out.queries = gq;

  const auto s = out.scene_rows;
  for (std::size_t h = 0; h < c.hierarchies; ++h) {
    out.geo_logits.push_back(classifiers_[h](ops::slice_rows(gq, h * s, (h + 1) * s)));
  }
  out.scene_logits = scene_logits(gq, c.hierarchies);
  return out;
}

ForwardOutput GeoDecoderModel::forward(const Tensor& input, bool retain_attention) const {
  return decode(encode(input), retain_attention);
}

std::vector<ForwardOutput> GeoDecoderModel::forward_batch(std::span<const Tensor> inputs,
                                                          bool retain_attention) const {
  std::vector<ForwardOutput> outs;
  outs.reserve(inputs.size());
  for (const auto& x : inputs) outs.push_back(forward(x, retain_attention));
  return outs;
}

Tensor loss(const ForwardOutput& out, std::span<const std::optional<std::size_t>> labels,
            std::size_t scene) {
  if (labels.size() != out.hierarchies) {
    throw std::invalid_argument("loss needs " + std::to_string(out.hierarchies) +
                                " labels, got " + std::to_string(labels.size()));
  }
  const auto row = out.has_scenes ? scene : std::size_t{0};
  if (row >= out.scene_rows) {
    throw std::out_of_range("scene " + std::to_string(scene) + " is outside " +
                            std::to_string(out.scene_rows) + " scene rows");
  }
  Tensor total;
  for (std::size_t h = 0; h < out.hierarchies; ++h) {
    if (!labels[h]) {
      throw std::invalid_argument("missing label for hierarchy " + std::to_string(h));
    }
    const std::size_t target = *labels[h];
    auto term = ops::cross_entropy(ops::slice_rows(out.geo_logits[h], row, row + 1), {&target, 1});
    total = total.defined() ? ops::add(total, term) : term;
  }
  if (out.has_scenes) {
    total = ops::add(total, ops::cross_entropy(out.scene_logits, {&row, 1}));
  }
  return total;
}

AttentionMap export_attention(const ForwardOutput& out, std::size_t layer, std::size_t h,
                              std::size_t s) {
  if (out.attention.empty()) {
    throw std::logic_error("attention was not retained; run forward with retention enabled");
  }
  if (layer >= out.attention.size() || h >= out.hierarchies || s >= out.scene_rows) {
    throw std::out_of_range("attention index (layer " + std::to_string(layer) + ", h " +
                            std::to_string(h) + ", s " + std::to_string(s) + ") out of range");
  }
  const auto& a = out.attention[layer];
  const auto t = a.dim(1);
  const auto row = h * out.scene_rows + s;
  AttentionMap map;
  const auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(t))));
  if (side * side == t) {
    map.rows = map.cols = side;
  } else {
    map.rows = 1;
    map.cols = t;
  }
  const auto data = a.data().subspan(row * t, t);
  map.weights.assign(data.begin(), data.end());
  return map;
}

std::vector<std::vector<AttentionMap>> export_attention_grid(const ForwardOutput& out,
                                                             std::size_t layer) {
  std::vector<std::vector<AttentionMap>> grid(out.hierarchies);
  for (std::size_t h = 0; h < out.hierarchies; ++h) {
    for (std::size_t s = 0; s < out.scene_rows; ++s) {
      grid[h].push_back(export_attention(out, layer, h, s));
    }
  }
  return grid;
}

}  // namespace geoquery::decoder
