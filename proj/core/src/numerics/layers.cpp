#include "geoquery/numerics/layers.hpp"

#include "geoquery/numerics/ops.hpp"

namespace geoquery::numerics {

Linear Linear::create(ParameterStore& store, const std::string& name, std::size_t in,
                      std::size_t out) {
  Linear l;
  l.weight = store.add(name + ".weight", {in, out}, init::uniform_fan_in(in));
  l.bias = store.add(name + ".bias", {out}, init::uniform_fan_in(in));
  return l;
}

Tensor Linear::operator()(const Tensor& x) const { return add_bias(matmul(x, weight), bias); }

LayerNorm LayerNorm::create(ParameterStore& store, const std::string& name, std::size_t width) {
  LayerNorm ln;
  ln.gamma = store.add(name + ".gamma", {width}, init::constant(Scalar{1}));
  ln.beta = store.add(name + ".beta", {width}, init::zeros());
  return ln;
}

Tensor LayerNorm::operator()(const Tensor& x) const { return layer_norm(x, gamma, beta, eps); }

FeedForward FeedForward::create(ParameterStore& store, const std::string& name,
                                std::size_t width, std::size_t hidden_width) {
  FeedForward f;
  f.hidden = Linear::create(store, name + ".hidden", width, hidden_width);
  f.output = Linear::create(store, name + ".output", hidden_width, width);
  return f;
}

Tensor FeedForward::operator()(const Tensor& x) const { return output(gelu(hidden(x))); }

AttentionWeights AttentionWeights::create(ParameterStore& store, const std::string& name,
                                          std::size_t width, std::size_t heads,
                                          bool values_equal_keys) {
  if (heads == 0 || width % heads != 0) {
    throw ShapeError("attention width " + std::to_string(width) + " is not divisible by " +
                     std::to_string(heads) + " heads");
  }
  AttentionWeights w;
  w.query = Linear::create(store, name + ".query", width, width);
  w.key = Linear::create(store, name + ".key", width, width);
  w.value = Linear::create(store, name + ".value", width, width);
  w.output = Linear::create(store, name + ".output", width, width);
  w.heads = heads;
  w.values_equal_keys = values_equal_keys;
  return w;
}

namespace {

AttentionResult attend(const Tensor& queries, const Tensor& memory, const AttentionWeights& w) {
  const auto width = w.width();
  if (queries.rank() != 2 || memory.rank() != 2 || queries.dim(1) != width ||
      memory.dim(1) != width) {
    throw ShapeError("attention: queries " + to_string(queries.shape()) + " and memory " +
                     to_string(memory.shape()) + " must both have width " +
                     std::to_string(width));
  }
  if (w.heads == 0 || width % w.heads != 0) {
    throw ShapeError("attention width " + std::to_string(width) + " is not divisible by " +
                     std::to_string(w.heads) + " heads");
  }
  const auto q = w.query(queries);
  const auto k = w.key(memory);
  const auto v = w.values_equal_keys ? k : w.value(memory);
  const auto head_width = width / w.heads;

  AttentionResult result;
  if (w.heads == 1) {
    Tensor probs;
    auto core = attention_core(q, k, v, &probs);
    result.weights.push_back(probs);
    result.output = w.output(core);
    return result;
  }
  std::vector<Tensor> heads;
  heads.reserve(w.heads);
  for (std::size_t h = 0; h < w.heads; ++h) {
    const auto lo = h * head_width;
    const auto hi = lo + head_width;
    Tensor probs;
    heads.push_back(
        attention_core(slice_cols(q, lo, hi), slice_cols(k, lo, hi), slice_cols(v, lo, hi), &probs));
    result.weights.push_back(probs);
  }
  result.output = w.output(concat_cols(heads));
  return result;
}

}  // namespace

AttentionResult multi_head_self_attention(const Tensor& x, const AttentionWeights& w) {
  return attend(x, x, w);
}

AttentionResult cross_attention(const Tensor& queries, const Tensor& memory,
                                const AttentionWeights& w) {
  return attend(queries, memory, w);
}

}  // namespace geoquery::numerics
