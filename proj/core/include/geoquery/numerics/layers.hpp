#pragma once

#include <string>
#include <vector>

#include "geoquery/numerics/parameter.hpp"
#include "geoquery/numerics/tensor.hpp"

namespace geoquery::numerics {

/// y = x·W + b with W stored [in×out].
struct Linear {
  Tensor weight;
  Tensor bias;

  static Linear create(ParameterStore& store, const std::string& name, std::size_t in,
                       std::size_t out);

  Tensor operator()(const Tensor& x) const;
  std::size_t in_features() const { return weight.dim(0); }
  std::size_t out_features() const { return weight.dim(1); }
};

struct LayerNorm {
  Tensor gamma;
  Tensor beta;
  Scalar eps = Scalar{1e-5};

  static LayerNorm create(ParameterStore& store, const std::string& name, std::size_t width);
  Tensor operator()(const Tensor& x) const;
};

/// Linear -> GELU -> Linear.
struct FeedForward {
  Linear hidden;
  Linear output;

  static FeedForward create(ParameterStore& store, const std::string& name, std::size_t width,
                            std::size_t hidden_width);
  Tensor operator()(const Tensor& x) const;
};

struct AttentionWeights {
  Linear query;
  Linear key;
  Linear value;
  Linear output;
  std::size_t heads = 1;
  // Use the projected keys as values: softmax(QKᵀ/√d_k)·K.
  bool values_equal_keys = false;

  static AttentionWeights create(ParameterStore& store, const std::string& name,
                                 std::size_t width, std::size_t heads,
                                 bool values_equal_keys = false);
  std::size_t width() const { return query.in_features(); }
};

struct AttentionResult {
  Tensor output;
  /// One [Tq×Tk] matrix per head, without history.
  std::vector<Tensor> weights;
};

AttentionResult multi_head_self_attention(const Tensor& x, const AttentionWeights& w);

AttentionResult cross_attention(const Tensor& queries, const Tensor& memory,
                                const AttentionWeights& w);

}  // namespace geoquery::numerics
