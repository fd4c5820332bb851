#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "geoquery/numerics/tensor.hpp"

// Differentiable tensor operations. Every function records history when its
// inputs require grad and grad mode is enabled.
namespace geoquery::numerics {

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, Scalar factor);

/// x[m×n] + bias[n], broadcast over rows.
Tensor add_bias(const Tensor& x, const Tensor& bias);

/// a[m×k] · b[k×n].
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

Tensor softmax(const Tensor& x, std::size_t axis);

/// Normalizes each row over the last dimension, then applies gamma and beta.
Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                  Scalar eps = Scalar{1e-5});

/// Exact (erf) GELU.
Tensor gelu(const Tensor& x);

Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);
/// Column sums of a 2-D tensor: [m×n] -> [n].
Tensor sum_rows(const Tensor& x);

Tensor reshape(const Tensor& x, Shape shape);
Tensor slice_rows(const Tensor& x, std::size_t begin, std::size_t end);
Tensor slice_cols(const Tensor& x, std::size_t begin, std::size_t end);
Tensor concat_rows(std::span<const Tensor> parts);
Tensor concat_cols(std::span<const Tensor> parts);

/// Mean over the batch of -log softmax(logits)[target]. Rank-1 logits are a
/// batch of one.
Tensor cross_entropy(const Tensor& logits, std::span<const std::size_t> targets);

/**
 * softmax(q kᵀ / √d_k) v for a single head.
 *
 * q is [Tq×d_k], k is [Tk×d_k], v is [Tk×d_v]. When `probabilities` is
 * non-null it receives the [Tq×Tk] attention matrix (no history).
 */
Tensor attention_core(const Tensor& q, const Tensor& k, const Tensor& v,
                      Tensor* probabilities = nullptr);

}  // namespace geoquery::numerics
