#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "geoquery/numerics/tensor.hpp"

// Raw loops shared by the differentiable ops. Reduction order is fixed, so
// results are bit-reproducible.
namespace geoquery::numerics::kernels {

/// C[m×n] += op(A) · op(B) where op(A) is m×k and op(B) is k×n.
/// Stored layouts: A is m×k (or k×m when trans_a), B is k×n (or n×k when trans_b).
inline void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k,
                 const Scalar* a, const Scalar* b, Scalar* c) {
  if (!trans_a && !trans_b) {
    for (std::size_t i = 0; i < m; ++i) {
      auto* crow = c + i * n;
      for (std::size_t p = 0; p < k; ++p) {
        const auto av = a[i * k + p];
        const auto* brow = b + p * n;
        for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
      }
    }
  } else if (!trans_a && trans_b) {
    for (std::size_t i = 0; i < m; ++i) {
      const auto* arow = a + i * k;
      for (std::size_t j = 0; j < n; ++j) {
        const auto* brow = b + j * k;
        Scalar acc = 0;
        for (std::size_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
        c[i * n + j] += acc;
      }
    }
  } else if (trans_a && !trans_b) {
    for (std::size_t p = 0; p < k; ++p) {
      const auto* brow = b + p * n;
      for (std::size_t i = 0; i < m; ++i) {
        const auto av = a[p * m + i];
        auto* crow = c + i * n;
        for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
      }
    }
  } else {
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        Scalar acc = 0;
        for (std::size_t p = 0; p < k; ++p) acc += a[p * m + i] * b[j * k + p];
        c[i * n + j] += acc;
      }
    }
  }
}

/// Numerically stable softmax over `len` elements spaced `stride` apart.
inline void softmax_strided(const Scalar* in, Scalar* out, std::size_t len, std::size_t stride) {
  Scalar mx = in[0];
  for (std::size_t t = 1; t < len; ++t) mx = std::max(mx, in[t * stride]);
  Scalar z = 0;
  for (std::size_t t = 0; t < len; ++t) {
    out[t * stride] = std::exp(in[t * stride] - mx);
    z += out[t * stride];
  }
  for (std::size_t t = 0; t < len; ++t) out[t * stride] /= z;
}

}  // namespace geoquery::numerics::kernels
