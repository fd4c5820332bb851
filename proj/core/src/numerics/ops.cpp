#include "geoquery/numerics/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "kernels.hpp"
#include "node.hpp"

namespace geoquery::numerics {

using detail::make_result;
using detail::Node;

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + to_string(a.shape()) + " vs " +
                     to_string(b.shape()));
  }
}

void require_rank2(const Tensor& a, const char* op) {
  if (a.rank() != 2) {
    throw ShapeError(std::string(op) + ": expected a 2-D tensor, got " + to_string(a.shape()));
  }
}

// Grad buffer of input `i` when it participates in the backward sweep.
std::vector<Scalar>* input_grad(Node& self, std::size_t i) {
  auto& in = *self.inputs[i];
  return in.requires_grad ? &in.ensure_grad() : nullptr;
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  std::vector<Scalar> out(a.numel());
  const auto x = a.data();
  const auto y = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] + y[i];
  return make_result(a.shape(), std::move(out), {a, b}, [](Node& self) {
    for (std::size_t k = 0; k < 2; ++k) {
      if (auto* g = input_grad(self, k)) {
        for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i];
      }
    }
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  std::vector<Scalar> out(a.numel());
  const auto x = a.data();
  const auto y = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] - y[i];
  return make_result(a.shape(), std::move(out), {a, b}, [](Node& self) {
    if (auto* g = input_grad(self, 0)) {
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i];
    }
    if (auto* g = input_grad(self, 1)) {
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] -= self.grad[i];
    }
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  std::vector<Scalar> out(a.numel());
  const auto x = a.data();
  const auto y = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] * y[i];
  return make_result(a.shape(), std::move(out), {a, b}, [](Node& self) {
    const auto& x = self.inputs[0]->value;
    const auto& y = self.inputs[1]->value;
    if (auto* g = input_grad(self, 0)) {
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i] * y[i];
    }
    if (auto* g = input_grad(self, 1)) {
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i] * x[i];
    }
  });
}

Tensor scale(const Tensor& a, Scalar factor) {
  std::vector<Scalar> out(a.data().begin(), a.data().end());
  for (auto& v : out) v *= factor;
  return make_result(a.shape(), std::move(out), {a}, [factor](Node& self) {
    if (auto* g = input_grad(self, 0)) {
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += factor * self.grad[i];
    }
  });
}

Tensor add_bias(const Tensor& x, const Tensor& bias) {
  require_rank2(x, "add_bias");
  const auto rows = x.dim(0);
  const auto cols = x.dim(1);
  if (bias.numel() != cols) {
    throw ShapeError("add_bias: bias " + to_string(bias.shape()) + " does not match " +
                     to_string(x.shape()));
  }
  std::vector<Scalar> out(x.data().begin(), x.data().end());
  const auto b = bias.data();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] += b[c];
  }
  return make_result(x.shape(), std::move(out), {x, bias}, [rows, cols](Node& self) {
    if (auto* g = input_grad(self, 0)) {
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i];
    }
    if (auto* g = input_grad(self, 1)) {
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) (*g)[c] += self.grad[r * cols + c];
      }
    }
  });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    throw ShapeError("matmul: incompatible shapes " + to_string(a.shape()) + " and " +
                     to_string(b.shape()));
  }
  const auto m = a.dim(0);
  const auto k = a.dim(1);
  const auto n = b.dim(1);
  std::vector<Scalar> out(m * n, Scalar{0});
  kernels::gemm(false, false, m, n, k, a.data().data(), b.data().data(), out.data());
  return make_result({m, n}, std::move(out), {a, b}, [m, k, n](Node& self) {
    const auto* av = self.inputs[0]->value.data();
    const auto* bv = self.inputs[1]->value.data();
    // dA = dC · Bᵀ, dB = Aᵀ · dC
    if (auto* g = input_grad(self, 0)) {
      kernels::gemm(false, true, m, k, n, self.grad.data(), bv, g->data());
    }
    if (auto* g = input_grad(self, 1)) {
      kernels::gemm(true, false, k, n, m, av, self.grad.data(), g->data());
    }
  });
}

Tensor transpose(const Tensor& a) {
  require_rank2(a, "transpose");
  const auto m = a.dim(0);
  const auto n = a.dim(1);
  std::vector<Scalar> out(m * n);
  const auto x = a.data();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) out[j * m + i] = x[i * n + j];
  }
  return make_result({n, m}, std::move(out), {a}, [m, n](Node& self) {
    if (auto* g = input_grad(self, 0)) {
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) (*g)[i * n + j] += self.grad[j * m + i];
      }
    }
  });
}

Tensor softmax(const Tensor& x, std::size_t axis) {
  if (axis >= x.rank()) {
    throw ShapeError("softmax: axis " + std::to_string(axis) + " invalid for shape " +
                     to_string(x.shape()));
  }
  std::size_t outer = 1;
  std::size_t inner = 1;
  for (std::size_t d = 0; d < axis; ++d) outer *= x.dim(d);
  for (std::size_t d = axis + 1; d < x.rank(); ++d) inner *= x.dim(d);
  const auto len = x.dim(axis);

  std::vector<Scalar> out(x.numel());
  const auto in = x.data();
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t i = 0; i < inner; ++i) {
      const auto base = o * len * inner + i;
      kernels::softmax_strided(in.data() + base, out.data() + base, len, inner);
    }
  }
  return make_result(x.shape(), std::move(out), {x}, [outer, inner, len](Node& self) {
    auto* g = input_grad(self, 0);
    if (!g) return;
    const auto& y = self.value;
    for (std::size_t o = 0; o < outer; ++o) {
      for (std::size_t i = 0; i < inner; ++i) {
        const auto base = o * len * inner + i;
        Scalar dot = 0;
        for (std::size_t t = 0; t < len; ++t) {
          const auto idx = base + t * inner;
          dot += self.grad[idx] * y[idx];
        }
        for (std::size_t t = 0; t < len; ++t) {
          const auto idx = base + t * inner;
          (*g)[idx] += y[idx] * (self.grad[idx] - dot);
        }
      }
    }
  });
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, Scalar eps) {
  if (x.rank() == 0) throw ShapeError("layer_norm: rank-0 input");
  const auto width = x.shape().back();
  if (gamma.numel() != width || beta.numel() != width) {
    throw ShapeError("layer_norm: gamma " + to_string(gamma.shape()) + " / beta " +
                     to_string(beta.shape()) + " do not match last dimension of " +
                     to_string(x.shape()));
  }
  if (!(eps > 0)) throw std::invalid_argument("layer_norm: eps must be positive");
  const auto rows = x.numel() / width;
  std::vector<Scalar> normalized(x.numel());
  std::vector<Scalar> inv_std(rows);
  std::vector<Scalar> out(x.numel());
  const auto in = x.data();
  const auto gm = gamma.data();
  const auto bt = beta.data();
  for (std::size_t r = 0; r < rows; ++r) {
    const auto* row = in.data() + r * width;
    Scalar mu = 0;
    for (std::size_t c = 0; c < width; ++c) mu += row[c];
    mu /= static_cast<Scalar>(width);
    Scalar var = 0;
    for (std::size_t c = 0; c < width; ++c) var += (row[c] - mu) * (row[c] - mu);
    var /= static_cast<Scalar>(width);
    inv_std[r] = Scalar{1} / std::sqrt(var + eps);
    for (std::size_t c = 0; c < width; ++c) {
      const auto xh = (row[c] - mu) * inv_std[r];
      normalized[r * width + c] = xh;
      out[r * width + c] = gm[c] * xh + bt[c];
    }
  }
  return make_result(
      x.shape(), std::move(out), {x, gamma, beta},
      [rows, width, normalized = std::move(normalized), inv_std = std::move(inv_std)](Node& self) {
        const auto& gm = self.inputs[1]->value;
        if (auto* g = input_grad(self, 1)) {
          for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < width; ++c) {
              (*g)[c] += self.grad[r * width + c] * normalized[r * width + c];
            }
          }
        }
        if (auto* g = input_grad(self, 2)) {
          for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < width; ++c) (*g)[c] += self.grad[r * width + c];
          }
        }
        if (auto* g = input_grad(self, 0)) {
          const auto n = static_cast<Scalar>(width);
          for (std::size_t r = 0; r < rows; ++r) {
            Scalar mean_dxh = 0;
            Scalar mean_dxh_xh = 0;
            for (std::size_t c = 0; c < width; ++c) {
              const auto dxh = self.grad[r * width + c] * gm[c];
              mean_dxh += dxh;
              mean_dxh_xh += dxh * normalized[r * width + c];
            }
            mean_dxh /= n;
            mean_dxh_xh /= n;
            for (std::size_t c = 0; c < width; ++c) {
              const auto dxh = self.grad[r * width + c] * gm[c];
              (*g)[r * width + c] +=
                  inv_std[r] * (dxh - mean_dxh - normalized[r * width + c] * mean_dxh_xh);
            }
          }
        }
      });
}

Tensor gelu(const Tensor& x) {
  constexpr Scalar kInvSqrt2 = Scalar{1} / std::numbers::sqrt2_v<Scalar>;
  std::vector<Scalar> out(x.numel());
  const auto in = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = Scalar{0.5} * in[i] * (Scalar{1} + std::erf(in[i] * kInvSqrt2));
  }
  return make_result(x.shape(), std::move(out), {x}, [](Node& self) {
    auto* g = input_grad(self, 0);
    if (!g) return;
    const Scalar inv_sqrt_2pi = std::numbers::inv_sqrtpi_v<Scalar> * kInvSqrt2;
    const auto& in = self.inputs[0]->value;
    for (std::size_t i = 0; i < g->size(); ++i) {
      const auto v = in[i];
      const auto cdf = Scalar{0.5} * (Scalar{1} + std::erf(v * kInvSqrt2));
      const auto pdf = inv_sqrt_2pi * std::exp(Scalar{-0.5} * v * v);
      (*g)[i] += self.grad[i] * (cdf + v * pdf);
    }
  });
}

Tensor sum(const Tensor& x) {
  Scalar total = 0;
  for (auto v : x.data()) total += v;
  return make_result({1}, {total}, {x}, [](Node& self) {
    if (auto* g = input_grad(self, 0)) {
      for (auto& v : *g) v += self.grad[0];
    }
  });
}

Tensor mean(const Tensor& x) { return scale(sum(x), Scalar{1} / static_cast<Scalar>(x.numel())); }

Tensor sum_rows(const Tensor& x) {
  require_rank2(x, "sum_rows");
  const auto rows = x.dim(0);
  const auto cols = x.dim(1);
  std::vector<Scalar> out(cols, Scalar{0});
  const auto in = x.data();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) out[c] += in[r * cols + c];
  }
  return make_result({cols}, std::move(out), {x}, [rows, cols](Node& self) {
    if (auto* g = input_grad(self, 0)) {
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) (*g)[r * cols + c] += self.grad[c];
      }
    }
  });
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (numel(shape) != x.numel()) {
    throw ShapeError("reshape: cannot view " + to_string(x.shape()) + " as " + to_string(shape));
  }
  std::vector<Scalar> out(x.data().begin(), x.data().end());
  return make_result(std::move(shape), std::move(out), {x}, [](Node& self) {
    if (auto* g = input_grad(self, 0)) {
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i];
    }
  });
}

Tensor slice_rows(const Tensor& x, std::size_t begin, std::size_t end) {
  require_rank2(x, "slice_rows");
  if (begin >= end || end > x.dim(0)) {
    throw ShapeError("slice_rows: range [" + std::to_string(begin) + ", " + std::to_string(end) +
                     ") invalid for " + to_string(x.shape()));
  }
  const auto cols = x.dim(1);
  const auto in = x.data();
  std::vector<Scalar> out(in.begin() + begin * cols, in.begin() + end * cols);
  return make_result({end - begin, cols}, std::move(out), {x}, [begin, cols](Node& self) {
    if (auto* g = input_grad(self, 0)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) (*g)[begin * cols + i] += self.grad[i];
    }
  });
}

Tensor slice_cols(const Tensor& x, std::size_t begin, std::size_t end) {
  require_rank2(x, "slice_cols");
  if (begin >= end || end > x.dim(1)) {
    throw ShapeError("slice_cols: range [" + std::to_string(begin) + ", " + std::to_string(end) +
                     ") invalid for " + to_string(x.shape()));
  }
  const auto rows = x.dim(0);
  const auto cols = x.dim(1);
  const auto width = end - begin;
  std::vector<Scalar> out(rows * width);
  const auto in = x.data();
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy_n(in.begin() + r * cols + begin, width, out.begin() + r * width);
  }
  return make_result({rows, width}, std::move(out), {x}, [rows, cols, begin, width](Node& self) {
    if (auto* g = input_grad(self, 0)) {
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < width; ++c) {
          (*g)[r * cols + begin + c] += self.grad[r * width + c];
        }
      }
    }
  });
}

Tensor concat_rows(std::span<const Tensor> parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no inputs");
  const auto cols = parts[0].dim(1);
  std::size_t rows = 0;
  for (const auto& p : parts) {
    require_rank2(p, "concat_rows");
    if (p.dim(1) != cols) {
      throw ShapeError("concat_rows: column mismatch " + to_string(parts[0].shape()) + " vs " +
                       to_string(p.shape()));
    }
    rows += p.dim(0);
  }
  std::vector<Scalar> out;
  out.reserve(rows * cols);
  for (const auto& p : parts) out.insert(out.end(), p.data().begin(), p.data().end());
  return make_result({rows, cols}, std::move(out), std::vector<Tensor>(parts.begin(), parts.end()),
                     [](Node& self) {
                       std::size_t offset = 0;
                       for (std::size_t k = 0; k < self.inputs.size(); ++k) {
                         const auto n = self.inputs[k]->value.size();
                         if (auto* g = input_grad(self, k)) {
                           for (std::size_t i = 0; i < n; ++i) (*g)[i] += self.grad[offset + i];
                         }
                         offset += n;
                       }
                     });
}

Tensor concat_cols(std::span<const Tensor> parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  const auto rows = parts[0].dim(0);
  std::size_t cols = 0;
  for (const auto& p : parts) {
    require_rank2(p, "concat_cols");
    if (p.dim(0) != rows) {
      throw ShapeError("concat_cols: row mismatch " + to_string(parts[0].shape()) + " vs " +
                       to_string(p.shape()));
    }
    cols += p.dim(1);
  }
  std::vector<Scalar> out(rows * cols);
  std::size_t offset = 0;
  for (const auto& p : parts) {
    const auto w = p.dim(1);
    const auto in = p.data();
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy_n(in.begin() + r * w, w, out.begin() + r * cols + offset);
    }
    offset += w;
  }
  return make_result({rows, cols}, std::move(out), std::vector<Tensor>(parts.begin(), parts.end()),
                     [rows, cols](Node& self) {
                       std::size_t offset = 0;
                       for (std::size_t k = 0; k < self.inputs.size(); ++k) {
                         const auto w = self.inputs[k]->shape[1];
                         if (auto* g = input_grad(self, k)) {
                           for (std::size_t r = 0; r < rows; ++r) {
                             for (std::size_t c = 0; c < w; ++c) {
                               (*g)[r * w + c] += self.grad[r * cols + offset + c];
                             }
                           }
                         }
                         offset += w;
                       }
                     });
}

Tensor cross_entropy(const Tensor& logits, std::span<const std::size_t> targets) {
  if (logits.rank() != 1 && logits.rank() != 2) {
    throw ShapeError("cross_entropy: logits must be 1-D or 2-D, got " + to_string(logits.shape()));
  }
  const auto batch = logits.rank() == 1 ? std::size_t{1} : logits.dim(0);
  const auto classes = logits.shape().back();
  if (targets.size() != batch) {
    throw ShapeError("cross_entropy: " + std::to_string(targets.size()) + " targets for batch of " +
                     std::to_string(batch));
  }
  for (auto t : targets) {
    if (t >= classes) {
      throw std::out_of_range("cross_entropy: target " + std::to_string(t) +
                              " outside [0, " + std::to_string(classes) + ")");
    }
  }
  std::vector<Scalar> probs(logits.numel());
  const auto in = logits.data();
  Scalar total = 0;
  for (std::size_t b = 0; b < batch; ++b) {
    const auto* row = in.data() + b * classes;
    auto* p = probs.data() + b * classes;
    kernels::softmax_strided(row, p, classes, 1);
    const auto mx = *std::max_element(row, row + classes);
    Scalar z = 0;
    for (std::size_t c = 0; c < classes; ++c) z += std::exp(row[c] - mx);
    total += (mx + std::log(z)) - row[targets[b]];
  }
  total /= static_cast<Scalar>(batch);
  std::vector<std::size_t> tgt(targets.begin(), targets.end());
  return make_result({1}, {total}, {logits},
                     [batch, classes, probs = std::move(probs), tgt = std::move(tgt)](Node& self) {
                       auto* g = input_grad(self, 0);
                       if (!g) return;
                       const auto coef = self.grad[0] / static_cast<Scalar>(batch);
                       for (std::size_t b = 0; b < batch; ++b) {
                         for (std::size_t c = 0; c < classes; ++c) {
                           const auto onehot = c == tgt[b] ? Scalar{1} : Scalar{0};
                           (*g)[b * classes + c] += coef * (probs[b * classes + c] - onehot);
                         }
                       }
                     });
}

Tensor attention_core(const Tensor& q, const Tensor& k, const Tensor& v, Tensor* probabilities) {
  require_rank2(q, "attention_core");
  require_rank2(k, "attention_core");
  require_rank2(v, "attention_core");
  if (q.dim(1) != k.dim(1) || k.dim(0) != v.dim(0)) {
    throw ShapeError("attention_core: incompatible q " + to_string(q.shape()) + ", k " +
                     to_string(k.shape()) + ", v " + to_string(v.shape()));
  }
  const auto tq = q.dim(0);
  const auto tk = k.dim(0);
  const auto dk = q.dim(1);
  const auto dv = v.dim(1);
  const Scalar inv_sqrt_dk = Scalar{1} / std::sqrt(static_cast<Scalar>(dk));

  std::vector<Scalar> scores(tq * tk, Scalar{0});
  kernels::gemm(false, true, tq, tk, dk, q.data().data(), k.data().data(), scores.data());
  std::vector<Scalar> probs(tq * tk);
  for (auto& s : scores) s *= inv_sqrt_dk;
  for (std::size_t r = 0; r < tq; ++r) {
    kernels::softmax_strided(scores.data() + r * tk, probs.data() + r * tk, tk, 1);
  }
  std::vector<Scalar> out(tq * dv, Scalar{0});
  kernels::gemm(false, false, tq, dv, tk, probs.data(), v.data().data(), out.data());
  if (probabilities) *probabilities = Tensor::from({tq, tk}, probs);

  return make_result(
      {tq, dv}, std::move(out), {q, k, v},
      [tq, tk, dk, dv, inv_sqrt_dk, probs = std::move(probs)](Node& self) {
        const auto* qv = self.inputs[0]->value.data();
        const auto* kv = self.inputs[1]->value.data();
        const auto* vv = self.inputs[2]->value.data();
        const auto* dout = self.grad.data();
        if (auto* g = input_grad(self, 2)) {
          kernels::gemm(true, false, tk, dv, tq, probs.data(), dout, g->data());
        }
        auto* gq = input_grad(self, 0);
        auto* gk = input_grad(self, 1);
        if (!gq && !gk) return;
        std::vector<Scalar> dscores(tq * tk, Scalar{0});
        kernels::gemm(false, true, tq, tk, dv, dout, vv, dscores.data());
        for (std::size_t r = 0; r < tq; ++r) {
          Scalar dot = 0;
          for (std::size_t c = 0; c < tk; ++c) dot += dscores[r * tk + c] * probs[r * tk + c];
          for (std::size_t c = 0; c < tk; ++c) {
            dscores[r * tk + c] = probs[r * tk + c] * (dscores[r * tk + c] - dot) * inv_sqrt_dk;
          }
        }
        if (gq) kernels::gemm(false, false, tq, dk, tk, dscores.data(), kv, gq->data());
        if (gk) kernels::gemm(true, false, tk, dk, tq, dscores.data(), qv, gk->data());
      });
}

}  // namespace geoquery::numerics
