#include <gtest/gtest.h>

#include <random>

#include "geoquery/numerics/layers.hpp"
#include "geoquery/numerics/ops.hpp"
#include "gradcheck.hpp"
#include "random_tensors.hpp"

namespace {

namespace nx = geoquery::numerics;
using geoquery::numerics::Tensor;
using geoquery::testing::check_gradients;
using geoquery::testing::random_normal;

constexpr double kTolerance = 1e-4;

// Projects an op output to a scalar with fixed random weights so every
// output coordinate contributes a distinct gradient.
Tensor weighted_sum(const Tensor& y, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return nx::sum(nx::mul(y, random_normal(y.shape(), rng, false)));
}

void expect_gradients_match(std::vector<Tensor> leaves, const std::function<Tensor()>& fn) {
  const auto r = check_gradients(std::move(leaves), fn);
  EXPECT_LT(r.max_relative_error, kTolerance) << r.worst;
}

class OpGradients : public ::testing::TestWithParam<std::uint64_t> {
 protected:
  std::mt19937_64 rng{GetParam()};
};

TEST_P(OpGradients, Elementwise) {
  auto a = random_normal({3, 4}, rng);
  auto b = random_normal({3, 4}, rng);
  expect_gradients_match(std::vector{a, b}, [&] { return weighted_sum(nx::add(a, b), 1); });
  expect_gradients_match(std::vector{a, b}, [&] { return weighted_sum(nx::sub(a, b), 2); });
  expect_gradients_match(std::vector{a, b}, [&] { return weighted_sum(nx::mul(a, b), 3); });
  expect_gradients_match(std::vector{a}, [&] { return weighted_sum(nx::scale(a, -1.7), 4); });
  expect_gradients_match(std::vector{a}, [&] { return weighted_sum(nx::gelu(a), 5); });
}

TEST_P(OpGradients, MatmulAndBias) {
  auto a = random_normal({5, 4}, rng);
  auto b = random_normal({4, 3}, rng);
  auto bias = random_normal({3}, rng);
  expect_gradients_match(std::vector{a, b, bias},
                         [&] { return weighted_sum(nx::add_bias(nx::matmul(a, b), bias), 6); });
  expect_gradients_match(std::vector{a}, [&] { return weighted_sum(nx::transpose(a), 7); });
}

TEST_P(OpGradients, SoftmaxEveryAxis) {
  auto x = random_normal({2, 3, 4}, rng);
  for (std::size_t axis = 0; axis < 3; ++axis) {
    expect_gradients_match(std::vector{x}, [&] { return weighted_sum(nx::softmax(x, axis), 8 + axis); });
  }
}

TEST_P(OpGradients, LayerNorm) {
  auto x = random_normal({4, 6}, rng);
  auto g = random_normal({6}, rng);
  auto b = random_normal({6}, rng);
  expect_gradients_match(std::vector{x, g, b},
                         [&] { return weighted_sum(nx::layer_norm(x, g, b), 11); });
}

TEST_P(OpGradients, Reductions) {
  auto x = random_normal({3, 5}, rng);
  expect_gradients_match(std::vector{x}, [&] { return nx::mean(nx::mul(x, x)); });
  expect_gradients_match(std::vector{x}, [&] { return weighted_sum(nx::sum_rows(x), 12); });
  expect_gradients_match(std::vector{x}, [&] { return weighted_sum(nx::reshape(x, {5, 3}), 13); });
}

TEST_P(OpGradients, SlicesAndConcats) {
  auto x = random_normal({4, 6}, rng);
  auto y = random_normal({2, 6}, rng);
  expect_gradients_match(std::vector{x}, [&] { return weighted_sum(nx::slice_rows(x, 1, 3), 14); });
  expect_gradients_match(std::vector{x}, [&] { return weighted_sum(nx::slice_cols(x, 2, 5), 15); });
  expect_gradients_match(std::vector{x, y}, [&] {
    std::vector<Tensor> parts{x, y, x};
    return weighted_sum(nx::concat_rows(parts), 16);
  });
  expect_gradients_match(std::vector{x}, [&] {
    std::vector<Tensor> parts{nx::slice_cols(x, 0, 2), x};
    return weighted_sum(nx::concat_cols(parts), 17);
  });
}

TEST_P(OpGradients, CrossEntropy) {
  auto logits = random_normal({3, 5}, rng);
  std::vector<std::size_t> targets{1, 4, 0};
  expect_gradients_match(std::vector{logits}, [&] { return nx::cross_entropy(logits, targets); });
}

TEST_P(OpGradients, AttentionCore) {
  auto q = random_normal({3, 4}, rng);
  auto k = random_normal({5, 4}, rng);
  auto v = random_normal({5, 2}, rng);
  expect_gradients_match(std::vector{q, k, v},
                         [&] { return weighted_sum(nx::attention_core(q, k, v), 18); });
  // Shared key/value node.
  expect_gradients_match(std::vector{q, k},
                         [&] { return weighted_sum(nx::attention_core(q, k, k), 19); });
}

TEST_P(OpGradients, MultiHeadAttentionLayers) {
  nx::ParameterStore store(GetParam());
  auto self_w = nx::AttentionWeights::create(store, "self", 8, 2);
  auto cross_w = nx::AttentionWeights::create(store, "cross", 8, 2);
  auto x = random_normal({4, 8}, rng);
  auto memory = random_normal({3, 8}, rng);
  std::vector<Tensor> leaves{x, memory};
  for (auto& p : store.parameters()) leaves.push_back(p.value);
  expect_gradients_match(leaves, [&] {
    auto h = nx::multi_head_self_attention(x, self_w).output;
    return weighted_sum(nx::cross_attention(h, memory, cross_w).output, 20);
  });
}

INSTANTIATE_TEST_SUITE_P(Seeds, OpGradients, ::testing::Values(1u, 2u, 3u));

}  // namespace
