#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "geoquery/numerics/layers.hpp"
#include "geoquery/numerics/ops.hpp"
#include "random_tensors.hpp"

namespace {

namespace nx = geoquery::numerics;
using geoquery::numerics::Scalar;
using geoquery::numerics::Tensor;
using geoquery::testing::random_normal;

Tensor permute_rows(const Tensor& x, const std::vector<std::size_t>& perm) {
  const auto cols = x.dim(1);
  std::vector<Scalar> out(x.numel());
  for (std::size_t r = 0; r < perm.size(); ++r) {
    for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] = x.at(perm[r], c);
  }
  return Tensor::from(x.shape(), out);
}

void set_identity(nx::Linear& l) {
  auto w = l.weight.mutable_data();
  const auto n = l.in_features();
  std::fill(w.begin(), w.end(), Scalar{0});
  for (std::size_t i = 0; i < n; ++i) w[i * n + i] = 1;
  auto b = l.bias.mutable_data();
  std::fill(b.begin(), b.end(), Scalar{0});
}

TEST(SelfAttention, SingleTokenIsOutputOfValueProjection) {
  nx::ParameterStore store(9);
  auto w = nx::AttentionWeights::create(store, "attn", 6, 3);
  std::mt19937_64 rng(1);
  auto x = random_normal({1, 6}, rng, false);
  auto result = nx::multi_head_self_attention(x, w);
  auto expected = w.output(w.value(x));
  for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(result.output.at(i), expected.at(i), 1e-14);
  for (const auto& head : result.weights) EXPECT_EQ(head.item(), 1.0);
}

TEST(SelfAttention, PermutationEquivariant) {
  nx::ParameterStore store(10);
  auto w = nx::AttentionWeights::create(store, "attn", 8, 2);
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    auto x = random_normal({5, 8}, rng, false);
    std::vector<std::size_t> perm(5);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    auto base = nx::multi_head_self_attention(x, w).output;
    auto permuted = nx::multi_head_self_attention(permute_rows(x, perm), w).output;
    for (std::size_t r = 0; r < 5; ++r) {
      for (std::size_t c = 0; c < 8; ++c) {
        EXPECT_NEAR(permuted.at(r, c), base.at(perm[r], c), 1e-12);
      }
    }
  }
}

TEST(SelfAttention, WeightRowsSumToOne) {
  nx::ParameterStore store(11);
  auto w = nx::AttentionWeights::create(store, "attn", 8, 4);
  std::mt19937_64 rng(3);
  auto result = nx::multi_head_self_attention(random_normal({7, 8}, rng, false), w);
  ASSERT_EQ(result.weights.size(), 4u);
  for (const auto& head : result.weights) {
    for (std::size_t r = 0; r < 7; ++r) {
      double total = 0;
      for (std::size_t c = 0; c < 7; ++c) total += head.at(r, c);
      EXPECT_NEAR(total, 1.0, 1e-9);
    }
  }
}

TEST(SelfAttention, IndivisibleHeadsRejected) {
  nx::ParameterStore store;
  EXPECT_THROW(nx::AttentionWeights::create(store, "attn", 6, 4), nx::ShapeError);
}

TEST(CrossAttention, SingleMemoryTokenGetsFullWeight) {
  nx::ParameterStore store(12);
  auto w = nx::AttentionWeights::create(store, "ca", 4, 2);
  std::mt19937_64 rng(4);
  auto result = nx::cross_attention(random_normal({3, 4}, rng, false),
                                    random_normal({1, 4}, rng, false), w);
  for (const auto& head : result.weights) {
    for (std::size_t r = 0; r < 3; ++r) EXPECT_EQ(head.at(r, 0), 1.0);
  }
}

TEST(CrossAttention, InvariantToMemoryOrder) {
  nx::ParameterStore store(13);
  auto w = nx::AttentionWeights::create(store, "ca", 8, 2);
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    auto q = random_normal({4, 8}, rng, false);
    auto m = random_normal({6, 8}, rng, false);
    std::vector<std::size_t> perm(6);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    auto a = nx::cross_attention(q, m, w).output;
    auto b = nx::cross_attention(q, permute_rows(m, perm), w).output;
    for (std::size_t i = 0; i < a.numel(); ++i) EXPECT_NEAR(a.at(i), b.at(i), 1e-12);
  }
}

TEST(CrossAttention, IdentityProjectionsMatchDirectEvaluation) {
  nx::ParameterStore store;
  auto w = nx::AttentionWeights::create(store, "ca", 2, 1);
  set_identity(w.query);
  set_identity(w.key);
  set_identity(w.value);
  set_identity(w.output);
  auto q = Tensor::from({1, 2}, {1, 0});
  auto kv = Tensor::from({2, 2}, {1, 0, 0, 1});
  // softmax([1/√2, 0]) at 40 digits.
  const double w0 = 0.6697615493266569256167949;
  const double w1 = 0.3302384506733430743832051;
  auto out = nx::cross_attention(q, kv, w).output;
  EXPECT_NEAR(out.at(0, 0), w0, 1e-15);
  EXPECT_NEAR(out.at(0, 1), w1, 1e-15);

  w.values_equal_keys = true;
  auto strict = nx::cross_attention(q, kv, w).output;
  EXPECT_NEAR(strict.at(0, 0), w0, 1e-15);
  EXPECT_NEAR(strict.at(0, 1), w1, 1e-15);
}

TEST(CrossAttention, WidthMismatch) {
  nx::ParameterStore store;
  auto w = nx::AttentionWeights::create(store, "ca", 4, 1);
  EXPECT_THROW(nx::cross_attention(Tensor::zeros({2, 4}), Tensor::zeros({2, 3}), w),
               nx::ShapeError);
}

}  // namespace
