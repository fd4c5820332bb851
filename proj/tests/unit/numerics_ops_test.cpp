#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "geoquery/numerics/ops.hpp"
#include "random_tensors.hpp"

namespace {

using geoquery::numerics::Scalar;
using geoquery::numerics::ShapeError;
using geoquery::numerics::Tensor;
using geoquery::testing::random_normal;
namespace nx = geoquery::numerics;

TEST(Tensor, RejectsMismatchedValueCount) {
  EXPECT_THROW(Tensor::from({2, 2}, {1, 2, 3}), ShapeError);
  EXPECT_THROW(Tensor::zeros({0, 3}), ShapeError);
}

TEST(Matmul, IdentityLeavesMatrixUnchanged) {
  std::mt19937_64 rng(1);
  auto a = random_normal({3, 3}, rng, false);
  auto eye = Tensor::from({3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  auto out = nx::matmul(eye, a);
  for (std::size_t i = 0; i < 9; ++i) EXPECT_EQ(out.at(i), a.at(i));
}

TEST(Matmul, ScalarProduct) {
  EXPECT_EQ(nx::matmul(Tensor::from({1, 1}, {2}), Tensor::from({1, 1}, {3})).item(), 6);
}

TEST(Matmul, MatchesTripleLoopOracle) {
  std::mt19937_64 rng(7);
  auto a = random_normal({5, 4}, rng, false);
  auto b = random_normal({4, 3}, rng, false);
  auto c = nx::matmul(a, b);
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      double expected = 0;
      for (std::size_t p = 0; p < 4; ++p) expected += a.at(i, p) * b.at(p, j);
      EXPECT_NEAR(c.at(i, j), expected, 1e-12);
    }
  }
}

TEST(Matmul, ShapeErrorNamesBothShapes) {
  try {
    nx::matmul(Tensor::zeros({2, 3}), Tensor::zeros({4, 2}));
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("[2x3]"), std::string::npos);
    EXPECT_NE(msg.find("[4x2]"), std::string::npos);
  }
}

TEST(Softmax, SymmetricInputIsUniform) {
  auto y = nx::softmax(Tensor::from({2}, {0, 0}), 0);
  EXPECT_EQ(y.at(0), 0.5);
  EXPECT_EQ(y.at(1), 0.5);
}

TEST(Softmax, MatchesHighPrecisionOracle) {
  // exp(k) / (e + e² + e³), evaluated at 40 significant digits.
  auto y = nx::softmax(Tensor::from({3}, {1, 2, 3}), 0);
  EXPECT_NEAR(y.at(0), 0.0900305731703804579980221, 1e-15);
  EXPECT_NEAR(y.at(1), 0.2447284710547976524729596, 1e-15);
  EXPECT_NEAR(y.at(2), 0.6652409557748218895290183, 1e-15);
}

TEST(Softmax, ShiftInvariant) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    auto x = random_normal({4, 6}, rng, false);
    const Scalar c = std::uniform_real_distribution<double>(-20, 20)(rng);
    std::vector<Scalar> shifted(x.data().begin(), x.data().end());
    for (auto& v : shifted) v += c;
    for (std::size_t axis = 0; axis < 2; ++axis) {
      auto a = nx::softmax(x, axis);
      auto b = nx::softmax(Tensor::from({4, 6}, shifted), axis);
      for (std::size_t i = 0; i < a.numel(); ++i) EXPECT_NEAR(a.at(i), b.at(i), 1e-12);
    }
  }
}

TEST(Softmax, RowsAreDistributionsOnEveryAxis) {
  std::mt19937_64 rng(4);
  auto x = random_normal({3, 4, 5}, rng, false);
  for (std::size_t axis = 0; axis < 3; ++axis) {
    auto y = nx::softmax(x, axis);
    const auto& s = y.shape();
    std::size_t inner = 1;
    for (std::size_t d = axis + 1; d < 3; ++d) inner *= s[d];
    const auto outer = y.numel() / (inner * s[axis]);
    for (std::size_t o = 0; o < outer; ++o) {
      for (std::size_t i = 0; i < inner; ++i) {
        double total = 0;
        for (std::size_t t = 0; t < s[axis]; ++t) {
          const auto v = y.at(o * s[axis] * inner + t * inner + i);
          EXPECT_GT(v, 0.0);
          total += v;
        }
        EXPECT_NEAR(total, 1.0, 1e-9);
      }
    }
  }
}

TEST(Softmax, InvalidAxis) { EXPECT_THROW(nx::softmax(Tensor::zeros({2, 2}), 2), ShapeError); }

TEST(LayerNorm, ConstantRowMapsToZero) {
  auto x = Tensor::full({2, 4}, 3.5);
  auto y = nx::layer_norm(x, Tensor::full({4}, 1), Tensor::zeros({4}));
  for (auto v : y.data()) EXPECT_EQ(v, 0.0);
}

TEST(LayerNorm, RowsHaveZeroMeanUnitVariance) {
  std::mt19937_64 rng(5);
  auto x = random_normal({6, 16}, rng, false);
  auto y = nx::layer_norm(x, Tensor::full({16}, 1), Tensor::zeros({16}), 1e-12);
  for (std::size_t r = 0; r < 6; ++r) {
    double mu = 0, var = 0;
    for (std::size_t c = 0; c < 16; ++c) mu += y.at(r, c);
    mu /= 16;
    for (std::size_t c = 0; c < 16; ++c) var += (y.at(r, c) - mu) * (y.at(r, c) - mu);
    var /= 16;
    EXPECT_NEAR(mu, 0.0, 1e-9);
    EXPECT_NEAR(var, 1.0, 1e-9);
  }
}

TEST(LayerNorm, DoublingGammaDoublesOutput) {
  std::mt19937_64 rng(6);
  auto x = random_normal({3, 5}, rng, false);
  auto gamma = random_normal({5}, rng, false);
  std::vector<Scalar> doubled(gamma.data().begin(), gamma.data().end());
  for (auto& v : doubled) v *= 2;
  auto a = nx::layer_norm(x, gamma, Tensor::zeros({5}));
  auto b = nx::layer_norm(x, Tensor::from({5}, doubled), Tensor::zeros({5}));
  for (std::size_t i = 0; i < a.numel(); ++i) EXPECT_NEAR(b.at(i), 2 * a.at(i), 1e-14);
}

TEST(LayerNorm, ShapeMismatch) {
  EXPECT_THROW(nx::layer_norm(Tensor::zeros({2, 4}), Tensor::zeros({3}), Tensor::zeros({3})),
               ShapeError);
}

TEST(CrossEntropy, UniformLogitsGiveLogClassCount) {
  std::vector<std::size_t> t{2};
  EXPECT_NEAR(nx::cross_entropy(Tensor::zeros({1, 4}), t).item(), std::log(4.0), 1e-15);
  EXPECT_NEAR(nx::cross_entropy(Tensor::zeros({1, 4}), t).item(), 1.386294, 1e-6);
}

TEST(CrossEntropy, DecreasesAsTargetLogitGrows) {
  std::vector<std::size_t> t{1};
  double previous = INFINITY;
  for (double magnitude : {1.0, 10.0, 100.0}) {
    const auto loss = nx::cross_entropy(Tensor::from({1, 3}, {0, magnitude, 0}), t).item();
    EXPECT_LT(loss, previous);
    EXPECT_GE(loss, 0.0);
    previous = loss;
  }
  EXPECT_LT(previous, 1e-40);
}

TEST(CrossEntropy, MatchesDirectEvaluation) {
  std::mt19937_64 rng(11);
  auto logits = random_normal({3, 5}, rng, false);
  std::vector<std::size_t> targets{4, 0, 2};
  long double expected = 0;
  for (std::size_t b = 0; b < 3; ++b) {
    long double z = 0;
    for (std::size_t c = 0; c < 5; ++c) z += std::exp(static_cast<long double>(logits.at(b, c)));
    expected += -std::log(std::exp(static_cast<long double>(logits.at(b, targets[b]))) / z);
  }
  expected /= 3;
  EXPECT_NEAR(nx::cross_entropy(logits, targets).item(), static_cast<double>(expected), 1e-10);
}

TEST(CrossEntropy, OutOfRangeTarget) {
  std::vector<std::size_t> t{5};
  EXPECT_THROW(nx::cross_entropy(Tensor::zeros({1, 5}), t), std::out_of_range);
}

TEST(Backward, SumGivesOnes) {
  auto p = Tensor::from({2, 3}, {1, -2, 3, 0.5, 7, 1}, true);
  nx::backward(nx::sum(p));
  for (auto g : p.grad()) EXPECT_EQ(g, 1.0);
}

TEST(Backward, SumOfSquaresGivesTwiceValue) {
  auto p = Tensor::from({4}, {1, -2, 3, 0.25}, true);
  nx::backward(nx::sum(nx::mul(p, p)));
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(p.grad()[i], 2 * p.at(i));
}

TEST(Backward, AccumulatesUntilZeroGrad) {
  auto p = Tensor::from({2}, {1, 2}, true);
  auto loss = nx::sum(nx::scale(p, 3));
  nx::backward(loss);
  nx::backward(loss);
  EXPECT_EQ(p.grad()[0], 6.0);
  p.zero_grad();
  for (auto g : p.grad()) EXPECT_EQ(g, 0.0);
}

TEST(Backward, RejectsNonScalarLoss) {
  auto p = Tensor::from({2}, {1, 2}, true);
  EXPECT_THROW(nx::backward(nx::scale(p, 2)), ShapeError);
}

TEST(Backward, NoGradGuardSkipsHistory) {
  auto p = Tensor::from({2}, {1, 2}, true);
  nx::NoGradGuard guard;
  EXPECT_FALSE(nx::sum(p).requires_grad());
}

TEST(AttentionCore, SingleKeyGetsFullWeight) {
  std::mt19937_64 rng(2);
  auto q = random_normal({4, 3}, rng, false);
  auto k = random_normal({1, 3}, rng, false);
  auto v = random_normal({1, 2}, rng, false);
  Tensor probs;
  auto out = nx::attention_core(q, k, v, &probs);
  for (std::size_t r = 0; r < 4; ++r) {
    EXPECT_EQ(probs.at(r, 0), 1.0);
    EXPECT_EQ(out.at(r, 0), v.at(0, 0));
    EXPECT_EQ(out.at(r, 1), v.at(0, 1));
  }
}

}  // namespace
