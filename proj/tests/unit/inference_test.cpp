#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "chain_oracle.hpp"
#include "decoder_fixtures.hpp"
#include "geoquery/common/errors.hpp"
#include "geoquery/inference/geodesy.hpp"
#include "geoquery/inference/image_ops.hpp"
#include "geoquery/inference/predict.hpp"
#include "geoquery/inference/report.hpp"
#include "point_sets.hpp"
#include "random_tensors.hpp"

namespace {

namespace inf = geoquery::inference;
namespace gc = geoquery::geocell;
namespace dc = geoquery::decoder;
namespace nx = geoquery::numerics;
using nx::Tensor;

TEST(SelectScene, ArgmaxOfHierarchyMeanChannelZero) {
  // Channel-0 values per (h, s): [[1, 2], [3, 0]] -> means [2, 1].
  std::vector<nx::Scalar> q(4 * 3, 0.0);
  q[0 * 3] = 1;
  q[1 * 3] = 2;
  q[2 * 3] = 3;
  q[3 * 3] = 0;
  const auto logits = dc::scene_logits(Tensor::from({4, 3}, q), 2);
  EXPECT_EQ(inf::select_scene(logits.data()), 0u);
  for (auto& v : q) v += 7.5;
  EXPECT_EQ(inf::select_scene(dc::scene_logits(Tensor::from({4, 3}, q), 2).data()), 0u);
  const std::vector<nx::Scalar> single{-3.0};
  EXPECT_EQ(inf::select_scene(single), 0u);
  const std::vector<nx::Scalar> tie{1.0, 4.0, 4.0};
  EXPECT_EQ(inf::select_scene(tie), 1u);
}

TEST(Compose, HandProduct) {
  const std::vector<std::vector<double>> probs{{0.6, 0.4}, {0.5, 0.3, 0.2}};
  const std::vector<std::vector<std::size_t>> parents{{0, 0, 1}};
  const auto s = inf::compose(probs, parents);
  ASSERT_EQ(s.size(), 3u);
  EXPECT_NEAR(s[0], 0.30, 1e-15);
  EXPECT_NEAR(s[1], 0.18, 1e-15);
  EXPECT_NEAR(s[2], 0.08, 1e-15);
  EXPECT_EQ(inf::argmax(s), 0u);
}

TEST(Compose, SingleHierarchyIsIdentityAndUniformStaysUniform) {
  const std::vector<std::vector<double>> one{{0.1, 0.7, 0.2}};
  const std::vector<std::vector<std::size_t>> no_maps;
  EXPECT_EQ(inf::compose(one, no_maps), one[0]);
  const std::vector<std::vector<double>> uniform{{0.5, 0.5}, {0.25, 0.25, 0.25, 0.25}};
  const std::vector<std::vector<std::size_t>> maps{{0, 0, 1, 1}};
  const auto s = inf::compose(uniform, maps);
  for (double v : s) EXPECT_EQ(v, s[0]);
}

TEST(Compose, ErrorsOnBrokenMaps) {
  const std::vector<std::vector<double>> probs{{0.6, 0.4}, {0.5, 0.3, 0.2}};
  using Maps = std::vector<std::vector<std::size_t>>;
  EXPECT_THROW(inf::compose(probs, Maps{{0, 0, 2}}), std::out_of_range);
  EXPECT_THROW(inf::compose(probs, Maps{{0, 0}}), std::invalid_argument);
  EXPECT_THROW(inf::compose(probs, Maps{}), std::invalid_argument);
}

TEST(Compose, ScaleEquivariantPerHierarchy) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto stack = geoquery::testing::random_small_stack(rng, 60, 4);
    auto probs = geoquery::testing::random_probabilities(stack, rng);
    const auto base = inf::compose(probs, stack);
    const auto k = static_cast<std::size_t>(trial) % probs.size();
    for (auto& v : probs[k]) v *= 4.0;  // power of two: exact
    const auto scaled = inf::compose(probs, stack);
    for (std::size_t a = 0; a < base.size(); ++a) EXPECT_EQ(scaled[a], 4.0 * base[a]);
    EXPECT_EQ(inf::argmax(scaled), inf::argmax(base));
  }
}

TEST(Compose, MatchesChainEnumeration) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 300; ++trial) {
    const auto stack = geoquery::testing::random_small_stack(rng);
    const auto probs = geoquery::testing::random_probabilities(stack, rng);
    ASSERT_EQ(inf::argmax(inf::compose(probs, stack)),
              geoquery::testing::brute_force_chain_argmax(stack, probs))
        << "trial " << trial;
  }
}

TEST(Haversine, QuarterCircumferenceAndMetricProperties) {
  const gc::GeoPoint origin(0, 0);
  EXPECT_NEAR(inf::haversine_km(origin, {0, 90}), 10007.543398010286, 1e-6);
  EXPECT_NEAR(inf::haversine_km(origin, {0, 90}), std::numbers::pi * inf::kEarthRadiusKm / 2, 1e-9);
  EXPECT_EQ(inf::haversine_km({12.5, -40.25}, {12.5, -40.25}), 0.0);
  EXPECT_NEAR(inf::haversine_km({90, 0}, {-90, 0}), std::numbers::pi * inf::kEarthRadiusKm, 1e-9);
  std::mt19937_64 rng(5);
  for (int i = 0; i < 2000; ++i) {
    const auto a = geoquery::testing::random_sphere_point(rng);
    const auto b = geoquery::testing::random_sphere_point(rng);
    const double d = inf::haversine_km(a, b);
    EXPECT_EQ(d, inf::haversine_km(b, a));
    EXPECT_LE(d, std::numbers::pi * inf::kEarthRadiusKm);
    EXPECT_GE(d, 0.0);
  }
}

TEST(Evaluate, ThresholdBracketsAndRecount) {
  const std::vector<gc::GeoPoint> truth{{10, 10}, {-5, 100}};
  auto r = inf::evaluate(truth, truth);
  for (double a : r.accuracy) EXPECT_EQ(a, 1.0);

  // About 100 km north along a meridian.
  const double dlat = 100.0 / inf::kEarthRadiusKm * 180.0 / std::numbers::pi;
  const std::vector<gc::GeoPoint> off{{10 + dlat, 10}};
  r = inf::evaluate(off, std::span(truth).first(1));
  EXPECT_EQ(r.accuracy, (std::array<double, 5>{0, 0, 1, 1, 1}));

  std::mt19937_64 rng(6);
  std::vector<gc::GeoPoint> pred, gt;
  for (int i = 0; i < 500; ++i) {
    gt.push_back(geoquery::testing::random_sphere_point(rng));
    pred.push_back(geoquery::testing::jitter(gt.back(), std::pow(10.0, (i % 5) - 2.0), rng));
  }
  r = inf::evaluate(pred, gt);
  EXPECT_EQ(r.n, 500u);
  for (std::size_t t = 0; t < 5; ++t) {
    std::size_t count = 0;
    for (std::size_t i = 0; i < gt.size(); ++i) {
      count += inf::haversine_km(pred[i], gt[i]) <= inf::kThresholdsKm[t] ? 1 : 0;
    }
    EXPECT_EQ(r.hits[t], count);
    if (t > 0) EXPECT_GE(r.accuracy[t], r.accuracy[t - 1]);
  }
  EXPECT_THROW(inf::evaluate(pred, std::span(gt).first(3)), std::invalid_argument);
  EXPECT_EQ(inf::evaluate({}, {}).n, 0u);
}

TEST(ImageOps, TenCropLayoutAndFlips) {
  std::mt19937_64 rng(7);
  const auto image = geoquery::testing::random_normal({3, 256, 256}, rng, false);
  const auto crops = inf::ten_crop(image, 224);
  ASSERT_EQ(crops.size(), 10u);
  for (const auto& c : crops) EXPECT_EQ(c.shape(), (nx::Shape{3, 224, 224}));
  EXPECT_EQ(crops[0].data()[0], image.data()[0]);
  // Bottom-right corner pixel of crop 3 is the image's last pixel in channel 0.
  EXPECT_EQ(crops[3].data()[224 * 224 - 1], image.data()[256 * 256 - 1]);
  // Centre crop starts at offset 16.
  EXPECT_EQ(crops[4].data()[0], image.data()[16 * 256 + 16]);
  for (std::size_t k = 0; k < 5; ++k) {
    const auto a = crops[k].data();
    const auto b = crops[k + 5].data();
    for (std::size_t row = 0; row < 3 * 224; ++row) {
      for (std::size_t x = 0; x < 224; ++x) {
        ASSERT_EQ(b[row * 224 + x], a[row * 224 + 223 - x]);
      }
    }
  }
  EXPECT_THROW(inf::ten_crop(geoquery::testing::random_normal({3, 200, 256}, rng, false), 224),
               nx::ShapeError);
}

TEST(ImageOps, BilinearResizeMatchesHandValues) {
  const auto img = Tensor::from({1, 2, 2}, {0.0, 1.0, 2.0, 3.0});
  const auto up = inf::resize_bilinear(img, 4, 4);
  // Half-pixel centres: output row 0 maps to source -0.25 -> clamped 0.
  const std::vector<double> expected{0.0,  0.25, 0.75, 1.0,  0.5, 0.75, 1.25, 1.5,
                                     1.5, 1.75, 2.25, 2.5, 2.0, 2.25, 2.75, 3.0};
  for (std::size_t i = 0; i < 16; ++i) EXPECT_DOUBLE_EQ(up.data()[i], expected[i]) << i;
  const auto down = inf::resize_bilinear(Tensor::from({1, 1, 4}, {0.0, 1.0, 2.0, 3.0}), 1, 2);
  EXPECT_DOUBLE_EQ(down.data()[0], 0.5);
  EXPECT_DOUBLE_EQ(down.data()[1], 2.5);
  // Same size is a copy.
  EXPECT_EQ(inf::resize_bilinear(img, 2, 2).data()[3], 3.0);
  EXPECT_EQ(inf::resize_shorter_side(Tensor::zeros({3, 10, 20}), 5).shape(), (nx::Shape{3, 5, 10}));
  EXPECT_EQ(inf::resize_target(224), 256u);
}

class PredictTest : public ::testing::Test {
 protected:
  void SetUp() override {
    std::mt19937_64 rng(8);
    const auto points = geoquery::testing::clustered_points(rng, 300);
    const std::int64_t t_max[] = {80, 20};
    stack = gc::build_stack(points, t_max, 2);
    auto c = geoquery::testing::micro_image_config();
    c.encoder.image_size = 8;
    c.encoder.patch_size = 4;
    c.encoder.channels = 3;
    c.classes_per_hierarchy = stack.class_counts();
    model.emplace(c);
  }
  gc::PartitionStack stack;
  std::optional<dc::GeoDecoderModel> model;
};

TEST_F(PredictTest, TenCropOfConstantImageEqualsSingleCrop) {
  const auto image = Tensor::full({3, 9, 9}, 0.37);
  const auto ten = inf::predict(image, *model, stack, true);
  const auto one = inf::predict(Tensor::full({3, 8, 8}, 0.37), *model, stack, false);
  EXPECT_EQ(ten.fine_class, one.fine_class);
  EXPECT_EQ(ten.scene, one.scene);
  for (std::size_t a = 0; a < one.composed_scores.size(); ++a) {
    EXPECT_NEAR(ten.composed_scores[a], one.composed_scores[a], 1e-12);
  }
}

TEST_F(PredictTest, FineClassIsComposedArgmaxAndCentroid) {
  std::mt19937_64 rng(9);
  std::vector<Tensor> inputs;
  for (int i = 0; i < 6; ++i) inputs.push_back(geoquery::testing::random_normal({3, 12, 10}, rng, false));
  const auto serial = inf::predict_all(inputs, *model, stack, true, 1);
  const auto threaded = inf::predict_all(inputs, *model, stack, true, 3);
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const auto& p = serial[i];
    EXPECT_EQ(p.fine_class, inf::argmax(p.composed_scores));
    EXPECT_EQ(p.point, stack.finest().centroids[p.fine_class]);
    EXPECT_EQ(threaded[i].composed_scores, p.composed_scores);
  }
}

TEST_F(PredictTest, RejectsMismatchedPartition) {
  auto other = stack;
  other.hierarchies.pop_back();
  other.parent_maps.pop_back();
  EXPECT_THROW(inf::predict(Tensor::zeros({3, 8, 8}), *model, other, false),
               geoquery::CompatibilityError);
}

TEST(Report, PredictionLineAndTable) {
  inf::Prediction p;
  p.point = gc::GeoPoint(1.0, 2.0);
  p.fine_class = 4;
  p.scene = 1;
  const auto j = nlohmann::json::parse(inf::prediction_line("img7", p, gc::GeoPoint(1.0, 2.0)));
  EXPECT_EQ(j["id"], "img7");
  EXPECT_EQ(j["hits"], nlohmann::json::array({true, true, true, true, true}));
  inf::EvalReport r;
  r.accuracy = {0.1, 0.2, 0.3, 0.4, 0.5};
  r.n = 10;
  EXPECT_EQ(inf::report_table(r),
            "street_1km,city_25km,region_200km,country_750km,continent_2500km,n\n"
            "10.00,20.00,30.00,40.00,50.00,10\n");
  EXPECT_EQ(inf::report_json(r)["n"], 10);
}

}  // namespace
