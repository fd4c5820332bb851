#include "geoquery/inference/predict.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>

#include "geoquery/common/errors.hpp"
#include "geoquery/inference/image_ops.hpp"

namespace geoquery::inference {

using numerics::Scalar;
using numerics::Tensor;

std::size_t select_scene(std::span<const Scalar> scene_logits) {
  std::size_t best = 0;
  for (std::size_t s = 1; s < scene_logits.size(); ++s) {
    if (scene_logits[s] > scene_logits[best]) best = s;
  }
  return best;
}

std::size_t select_scene(const decoder::ForwardOutput& out) {
  return select_scene(out.scene_logits.data());
}

std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

std::vector<double> compose(const std::vector<std::vector<double>>& per_hierarchy,
                            const std::vector<std::vector<std::size_t>>& parent_maps) {
  if (per_hierarchy.empty()) throw std::invalid_argument("compose needs at least one hierarchy");
  if (parent_maps.size() + 1 != per_hierarchy.size()) {
    throw std::invalid_argument("compose: " + std::to_string(per_hierarchy.size()) +
                                " hierarchies need " + std::to_string(per_hierarchy.size() - 1) +
                                " parent maps, got " + std::to_string(parent_maps.size()));
  }
  for (std::size_t k = 0; k < parent_maps.size(); ++k) {
    if (parent_maps[k].size() != per_hierarchy[k + 1].size()) {
      throw std::invalid_argument("compose: parent map " + std::to_string(k) + " covers " +
                                  std::to_string(parent_maps[k].size()) + " classes, hierarchy has " +
                                  std::to_string(per_hierarchy[k + 1].size()));
    }
  }
  const auto finest = per_hierarchy.size() - 1;
  std::vector<double> scores(per_hierarchy[finest]);
  for (std::size_t a = 0; a < scores.size(); ++a) {
    std::size_t c = a;
    for (std::size_t k = finest; k-- > 0;) {
      c = parent_maps[k][c];
      if (c >= per_hierarchy[k].size()) {
        throw std::out_of_range("compose: dangling parent " + std::to_string(c) + " in hierarchy " +
                                std::to_string(k));
      }
      scores[a] *= per_hierarchy[k][c];
    }
  }
  return scores;
}

std::vector<double> compose(const std::vector<std::vector<double>>& per_hierarchy,
                            const geocell::PartitionStack& stack) {
  return compose(per_hierarchy, stack.parent_maps);
}

void require_compatible(const decoder::GeoDecoderModel& model, const geocell::PartitionStack& stack) {
  const auto counts = stack.class_counts();
  if (counts != model.config().classes_per_hierarchy) {
    throw CompatibilityError("model heads were built for a different partition (class counts differ)");
  }
}

namespace {

std::vector<Tensor> views_for(const Tensor& input, const decoder::GeoDecoderModel& model,
                              bool use_tencrop) {
  const auto& enc = model.config().encoder;
  if (enc.kind == decoder::EncoderKind::kPrecomputed) {
    if (use_tencrop) {
      throw std::invalid_argument("ten-crop evaluation needs an image model, not precomputed tokens");
    }
    return {input};
  }
  const auto size = enc.image_size;
  const bool native = input.rank() == 3 && input.dim(1) == size && input.dim(2) == size;
  if (!use_tencrop && native) return {input};
  const auto resized = resize_shorter_side(input, resize_target(size));
  if (use_tencrop) return ten_crop(resized, size);
  return {center_crop(resized, size)};
}

void softmax_in_place(std::span<const Scalar> logits, std::vector<double>& out) {
  out.resize(logits.size());
  double top = -INFINITY;
  for (auto v : logits) top = std::max(top, static_cast<double>(v));
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(static_cast<double>(logits[i]) - top);
    total += out[i];
  }
  for (auto& v : out) v /= total;
}

}  // namespace

Prediction predict(const Tensor& input, const decoder::GeoDecoderModel& model,
                   const geocell::PartitionStack& stack, bool use_tencrop) {
  require_compatible(model, stack);
  numerics::NoGradGuard no_grad;
  const auto views = views_for(input, model, use_tencrop);
  std::vector<decoder::ForwardOutput> outs;
  outs.reserve(views.size());
  for (const auto& v : views) outs.push_back(model.forward(v));

  const auto rows = outs.front().scene_rows;
  std::vector<Scalar> scene_mean(rows, Scalar{0});
  for (const auto& o : outs) {
    for (std::size_t s = 0; s < rows; ++s) scene_mean[s] += o.scene_logits.at(s);
  }
  for (auto& v : scene_mean) v /= static_cast<Scalar>(outs.size());

  Prediction p;
  p.scene = select_scene(scene_mean);
  const auto hierarchies = outs.front().hierarchies;
  std::vector<std::vector<double>> probs(hierarchies);
  std::vector<double> crop_probs;
  for (std::size_t h = 0; h < hierarchies; ++h) {
    const auto classes = outs.front().geo_logits[h].dim(1);
    probs[h].assign(classes, 0.0);
    for (const auto& o : outs) {
      softmax_in_place(o.geo_logits[h].data().subspan(p.scene * classes, classes), crop_probs);
      for (std::size_t c = 0; c < classes; ++c) probs[h][c] += crop_probs[c];
    }
    for (auto& v : probs[h]) v /= static_cast<double>(outs.size());
  }
  p.composed_scores = compose(probs, stack);
  p.fine_class = argmax(p.composed_scores);
  p.point = stack.finest().centroids.at(p.fine_class);
  return p;
}

std::vector<Prediction> predict_all(std::span<const Tensor> inputs,
                                    const decoder::GeoDecoderModel& model,
                                    const geocell::PartitionStack& stack, bool use_tencrop,
                                    std::size_t threads) {
  require_compatible(model, stack);
  std::vector<Prediction> out(inputs.size());
  threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(inputs.size(), 1));
  if (threads == 1) {
    for (std::size_t i = 0; i < inputs.size(); ++i) out[i] = predict(inputs[i], model, stack, use_tencrop);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < inputs.size(); i = next++) {
        try {
          out[i] = predict(inputs[i], model, stack, use_tencrop);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace geoquery::inference
