#include "geoquery/decoder/training.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>

#include "geoquery/numerics/ops.hpp"

namespace geoquery::decoder {

Tensor batch_loss(const GeoDecoderModel& model, std::span<const Example* const> batch) {
  if (batch.empty()) throw std::invalid_argument("empty training batch");
  std::vector<Tensor> terms;
  terms.reserve(batch.size());
  for (const auto* ex : batch) {
    const auto out = model.forward(ex->input);
    terms.push_back(numerics::reshape(loss(out, ex->labels, ex->scene), {1, 1}));
  }
  return numerics::mean(numerics::concat_rows(terms));
}

Trainer::Trainer(GeoDecoderModel& model, numerics::OptimizerState optimizer, std::uint64_t seed)
    : model_(model), sgd_(std::move(optimizer)), seed_(seed) {}

double Trainer::step(std::span<const Example* const> batch) {
  auto& store = model_.store();
  store.zero_grad();
  const auto l = batch_loss(model_, batch);
  numerics::backward(l);
  sgd_.step(store.parameters());
  ++steps_;
  return static_cast<double>(l.item());
}

double Trainer::run_epoch(std::span<const Example> data, std::size_t batch_size,
                          const std::function<void(const StepStats&)>& on_step) {
  if (data.empty()) throw std::invalid_argument("no training examples");
  if (batch_size == 0) throw std::invalid_argument("batch size must be positive");
  sgd_.set_epoch(epoch_);

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::seed_seq seq{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32),
                    static_cast<std::uint32_t>(epoch_)};
  std::mt19937_64 rng(seq);
  std::shuffle(order.begin(), order.end(), rng);

  double total = 0.0;
  std::size_t batches = 0;
  std::vector<const Example*> batch;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    batch.clear();
    for (std::size_t i = start; i < std::min(order.size(), start + batch_size); ++i) {
      batch.push_back(&data[order[i]]);
    }
    const auto l = step(batch);
    total += l;
    ++batches;
    if (on_step) on_step({epoch_, steps_, l, sgd_.state().learning_rate});
  }
  ++epoch_;
  return total / static_cast<double>(batches);
}

void Trainer::resume(int epoch, std::uint64_t steps) {
  epoch_ = epoch;
  steps_ = steps;
}

std::size_t predicted_finest_class(const ForwardOutput& out) {
  const auto scenes = out.scene_logits.data();
  const auto row = static_cast<std::size_t>(
      std::distance(scenes.begin(), std::max_element(scenes.begin(), scenes.end())));
  const auto& fine = out.geo_logits.back();
  const auto cols = fine.dim(1);
  const auto logits = fine.data().subspan(row * cols, cols);
  return static_cast<std::size_t>(
      std::distance(logits.begin(), std::max_element(logits.begin(), logits.end())));
}

double finest_accuracy(const GeoDecoderModel& model, std::span<const Example> data) {
  if (data.empty()) return 0.0;
  numerics::NoGradGuard no_grad;
  std::size_t hits = 0;
  for (const auto& ex : data) {
    const auto& fine = ex.labels.back();
    if (fine && predicted_finest_class(model.forward(ex.input)) == *fine) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

}  // namespace geoquery::decoder
