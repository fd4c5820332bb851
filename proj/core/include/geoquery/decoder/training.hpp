#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "geoquery/decoder/geo_decoder.hpp"
#include "geoquery/geocell/partition.hpp"
#include "geoquery/numerics/optimizer.hpp"

namespace geoquery::decoder {

struct Example {
  Tensor input;
  geocell::LabelChain labels;
  std::size_t scene = 0;
};

struct StepStats {
  int epoch = 0;
  std::uint64_t step = 0;
  double loss = 0.0;
  double learning_rate = 0.0;
};

/// Mean of the per-example losses over a batch.
Tensor batch_loss(const GeoDecoderModel& model, std::span<const Example* const> batch);

/**
 * Single-writer SGD loop over a model.
 *
 * Each epoch visits the examples in an order drawn from (seed, epoch), so a
 * resumed run sees the same batches as an uninterrupted one.
 */
class Trainer {
 public:
  Trainer(GeoDecoderModel& model, numerics::OptimizerState optimizer, std::uint64_t seed);

  /// One optimizer step on `batch`; returns the batch loss before the update.
  double step(std::span<const Example* const> batch);

  /// Runs epoch `epoch()` and advances it. Returns the mean batch loss.
  double run_epoch(std::span<const Example> data, std::size_t batch_size,
                   const std::function<void(const StepStats&)>& on_step = {});

  int epoch() const { return epoch_; }
  std::uint64_t steps() const { return steps_; }
  void resume(int epoch, std::uint64_t steps);

  const numerics::OptimizerState& optimizer() const { return sgd_.state(); }

 private:
  GeoDecoderModel& model_;
  numerics::Sgd sgd_;
  std::uint64_t seed_;
  int epoch_ = 0;
  std::uint64_t steps_ = 0;
};

/// Argmax of the finest hierarchy at the argmax scene row (ties to the lower index).
std::size_t predicted_finest_class(const ForwardOutput& out);

/// Fraction of examples whose finest label equals predicted_finest_class.
double finest_accuracy(const GeoDecoderModel& model, std::span<const Example> data);

}  // namespace geoquery::decoder
