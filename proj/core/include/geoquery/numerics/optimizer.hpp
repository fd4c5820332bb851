#pragma once

#include <span>
#include <vector>

#include "geoquery/numerics/parameter.hpp"

namespace geoquery::numerics {

/// Momentum SGD with L2 weight decay and a multi-step learning-rate schedule.
struct OptimizerState {
  double initial_learning_rate = 0.01;
  double learning_rate = 0.01;
  double momentum = 0.9;
  double weight_decay = 1e-4;
  std::vector<int> milestones{4, 8, 12, 13, 14, 15};
  double gamma = 0.5;
  /// Parallel to the parameter list; empty until the first step.
  std::vector<std::vector<Scalar>> momentum_buffers;
};

/// initial · gamma^(number of milestones ≤ epoch).
double scheduled_learning_rate(double initial, std::span<const int> milestones, double gamma,
                               int epoch);

class Sgd {
 public:
  explicit Sgd(OptimizerState state = {});

  /// Applies the schedule for the given zero-based epoch.
  void set_epoch(int epoch);

  /// buf ← m·buf + (grad + wd·value); value ← value − lr·buf.
  void step(std::span<Parameter> params);

  const OptimizerState& state() const { return state_; }
  OptimizerState& state() { return state_; }

 private:
  OptimizerState state_;
};

}  // namespace geoquery::numerics
