#include "geoquery/numerics/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace geoquery::numerics {

double scheduled_learning_rate(double initial, std::span<const int> milestones, double gamma,
                               int epoch) {
  int passed = 0;
  for (int m : milestones) {
    if (m <= epoch) ++passed;
  }
  return initial * std::pow(gamma, passed);
}

Sgd::Sgd(OptimizerState state) : state_(std::move(state)) {}

void Sgd::set_epoch(int epoch) {
  state_.learning_rate =
      scheduled_learning_rate(state_.initial_learning_rate, state_.milestones, state_.gamma, epoch);
}

void Sgd::step(std::span<Parameter> params) {
  if (params.empty()) return;
  auto& buffers = state_.momentum_buffers;
  const bool fresh = buffers.empty();
  if (fresh) {
    buffers.resize(params.size());
  } else if (buffers.size() != params.size()) {
    throw std::logic_error("optimizer state was built for a different parameter list");
  }
  const auto lr = static_cast<Scalar>(state_.learning_rate);
  const auto mom = static_cast<Scalar>(state_.momentum);
  const auto wd = static_cast<Scalar>(state_.weight_decay);
  for (std::size_t p = 0; p < params.size(); ++p) {
    auto value = params[p].value.mutable_data();
    const auto grad = params[p].value.grad();
    auto& buf = buffers[p];
    if (buf.empty()) buf.assign(value.size(), Scalar{0});
    for (std::size_t i = 0; i < value.size(); ++i) {
      const auto g = (grad.empty() ? Scalar{0} : grad[i]) + wd * value[i];
      buf[i] = mom * buf[i] + g;
      value[i] -= lr * buf[i];
    }
  }
}

}  // namespace geoquery::numerics
