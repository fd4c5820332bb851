#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "geoquery/numerics/tensor.hpp"

namespace geoquery::numerics {

/// A named trainable leaf. The gradient lives on `value` and always has the
/// same shape.
struct Parameter {
  std::string name;
  Tensor value;

  std::span<const Scalar> gradient() const { return value.grad(); }
};

using Rng = std::mt19937_64;

/// Fills a freshly created parameter.
using Initializer = std::function<void(std::span<Scalar>, Rng&)>;

namespace init {
Initializer zeros();
Initializer constant(Scalar value);
/// U(-1/√fan_in, +1/√fan_in).
Initializer uniform_fan_in(std::size_t fan_in);
Initializer normal(Scalar stddev);
}  // namespace init

/**
 * Owns every parameter of a model in creation order.
 *
 * Creation order fixes both the random stream consumption and checkpoint
 * layout, so two stores built with the same seed and the same sequence of
 * add() calls are identical.
 */
class ParameterStore {
 public:
  explicit ParameterStore(std::uint64_t seed = 0) : rng_(seed) {}

  ParameterStore(const ParameterStore&) = delete;
  ParameterStore& operator=(const ParameterStore&) = delete;
  ParameterStore(ParameterStore&&) = default;
  ParameterStore& operator=(ParameterStore&&) = default;

  Tensor add(std::string name, Shape shape, const Initializer& initializer);

  std::vector<Parameter>& parameters() { return params_; }
  const std::vector<Parameter>& parameters() const { return params_; }

  /// Null when absent.
  const Parameter* find(std::string_view name) const;

  void zero_grad();
  std::size_t scalar_count() const;

 private:
  Rng rng_;
  std::vector<Parameter> params_;
};

}  // namespace geoquery::numerics
