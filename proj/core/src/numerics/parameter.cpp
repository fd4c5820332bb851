#include "geoquery/numerics/parameter.hpp"

#include <cmath>
#include <stdexcept>

namespace geoquery::numerics {

namespace init {

Initializer zeros() { return constant(Scalar{0}); }

Initializer constant(Scalar value) {
  return [value](std::span<Scalar> out, Rng&) {
    for (auto& v : out) v = value;
  };
}

Initializer uniform_fan_in(std::size_t fan_in) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  return [bound](std::span<Scalar> out, Rng& rng) {
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (auto& v : out) v = static_cast<Scalar>(dist(rng));
  };
}

Initializer normal(Scalar stddev) {
  return [stddev](std::span<Scalar> out, Rng& rng) {
    std::normal_distribution<double> dist(0.0, static_cast<double>(stddev));
    for (auto& v : out) v = static_cast<Scalar>(dist(rng));
  };
}

}  // namespace init

Tensor ParameterStore::add(std::string name, Shape shape, const Initializer& initializer) {
  if (find(name)) throw std::invalid_argument("duplicate parameter name: " + name);
  auto value = Tensor::zeros(std::move(shape), true);
  initializer(value.mutable_data(), rng_);
  value.zero_grad();
  params_.push_back({std::move(name), value});
  return value;
}

const Parameter* ParameterStore::find(std::string_view name) const {
  for (const auto& p : params_) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

void ParameterStore::zero_grad() {
  for (auto& p : params_) p.value.zero_grad();
}

std::size_t ParameterStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.numel();
  return n;
}

}  // namespace geoquery::numerics
