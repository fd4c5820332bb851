#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace geoquery::numerics {

#ifdef GEOQUERY_SINGLE_PRECISION
using Scalar = float;
#else
using Scalar = double;
#endif

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string to_string(const Shape& shape);

/// Raised when operand shapes are incompatible with an operation.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {
struct Node;
}

/**
 * Dense row-major array with an optional autodiff history.
 *
 * A Tensor is a cheap handle: copies share the same underlying node. Values
 * produced by operations are never mutated afterwards; only leaf tensors
 * (parameters, inputs) expose mutable storage.
 */
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, Scalar value, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<Scalar> values, bool requires_grad = false);
  static Tensor scalar(Scalar value, bool requires_grad = false);

  bool defined() const { return static_cast<bool>(node_); }

  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t numel() const;

  std::span<const Scalar> data() const;
  /// Mutable storage. Only valid on leaf tensors.
  std::span<Scalar> mutable_data();

  bool requires_grad() const;
  /// Accumulated gradient; empty until a backward pass reaches this tensor.
  std::span<const Scalar> grad() const;
  std::span<Scalar> mutable_grad();
  void zero_grad();

  Scalar item() const;
  Scalar at(std::size_t i) const;
  Scalar at(std::size_t i, std::size_t j) const;

  /// Value copy with no history and no gradient requirement.
  Tensor detach() const;

  const std::shared_ptr<detail::Node>& node() const { return node_; }
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}

 private:
  std::shared_ptr<detail::Node> node_;
};

/// Reverse-mode sweep from a scalar loss. Leaf gradients accumulate across
/// calls until zero_grad().
void backward(const Tensor& loss);

/// Whether operations currently record history (thread-local).
bool grad_enabled();

class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

}  // namespace geoquery::numerics
