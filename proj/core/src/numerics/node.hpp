#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "geoquery/numerics/tensor.hpp"

namespace geoquery::numerics::detail {

struct Node {
  Shape shape;
  std::vector<Scalar> value;
  std::vector<Scalar> grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> inputs;
  // Propagates this node's grad into its inputs' grads.
  std::function<void(Node&)> backward_fn;

  bool is_leaf() const { return !backward_fn; }

  std::vector<Scalar>& ensure_grad() {
    if (grad.size() != value.size()) grad.assign(value.size(), Scalar{0});
    return grad;
  }
};

using NodePtr = std::shared_ptr<Node>;
using BackwardFn = std::function<void(Node&)>;

/// Wraps a freshly computed value as an op output. History is recorded only
/// when grad mode is on and at least one input requires grad.
Tensor make_result(Shape shape, std::vector<Scalar> value, std::vector<Tensor> inputs,
                   BackwardFn backward_fn);

}  // namespace geoquery::numerics::detail
