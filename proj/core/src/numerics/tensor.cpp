#include "geoquery/numerics/tensor.hpp"

#include <sstream>
#include <unordered_set>

#include "node.hpp"

namespace geoquery::numerics {

namespace {
thread_local bool g_grad_enabled = true;
}

std::size_t numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  return full(std::move(shape), Scalar{0}, requires_grad);
}

Tensor Tensor::full(Shape shape, Scalar value, bool requires_grad) {
  const auto n = numerics::numel(shape);
  return from(std::move(shape), std::vector<Scalar>(n, value), requires_grad);
}

Tensor Tensor::from(Shape shape, std::vector<Scalar> values, bool requires_grad) {
  for (auto d : shape) {
    if (d == 0) throw ShapeError("tensor dimensions must be positive, got " + to_string(shape));
  }
  if (values.size() != numerics::numel(shape)) {
    throw ShapeError("tensor of shape " + to_string(shape) + " needs " +
                     std::to_string(numerics::numel(shape)) + " values, got " +
                     std::to_string(values.size()));
  }
  auto node = std::make_shared<detail::Node>();
  node->shape = std::move(shape);
  node->value = std::move(values);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::scalar(Scalar value, bool requires_grad) {
  return from({1}, {value}, requires_grad);
}

const Shape& Tensor::shape() const { return node_->shape; }

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= rank()) {
    throw ShapeError("axis " + std::to_string(axis) + " out of range for " + to_string(shape()));
  }
  return node_->shape[axis];
}

std::size_t Tensor::numel() const { return node_->value.size(); }

std::span<const Scalar> Tensor::data() const { return node_->value; }

std::span<Scalar> Tensor::mutable_data() {
  if (!node_->is_leaf()) throw std::logic_error("mutable_data() on a non-leaf tensor");
  return node_->value;
}

bool Tensor::requires_grad() const { return node_->requires_grad; }

std::span<const Scalar> Tensor::grad() const { return node_->grad; }

std::span<Scalar> Tensor::mutable_grad() { return node_->ensure_grad(); }

void Tensor::zero_grad() { node_->grad.assign(node_->value.size(), Scalar{0}); }

Scalar Tensor::item() const {
  if (numel() != 1) throw ShapeError("item() on tensor of shape " + to_string(shape()));
  return node_->value[0];
}

Scalar Tensor::at(std::size_t i) const { return node_->value.at(i); }

Scalar Tensor::at(std::size_t i, std::size_t j) const {
  if (rank() != 2) throw ShapeError("at(i, j) on tensor of shape " + to_string(shape()));
  return node_->value.at(i * node_->shape[1] + j);
}

Tensor Tensor::detach() const { return from(node_->shape, node_->value, false); }

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

namespace detail {

Tensor make_result(Shape shape, std::vector<Scalar> value, std::vector<Tensor> inputs,
                   BackwardFn backward_fn) {
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  bool needs = false;
  if (g_grad_enabled) {
    for (const auto& in : inputs) needs = needs || in.requires_grad();
  }
  if (needs) {
    node->requires_grad = true;
    node->inputs.reserve(inputs.size());
    for (const auto& in : inputs) node->inputs.push_back(in.node());
    node->backward_fn = std::move(backward_fn);
  }
  return Tensor(std::move(node));
}

}  // namespace detail

void backward(const Tensor& loss) {
  if (!loss.defined() || loss.numel() != 1) {
    throw ShapeError("backward() needs a scalar loss, got " +
                     (loss.defined() ? to_string(loss.shape()) : std::string("undefined")));
  }
  const auto& root = loss.node();
  if (!root->requires_grad) return;
  if (root->is_leaf()) {
    root->ensure_grad()[0] += Scalar{1};
    return;
  }

  // Iterative post-order DFS yields inputs before consumers.
  std::vector<detail::Node*> order;
  std::unordered_set<detail::Node*> visited;
  std::vector<std::pair<detail::Node*, std::size_t>> stack{{root.get(), 0}};
  visited.insert(root.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      auto* child = node->inputs[next++].get();
      if (child->requires_grad && !child->is_leaf() && visited.insert(child).second) {
        stack.emplace_back(child, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  // Interior gradients are per-sweep; leaves accumulate.
  for (auto* node : order) node->grad.assign(node->value.size(), Scalar{0});
  root->grad[0] = Scalar{1};
  for (auto it = order.rbegin(); it != order.rend(); ++it) (*it)->backward_fn(**it);
}

}  // namespace geoquery::numerics
