// SPDX-License-Identifier: Apache-2.0
//
// Dense row-major tensors with tape-based reverse-mode differentiation.
//
// A Tensor is a cheap handle onto a graph node. Every differentiable op run
// while gradient recording is enabled links its output to its inputs and
// registers a backward rule; Tensor::backward() walks the resulting graph once
// in reverse topological order. Gradients of leaves accumulate across calls
// until zero_grad() is invoked.
#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pesfkd/errors.hpp"

namespace pesfkd {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

enum class UnaryKind { relu, gelu, exp, log };
enum class BinaryKind { add, sub, mul };
enum class ReduceKind { sum, mean, max, logsumexp };

namespace detail {

template <class T>
struct Node {
  Shape shape;
  std::vector<T> data;
  std::optional<std::vector<T>> grad;
  bool requires_grad = false;
  std::string_view op = "leaf";
  std::vector<std::shared_ptr<Node>> inputs;
  // Reads this node's grad and accumulates into the grads of `inputs`.
  std::function<void(Node&)> backward_fn;

  std::vector<T>& grad_buffer() {
    if (!grad) grad.emplace(data.size(), T(0));
    return *grad;
  }
};

}  // namespace detail

/// Whether ops currently record the graph (thread-local).
bool grad_enabled();

/// Disables graph recording for its lifetime; nests.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

template <class T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;
  Tensor(Shape shape, std::vector<T> data, bool requires_grad = false);

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, T value, bool requires_grad = false);
  static Tensor scalar(T value);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t numel() const { return node_->data.size(); }

  std::span<const T> data() const { return node_->data; }
  /// Direct write access; only meaningful for leaves (parameters, inputs).
  std::span<T> mutable_data() { return node_->data; }
  T item() const;
  T at(std::size_t row, std::size_t col) const;

  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool value);
  bool has_grad() const { return node_->grad.has_value(); }
  std::span<const T> grad() const;
  std::span<T> mutable_grad();
  /// Zeroes the gradient buffer if one exists; never allocates.
  void zero_grad();
  void drop_grad() { node_->grad.reset(); }

  std::string_view op() const { return node_->op; }
  bool is_leaf() const { return node_->backward_fn == nullptr; }

  /// New leaf holding a copy of the values, outside any graph.
  Tensor detach() const;

  /// Reverse pass from a single-element tensor. Leaf gradients accumulate.
  void backward() const;

  const std::shared_ptr<detail::Node<T>>& node() const { return node_; }
  explicit Tensor(std::shared_ptr<detail::Node<T>> node) : node_(std::move(node)) {}

 private:
  std::shared_ptr<detail::Node<T>> node_;
};

// Linear algebra.
template <class T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b);
/// x[m x n] + bias[n] broadcast over rows. The only non-scalar broadcast.
template <class T>
Tensor<T> add_bias(const Tensor<T>& x, const Tensor<T>& bias);

// Pointwise.
template <class T>
Tensor<T> unary(const Tensor<T>& a, UnaryKind kind);
/// Shapes must match exactly unless one operand holds a single element.
template <class T>
Tensor<T> binary(const Tensor<T>& a, const Tensor<T>& b, BinaryKind kind);
template <class T>
Tensor<T> scale(const Tensor<T>& a, T factor);
template <class T>
Tensor<T> clamp_min(const Tensor<T>& a, T floor);

template <class T>
Tensor<T> relu(const Tensor<T>& a) { return unary(a, UnaryKind::relu); }
/// Tanh approximation: 0.5 x (1 + tanh(sqrt(2/pi) (x + 0.044715 x^3))).
template <class T>
Tensor<T> gelu(const Tensor<T>& a) { return unary(a, UnaryKind::gelu); }
template <class T>
Tensor<T> exp(const Tensor<T>& a) { return unary(a, UnaryKind::exp); }
/// Throws DomainError on any non-positive entry.
template <class T>
Tensor<T> log(const Tensor<T>& a) { return unary(a, UnaryKind::log); }
template <class T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) { return binary(a, b, BinaryKind::add); }
template <class T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) { return binary(a, b, BinaryKind::sub); }
template <class T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) { return binary(a, b, BinaryKind::mul); }

// Reductions. `axis == nullopt` reduces everything to a scalar; otherwise the
// axis is removed from the shape. logsumexp uses the max-shift form.
template <class T>
Tensor<T> reduce(const Tensor<T>& a, ReduceKind kind, std::optional<std::size_t> axis = std::nullopt);
template <class T>
Tensor<T> sum(const Tensor<T>& a, std::optional<std::size_t> axis = std::nullopt) {
  return reduce(a, ReduceKind::sum, axis);
}
template <class T>
Tensor<T> mean(const Tensor<T>& a, std::optional<std::size_t> axis = std::nullopt) {
  return reduce(a, ReduceKind::mean, axis);
}
template <class T>
Tensor<T> logsumexp(const Tensor<T>& a, std::optional<std::size_t> axis = std::nullopt) {
  return reduce(a, ReduceKind::logsumexp, axis);
}

/// Row-wise log-softmax over the last axis.
template <class T>
Tensor<T> log_softmax(const Tensor<T>& a);

}  // namespace pesfkd
