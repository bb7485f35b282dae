// SPDX-License-Identifier: Apache-2.0
#include "pesfkd/tensor.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <unordered_set>

namespace pesfkd {

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

namespace {

thread_local bool t_grad_enabled = true;

template <class T>
using NodePtr = std::shared_ptr<detail::Node<T>>;

template <class T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <class T>
NodePtr<T> make_output(Shape shape, std::vector<T> data, std::string_view op,
                       std::initializer_list<NodePtr<T>> inputs) {
  auto out = std::make_shared<detail::Node<T>>();
  out->shape = std::move(shape);
  out->data = std::move(data);
  out->op = op;
  if (t_grad_enabled) {
    for (const auto& in : inputs) {
      if (in->requires_grad) {
        out->requires_grad = true;
        break;
      }
    }
  }
  if (out->requires_grad) out->inputs.assign(inputs.begin(), inputs.end());
  return out;
}

template <class T>
void check_defined(const Tensor<T>& t, std::string_view op) {
  if (!t.defined()) throw ContractError(std::string(op) + ": undefined tensor");
}

constexpr double kGeluC = 0.7978845608028654;  // sqrt(2 / pi)
constexpr double kGeluA = 0.044715;

}  // namespace

bool grad_enabled() { return t_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(t_grad_enabled) { t_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { t_grad_enabled = previous_; }

// ---------------------------------------------------------------------------
// Tensor

template <class T>
Tensor<T>::Tensor(Shape shape, std::vector<T> data, bool requires_grad) {
  for (auto d : shape) {
    if (d == 0) throw DimensionError("tensor shape " + shape_str(shape) + " has a zero dimension");
  }
  if (shape_numel(shape) != data.size()) {
    throw DimensionError("tensor shape " + shape_str(shape) + " does not match " +
                         std::to_string(data.size()) + " values");
  }
  node_ = std::make_shared<detail::Node<T>>();
  node_->shape = std::move(shape);
  node_->data = std::move(data);
  node_->requires_grad = requires_grad;
}

template <class T>
Tensor<T> Tensor<T>::zeros(Shape shape, bool requires_grad) {
  return full(std::move(shape), T(0), requires_grad);
}

template <class T>
Tensor<T> Tensor<T>::full(Shape shape, T value, bool requires_grad) {
  const auto n = shape_numel(shape);
  return Tensor(std::move(shape), std::vector<T>(n, value), requires_grad);
}

template <class T>
Tensor<T> Tensor<T>::scalar(T value) {
  return Tensor(Shape{}, std::vector<T>{value});
}

template <class T>
std::size_t Tensor<T>::dim(std::size_t axis) const {
  if (axis >= rank()) {
    throw DimensionError("axis " + std::to_string(axis) + " out of range for shape " + shape_str(shape()));
  }
  return node_->shape[axis];
}

template <class T>
T Tensor<T>::item() const {
  if (numel() != 1) throw ContractError("item() on tensor of shape " + shape_str(shape()));
  return node_->data[0];
}

template <class T>
T Tensor<T>::at(std::size_t row, std::size_t col) const {
  if (rank() != 2 || row >= shape()[0] || col >= shape()[1]) {
    throw DimensionError("at(" + std::to_string(row) + ", " + std::to_string(col) + ") on shape " +
                         shape_str(shape()));
  }
  return node_->data[row * shape()[1] + col];
}

template <class T>
void Tensor<T>::set_requires_grad(bool value) {
  node_->requires_grad = value;
}

template <class T>
std::span<const T> Tensor<T>::grad() const {
  if (!node_->grad) throw ContractError("tensor has no gradient buffer");
  return *node_->grad;
}

template <class T>
std::span<T> Tensor<T>::mutable_grad() {
  return node_->grad_buffer();
}

template <class T>
void Tensor<T>::zero_grad() {
  if (node_->grad) std::fill(node_->grad->begin(), node_->grad->end(), T(0));
}

template <class T>
Tensor<T> Tensor<T>::detach() const {
  return Tensor(node_->shape, node_->data, false);
}

template <class T>
void Tensor<T>::backward() const {
  if (numel() != 1) {
    throw ContractError("backward() needs a single-element loss, got shape " + shape_str(shape()));
  }
  if (!node_->requires_grad) return;

  // Iterative post-order DFS yields a topological order (inputs first).
  std::vector<detail::Node<T>*> order;
  std::unordered_set<detail::Node<T>*> visited;
  std::vector<std::pair<detail::Node<T>*, std::size_t>> stack;
  stack.emplace_back(node_.get(), 0);
  visited.insert(node_.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      auto* child = node->inputs[next++].get();
      if (child->requires_grad && visited.insert(child).second) stack.emplace_back(child, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  // Interior gradients are per-pass scratch; only leaves accumulate.
  for (auto* node : order) {
    if (node->backward_fn) node->grad.emplace(node->data.size(), T(0));
  }
  node_->grad_buffer()[0] += T(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if ((*it)->backward_fn) (*it)->backward_fn(**it);
  }
}

// ---------------------------------------------------------------------------
// Ops

template <class T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  check_defined(a, "matmul");
  check_defined(b, "matmul");
  if (a.rank() != 2 || b.rank() != 2 || a.shape()[1] != b.shape()[0]) {
    throw DimensionError("matmul: incompatible shapes " + shape_str(a.shape()) + " and " + shape_str(b.shape()));
  }
  const auto m = static_cast<Eigen::Index>(a.shape()[0]);
  const auto k = static_cast<Eigen::Index>(a.shape()[1]);
  const auto n = static_cast<Eigen::Index>(b.shape()[1]);
  // Each output element accumulates over k in index order, so a row's result
  // does not depend on how many other rows share the batch.
  std::vector<T> out(static_cast<std::size_t>(m * n), T(0));
  {
    const T* A = a.data().data();
    const T* B = b.data().data();
    for (Eigen::Index i = 0; i < m; ++i) {
      T* c = out.data() + i * n;
      for (Eigen::Index kk = 0; kk < k; ++kk) {
        const T aik = A[i * k + kk];
        const T* brow = B + kk * n;
        for (Eigen::Index j = 0; j < n; ++j) c[j] += aik * brow[j];
      }
    }
  }
  auto node = make_output<T>({a.shape()[0], b.shape()[1]}, std::move(out), "matmul", {a.node(), b.node()});
  if (node->requires_grad) {
    node->backward_fn = [m, k, n](detail::Node<T>& self) {
      auto& na = *self.inputs[0];
      auto& nb = *self.inputs[1];
      Eigen::Map<const RowMat<T>> G(self.grad->data(), m, n);
      if (na.requires_grad) {
        Eigen::Map<const RowMat<T>> B(nb.data.data(), k, n);
        Eigen::Map<RowMat<T>> GA(na.grad_buffer().data(), m, k);
        GA.noalias() += G * B.transpose();
      }
      if (nb.requires_grad) {
        Eigen::Map<const RowMat<T>> A(na.data.data(), m, k);
        Eigen::Map<RowMat<T>> GB(nb.grad_buffer().data(), k, n);
        GB.noalias() += A.transpose() * G;
      }
    };
  }
  return Tensor<T>(node);
}

template <class T>
Tensor<T> add_bias(const Tensor<T>& x, const Tensor<T>& bias) {
  check_defined(x, "add_bias");
  check_defined(bias, "add_bias");
  if (x.rank() != 2 || bias.rank() != 1 || bias.shape()[0] != x.shape()[1]) {
    throw DimensionError("add_bias: incompatible shapes " + shape_str(x.shape()) + " and " +
                         shape_str(bias.shape()));
  }
  const auto rows = x.shape()[0];
  const auto cols = x.shape()[1];
  std::vector<T> out(x.data().begin(), x.data().end());
  const auto b = bias.data();
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) out[i * cols + j] += b[j];
  }
  auto node = make_output<T>(x.shape(), std::move(out), "add_bias", {x.node(), bias.node()});
  if (node->requires_grad) {
    node->backward_fn = [rows, cols](detail::Node<T>& self) {
      auto& nx = *self.inputs[0];
      auto& nb = *self.inputs[1];
      const auto& g = *self.grad;
      if (nx.requires_grad) {
        auto& gx = nx.grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
      }
      if (nb.requires_grad) {
        auto& gb = nb.grad_buffer();
        for (std::size_t i = 0; i < rows; ++i) {
          for (std::size_t j = 0; j < cols; ++j) gb[j] += g[i * cols + j];
        }
      }
    };
  }
  return Tensor<T>(node);
}

template <class T>
Tensor<T> unary(const Tensor<T>& a, UnaryKind kind) {
  check_defined(a, "unary");
  const auto x = a.data();
  std::vector<T> out(x.size());
  std::string_view op;
  switch (kind) {
    case UnaryKind::relu:
      op = "relu";
      for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] > T(0) ? x[i] : T(0);
      break;
    case UnaryKind::gelu:
      op = "gelu";
      for (std::size_t i = 0; i < x.size(); ++i) {
        const T v = x[i];
        const T u = T(kGeluC) * (v + T(kGeluA) * v * v * v);
        out[i] = T(0.5) * v * (T(1) + std::tanh(u));
      }
      break;
    case UnaryKind::exp:
      op = "exp";
      for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::exp(x[i]);
      break;
    case UnaryKind::log:
      op = "log";
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > T(0))) {
          std::ostringstream os;
          os << "log of non-positive value " << x[i] << " at index " << i;
          throw DomainError(os.str());
        }
        out[i] = std::log(x[i]);
      }
      break;
  }
  auto node = make_output<T>(a.shape(), std::move(out), op, {a.node()});
  if (node->requires_grad) {
    node->backward_fn = [kind](detail::Node<T>& self) {
      auto& in = *self.inputs[0];
      const auto& g = *self.grad;
      auto& gx = in.grad_buffer();
      const auto& xv = in.data;
      const auto& yv = self.data;
      switch (kind) {
        case UnaryKind::relu:
          for (std::size_t i = 0; i < g.size(); ++i) {
            if (xv[i] > T(0)) gx[i] += g[i];
          }
          break;
        case UnaryKind::gelu:
          for (std::size_t i = 0; i < g.size(); ++i) {
            const T v = xv[i];
            const T t = std::tanh(T(kGeluC) * (v + T(kGeluA) * v * v * v));
            const T du = T(kGeluC) * (T(1) + T(3 * kGeluA) * v * v);
            gx[i] += g[i] * (T(0.5) * (T(1) + t) + T(0.5) * v * (T(1) - t * t) * du);
          }
          break;
        case UnaryKind::exp:
          for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * yv[i];
          break;
        case UnaryKind::log:
          for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] / xv[i];
          break;
      }
    };
  }
  return Tensor<T>(node);
}

template <class T>
Tensor<T> binary(const Tensor<T>& a, const Tensor<T>& b, BinaryKind kind) {
  check_defined(a, "binary");
  check_defined(b, "binary");
  const bool same = a.shape() == b.shape();
  const bool a_scalar = a.numel() == 1;
  const bool b_scalar = b.numel() == 1;
  if (!same && !a_scalar && !b_scalar) {
    throw DimensionError("elementwise op: incompatible shapes " + shape_str(a.shape()) + " and " +
                         shape_str(b.shape()));
  }
  // Broadcasting only ever expands a single-element operand.
  const bool a_bcast = !same && a_scalar;
  const bool b_bcast = !same && !a_bcast && b_scalar;
  const Shape& out_shape = a_bcast ? b.shape() : a.shape();
  const std::size_t n = shape_numel(out_shape);
  const auto av = a.data();
  const auto bv = b.data();
  auto A = [&](std::size_t i) { return a_bcast ? av[0] : av[i]; };
  auto B = [&](std::size_t i) { return b_bcast ? bv[0] : bv[i]; };
  std::vector<T> out(n);
  std::string_view op;
  switch (kind) {
    case BinaryKind::add:
      op = "add";
      for (std::size_t i = 0; i < n; ++i) out[i] = A(i) + B(i);
      break;
    case BinaryKind::sub:
      op = "sub";
      for (std::size_t i = 0; i < n; ++i) out[i] = A(i) - B(i);
      break;
    case BinaryKind::mul:
      op = "mul";
      for (std::size_t i = 0; i < n; ++i) out[i] = A(i) * B(i);
      break;
  }
  auto node = make_output<T>(out_shape, std::move(out), op, {a.node(), b.node()});
  if (node->requires_grad) {
    node->backward_fn = [kind, a_bcast, b_bcast](detail::Node<T>& self) {
      auto& na = *self.inputs[0];
      auto& nb = *self.inputs[1];
      const auto& g = *self.grad;
      const std::size_t n = g.size();
      auto av = [&](std::size_t i) { return a_bcast ? na.data[0] : na.data[i]; };
      auto bv = [&](std::size_t i) { return b_bcast ? nb.data[0] : nb.data[i]; };
      if (na.requires_grad) {
        auto& ga = na.grad_buffer();
        for (std::size_t i = 0; i < n; ++i) {
          T d = g[i];
          if (kind == BinaryKind::mul) d *= bv(i);
          ga[a_bcast ? 0 : i] += d;
        }
      }
      if (nb.requires_grad) {
        auto& gb = nb.grad_buffer();
        for (std::size_t i = 0; i < n; ++i) {
          T d = g[i];
          if (kind == BinaryKind::sub) d = -d;
          if (kind == BinaryKind::mul) d *= av(i);
          gb[b_bcast ? 0 : i] += d;
        }
      }
    };
  }
  return Tensor<T>(node);
}

template <class T>
Tensor<T> scale(const Tensor<T>& a, T factor) {
  check_defined(a, "scale");
  std::vector<T> out(a.data().begin(), a.data().end());
  for (auto& v : out) v *= factor;
  auto node = make_output<T>(a.shape(), std::move(out), "scale", {a.node()});
  if (node->requires_grad) {
    node->backward_fn = [factor](detail::Node<T>& self) {
      auto& gx = self.inputs[0]->grad_buffer();
      const auto& g = *self.grad;
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * factor;
    };
  }
  return Tensor<T>(node);
}

template <class T>
Tensor<T> clamp_min(const Tensor<T>& a, T floor) {
  check_defined(a, "clamp_min");
  std::vector<T> out(a.data().begin(), a.data().end());
  for (auto& v : out) v = std::max(v, floor);
  auto node = make_output<T>(a.shape(), std::move(out), "clamp_min", {a.node()});
  if (node->requires_grad) {
    node->backward_fn = [floor](detail::Node<T>& self) {
      auto& in = *self.inputs[0];
      auto& gx = in.grad_buffer();
      const auto& g = *self.grad;
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (in.data[i] >= floor) gx[i] += g[i];
      }
    };
  }
  return Tensor<T>(node);
}

template <class T>
Tensor<T> reduce(const Tensor<T>& a, ReduceKind kind, std::optional<std::size_t> axis) {
  check_defined(a, "reduce");
  std::size_t outer = 1, len = a.numel(), inner = 1;
  Shape out_shape;
  if (axis) {
    if (*axis >= a.rank()) {
      throw DimensionError("reduce: axis " + std::to_string(*axis) + " invalid for shape " + shape_str(a.shape()));
    }
    for (std::size_t i = 0; i < *axis; ++i) outer *= a.shape()[i];
    len = a.shape()[*axis];
    for (std::size_t i = *axis + 1; i < a.rank(); ++i) inner *= a.shape()[i];
    for (std::size_t i = 0; i < a.rank(); ++i) {
      if (i != *axis) out_shape.push_back(a.shape()[i]);
    }
  }
  const auto x = a.data();
  std::vector<T> out(outer * inner);
  // Saved per-output state: argmax index for max, softmax weights for logsumexp.
  std::vector<std::size_t> argmax;
  std::vector<T> weights;
  if (kind == ReduceKind::max) argmax.resize(out.size());
  if (kind == ReduceKind::logsumexp) weights.resize(x.size());

  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t in = 0; in < inner; ++in) {
      const std::size_t base = o * len * inner + in;
      const std::size_t oi = o * inner + in;
      auto at = [&](std::size_t j) { return x[base + j * inner]; };
      switch (kind) {
        case ReduceKind::sum:
        case ReduceKind::mean: {
          T s = 0;
          for (std::size_t j = 0; j < len; ++j) s += at(j);
          out[oi] = kind == ReduceKind::mean ? s / T(len) : s;
          break;
        }
        case ReduceKind::max: {
          std::size_t best = 0;
          for (std::size_t j = 1; j < len; ++j) {
            if (at(j) > at(best)) best = j;
          }
          argmax[oi] = best;
          out[oi] = at(best);
          break;
        }
        case ReduceKind::logsumexp: {
          T m = at(0);
          for (std::size_t j = 1; j < len; ++j) m = std::max(m, at(j));
          T s = 0;
          for (std::size_t j = 0; j < len; ++j) s += std::exp(at(j) - m);
          const T lse = m + std::log(s);
          out[oi] = lse;
          for (std::size_t j = 0; j < len; ++j) weights[base + j * inner] = std::exp(at(j) - lse);
          break;
        }
      }
    }
  }

  std::string_view op = kind == ReduceKind::sum    ? "sum"
                        : kind == ReduceKind::mean ? "mean"
                        : kind == ReduceKind::max  ? "max"
                                                   : "logsumexp";
  auto node = make_output<T>(std::move(out_shape), std::move(out), op, {a.node()});
  if (node->requires_grad) {
    node->backward_fn = [kind, outer, len, inner, argmax = std::move(argmax),
                         weights = std::move(weights)](detail::Node<T>& self) {
      auto& gx = self.inputs[0]->grad_buffer();
      const auto& g = *self.grad;
      for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t in = 0; in < inner; ++in) {
          const std::size_t base = o * len * inner + in;
          const T go = g[o * inner + in];
          switch (kind) {
            case ReduceKind::sum:
              for (std::size_t j = 0; j < len; ++j) gx[base + j * inner] += go;
              break;
            case ReduceKind::mean:
              for (std::size_t j = 0; j < len; ++j) gx[base + j * inner] += go / T(len);
              break;
            case ReduceKind::max:
              gx[base + argmax[o * inner + in] * inner] += go;
              break;
            case ReduceKind::logsumexp:
              for (std::size_t j = 0; j < len; ++j) gx[base + j * inner] += go * weights[base + j * inner];
              break;
          }
        }
      }
    };
  }
  return Tensor<T>(node);
}

template <class T>
Tensor<T> log_softmax(const Tensor<T>& a) {
  check_defined(a, "log_softmax");
  if (a.rank() == 0) throw DimensionError("log_softmax needs at least one axis");
  const std::size_t cols = a.shape().back();
  const std::size_t rows = a.numel() / cols;
  const auto x = a.data();
  std::vector<T> out(x.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const T* row = x.data() + r * cols;
    const T m = *std::max_element(row, row + cols);
    T s = 0;
    for (std::size_t j = 0; j < cols; ++j) s += std::exp(row[j] - m);
    // Subtract the shift first: folding it into m + log(s) would round at the
    // magnitude of m and lose precision for large logits.
    const T log_s = std::log(s);
    for (std::size_t j = 0; j < cols; ++j) out[r * cols + j] = (row[j] - m) - log_s;
  }
  auto node = make_output<T>(a.shape(), std::move(out), "log_softmax", {a.node()});
  if (node->requires_grad) {
    node->backward_fn = [rows, cols](detail::Node<T>& self) {
      auto& gx = self.inputs[0]->grad_buffer();
      const auto& g = *self.grad;
      for (std::size_t r = 0; r < rows; ++r) {
        T gsum = 0;
        for (std::size_t j = 0; j < cols; ++j) gsum += g[r * cols + j];
        for (std::size_t j = 0; j < cols; ++j) {
          const std::size_t i = r * cols + j;
          gx[i] += g[i] - std::exp(self.data[i]) * gsum;
        }
      }
    };
  }
  return Tensor<T>(node);
}

#define PESFKD_INSTANTIATE(T)                                                              \
  template class Tensor<T>;                                                                \
  template Tensor<T> matmul(const Tensor<T>&, const Tensor<T>&);                           \
  template Tensor<T> add_bias(const Tensor<T>&, const Tensor<T>&);                         \
  template Tensor<T> unary(const Tensor<T>&, UnaryKind);                                   \
  template Tensor<T> binary(const Tensor<T>&, const Tensor<T>&, BinaryKind);               \
  template Tensor<T> scale(const Tensor<T>&, T);                                           \
  template Tensor<T> clamp_min(const Tensor<T>&, T);                                       \
  template Tensor<T> reduce(const Tensor<T>&, ReduceKind, std::optional<std::size_t>);     \
  template Tensor<T> log_softmax(const Tensor<T>&);

PESFKD_INSTANTIATE(float)
PESFKD_INSTANTIATE(double)

#undef PESFKD_INSTANTIATE

}  // namespace pesfkd
