// SPDX-License-Identifier: Apache-2.0
#include "pesfkd/nn.hpp"

#include <cmath>
#include <random>

namespace pesfkd {

std::string_view to_string(Activation a) { return a == Activation::relu ? "relu" : "gelu"; }

Activation parse_activation(std::string_view s) {
  if (s == "relu") return Activation::relu;
  if (s == "gelu") return Activation::gelu;
  throw SpecError("unknown activation '" + std::string(s) + "'");
}

void ModelSpec::validate() const {
  if (input_dim == 0) throw SpecError("model input_dim must be positive");
  for (std::size_t i = 0; i < hidden_dims.size(); ++i) {
    if (hidden_dims[i] == 0) throw SpecError("hidden layer " + std::to_string(i) + " has zero width");
  }
  if (num_classes < 2) throw SpecError("num_classes must be at least 2");
}

std::string layer_weight_name(std::size_t layer) { return "layer" + std::to_string(layer) + ".weight"; }
std::string layer_bias_name(std::size_t layer) { return "layer" + std::to_string(layer) + ".bias"; }

std::size_t model_param_count(const ModelSpec& spec) {
  std::size_t n = 0;
  std::size_t in = spec.input_dim;
  for (auto h : spec.hidden_dims) {
    n += in * h + h;
    in = h;
  }
  return n + in * spec.num_classes + spec.num_classes;
}

template <class T>
Mlp<T>::Mlp(ModelSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  std::mt19937_64 rng(spec_.init_seed);
  auto uniform = [&](std::size_t count, double bound) {
    std::uniform_real_distribution<double> dist(-bound, bound);
    std::vector<T> v(count);
    for (auto& x : v) x = static_cast<T>(dist(rng));
    return v;
  };
  std::vector<std::size_t> widths = spec_.hidden_dims;
  widths.push_back(spec_.num_classes);
  std::size_t in = spec_.input_dim;
  for (std::size_t i = 0; i < widths.size(); ++i) {
    const std::size_t out = widths[i];
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    params_.add(layer_weight_name(i), Tensor<T>({in, out}, uniform(in * out, bound)));
    params_.add(layer_bias_name(i), Tensor<T>({out}, uniform(out, bound)));
    in = out;
  }
}

template <class T>
ForwardTrace<T> Mlp<T>::forward(const Tensor<T>& x) const {
  if (x.rank() != 2 || x.shape()[1] != spec_.input_dim) {
    throw DimensionError("forward: expected batch x " + std::to_string(spec_.input_dim) + " input, got " +
                         shape_str(x.shape()));
  }
  ForwardTrace<T> trace;
  Tensor<T> h = x;
  const std::size_t n_hidden = spec_.hidden_dims.size();
  for (std::size_t i = 0; i < n_hidden; ++i) {
    h = activate(add_bias(matmul(h, params_.get(layer_weight_name(i))), params_.get(layer_bias_name(i))),
                 spec_.activation);
    if (hook_) h = hook_(params_, i, h);
    trace.hidden.push_back(h);
  }
  trace.penultimate = h;
  trace.logits = add_bias(matmul(h, params_.get(layer_weight_name(n_hidden))), params_.get(layer_bias_name(n_hidden)));
  return trace;
}

template class Mlp<float>;
template class Mlp<double>;

}  // namespace pesfkd
