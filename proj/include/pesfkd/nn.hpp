// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "pesfkd/parameter_set.hpp"
#include "pesfkd/tensor.hpp"

namespace pesfkd {

enum class Activation { relu, gelu };

std::string_view to_string(Activation a);
Activation parse_activation(std::string_view s);

template <class T>
Tensor<T> activate(const Tensor<T>& x, Activation a) {
  return a == Activation::relu ? relu(x) : gelu(x);
}

/// Dense classifier: input -> hidden_dims... -> num_classes logits.
struct ModelSpec {
  std::size_t input_dim = 0;
  std::vector<std::size_t> hidden_dims;
  std::size_t num_classes = 0;
  Activation activation = Activation::relu;
  std::uint64_t init_seed = 0;

  /// Throws SpecError for zero dimensions or fewer than two classes.
  void validate() const;
  bool operator==(const ModelSpec&) const = default;
};

/// Parameter names that form the freeze-predicate contract.
std::string layer_weight_name(std::size_t layer);
std::string layer_bias_name(std::size_t layer);

template <class T>
struct ForwardTrace {
  Tensor<T> logits;       // batch x K
  Tensor<T> penultimate;  // input to the output head
  std::vector<Tensor<T>> hidden;
};

/// Feed-forward network with dense layers (weights stored in x out, so a
/// layer computes x W + b). Hidden layer i may be post-processed by a hook,
/// which is how adapters are spliced in without the backbone knowing.
template <class T>
class Mlp {
 public:
  using HiddenHook = std::function<Tensor<T>(const ParameterSet<T>&, std::size_t layer, const Tensor<T>&)>;

  /// Builds with fan-in uniform initialisation (bound 1/sqrt(fan_in)) drawn
  /// from spec.init_seed. Values are drawn in double and rounded, so both
  /// precisions start from the same network.
  explicit Mlp(ModelSpec spec);

  const ModelSpec& spec() const { return spec_; }
  ParameterSet<T>& params() { return params_; }
  const ParameterSet<T>& params() const { return params_; }

  void set_hidden_hook(HiddenHook hook) { hook_ = std::move(hook); }
  bool has_hidden_hook() const { return static_cast<bool>(hook_); }

  /// Throws DimensionError when x is not batch x input_dim.
  ForwardTrace<T> forward(const Tensor<T>& x) const;

 private:
  ModelSpec spec_;
  ParameterSet<T> params_;
  HiddenHook hook_;
};

template <class T>
Mlp<T> build(const ModelSpec& spec) {
  return Mlp<T>(spec);
}

/// Total parameter count implied by a spec (weights plus biases).
std::size_t model_param_count(const ModelSpec& spec);

}  // namespace pesfkd
