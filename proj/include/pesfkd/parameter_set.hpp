// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "pesfkd/tensor.hpp"

namespace pesfkd {

/// Ordered, uniquely named trainable tensors with per-name freeze flags.
///
/// A frozen parameter has requires_grad == false, so backward never allocates
/// or writes its gradient and optimizers skip it. Copying a ParameterSet deep
/// copies every tensor; the copy shares no storage with the original.
template <class T>
class ParameterSet {
 public:
  struct Entry {
    std::string name;
    Tensor<T> tensor;
    bool frozen = false;
  };

  ParameterSet() = default;
  ParameterSet(const ParameterSet& other);
  ParameterSet& operator=(const ParameterSet& other);
  ParameterSet(ParameterSet&&) noexcept = default;
  ParameterSet& operator=(ParameterSet&&) noexcept = default;

  /// Registers a new leaf. Throws SpecError on duplicate names.
  void add(std::string name, Tensor<T> tensor, bool frozen = false);

  bool contains(std::string_view name) const;
  const Tensor<T>& get(std::string_view name) const;
  Tensor<T>& get(std::string_view name);
  bool frozen(std::string_view name) const;
  void set_frozen(std::string_view name, bool frozen);
  /// frozen(name) := predicate(name) for every entry.
  void set_frozen(const std::function<bool(std::string_view)>& predicate);

  void zero_grad();

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::vector<Entry>& entries() const { return entries_; }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

 private:
  std::size_t index_of(std::string_view name) const;

  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Element count over all (or only unfrozen) parameters.
template <class T>
std::size_t count_params(const ParameterSet<T>& params, bool only_trainable = false);

/// Maximum relative error between backward() gradients and central finite
/// differences, over every element of every unfrozen parameter:
///   |analytic - numeric| / max(|analytic|, |numeric|, 1e-12).
/// `loss` must rebuild its graph from `params` on each call. Parameter values
/// are restored afterwards; existing gradients are cleared.
template <class T>
double grad_check(const std::function<Tensor<T>(const ParameterSet<T>&)>& loss, ParameterSet<T>& params,
                  double eps);

}  // namespace pesfkd
