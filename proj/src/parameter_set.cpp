// SPDX-License-Identifier: Apache-2.0
#include "pesfkd/parameter_set.hpp"

#include <algorithm>
#include <cmath>

namespace pesfkd {

template <class T>
ParameterSet<T>::ParameterSet(const ParameterSet& other) : index_(other.index_) {
  entries_.reserve(other.entries_.size());
  for (const auto& e : other.entries_) {
    Tensor<T> copy(e.tensor.shape(), std::vector<T>(e.tensor.data().begin(), e.tensor.data().end()),
                   e.tensor.requires_grad());
    if (e.tensor.has_grad()) {
      auto src = e.tensor.grad();
      std::copy(src.begin(), src.end(), copy.mutable_grad().begin());
    }
    entries_.push_back(Entry{e.name, std::move(copy), e.frozen});
  }
}

template <class T>
ParameterSet<T>& ParameterSet<T>::operator=(const ParameterSet& other) {
  if (this != &other) {
    ParameterSet tmp(other);
    *this = std::move(tmp);
  }
  return *this;
}

template <class T>
void ParameterSet<T>::add(std::string name, Tensor<T> tensor, bool frozen) {
  if (index_.contains(name)) throw SpecError("duplicate parameter name '" + name + "'");
  tensor.set_requires_grad(!frozen);
  index_.emplace(name, entries_.size());
  entries_.push_back(Entry{std::move(name), std::move(tensor), frozen});
}

template <class T>
std::size_t ParameterSet<T>::index_of(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) throw SpecError("unknown parameter '" + std::string(name) + "'");
  return it->second;
}

template <class T>
bool ParameterSet<T>::contains(std::string_view name) const {
  return index_.contains(std::string(name));
}

template <class T>
const Tensor<T>& ParameterSet<T>::get(std::string_view name) const {
  return entries_[index_of(name)].tensor;
}

template <class T>
Tensor<T>& ParameterSet<T>::get(std::string_view name) {
  return entries_[index_of(name)].tensor;
}

template <class T>
bool ParameterSet<T>::frozen(std::string_view name) const {
  return entries_[index_of(name)].frozen;
}

template <class T>
void ParameterSet<T>::set_frozen(std::string_view name, bool frozen) {
  auto& e = entries_[index_of(name)];
  e.frozen = frozen;
  e.tensor.set_requires_grad(!frozen);
}

template <class T>
void ParameterSet<T>::set_frozen(const std::function<bool(std::string_view)>& predicate) {
  for (auto& e : entries_) {
    e.frozen = predicate(e.name);
    e.tensor.set_requires_grad(!e.frozen);
  }
}

template <class T>
void ParameterSet<T>::zero_grad() {
  for (auto& e : entries_) e.tensor.zero_grad();
}

template <class T>
std::size_t count_params(const ParameterSet<T>& params, bool only_trainable) {
  std::size_t n = 0;
  for (const auto& e : params) {
    if (!only_trainable || !e.frozen) n += e.tensor.numel();
  }
  return n;
}

template <class T>
double grad_check(const std::function<Tensor<T>(const ParameterSet<T>&)>& loss, ParameterSet<T>& params,
                  double eps) {
  if (!(eps > 0)) throw ParameterError("grad_check: eps must be positive");
  for (const auto& e : params) Tensor<T>(e.tensor).drop_grad();

  loss(params).backward();

  double worst = 0;
  NoGradGuard no_grad;
  for (const auto& e : params) {
    if (e.frozen) continue;
    Tensor<T> t = e.tensor;  // handle onto the same storage
    std::vector<T> analytic(t.numel(), T(0));
    if (t.has_grad()) std::copy(t.grad().begin(), t.grad().end(), analytic.begin());
    auto values = t.mutable_data();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const T saved = values[i];
      values[i] = static_cast<T>(saved + eps);
      const double plus = loss(params).item();
      values[i] = static_cast<T>(saved - eps);
      const double minus = loss(params).item();
      values[i] = saved;
      const double numeric = (plus - minus) / (2 * eps);
      const double a = analytic[i];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-12});
      worst = std::max(worst, std::abs(a - numeric) / denom);
    }
    t.drop_grad();
  }
  return worst;
}

template class ParameterSet<float>;
template class ParameterSet<double>;
template std::size_t count_params(const ParameterSet<float>&, bool);
template std::size_t count_params(const ParameterSet<double>&, bool);
template double grad_check(const std::function<Tensor<float>(const ParameterSet<float>&)>&,
                           ParameterSet<float>&, double);
template double grad_check(const std::function<Tensor<double>(const ParameterSet<double>&)>&,
                           ParameterSet<double>&, double);

}  // namespace pesfkd
