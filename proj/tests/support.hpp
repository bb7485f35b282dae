// SPDX-License-Identifier: Apache-2.0
// Small random generators shared by the unit and acceptance tests.
#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "pesfkd/tensor.hpp"

namespace testing_support {

inline std::vector<double> uniform_values(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

template <class T = double>
pesfkd::Tensor<T> random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols, double lo = -1.0,
                                double hi = 1.0, bool requires_grad = false) {
  const auto v = uniform_values(rng, rows * cols, lo, hi);
  return pesfkd::Tensor<T>({rows, cols}, std::vector<T>(v.begin(), v.end()), requires_grad);
}

template <class T = double>
pesfkd::Tensor<T> one_hot(const std::vector<int>& labels, std::size_t k) {
  std::vector<T> v(labels.size() * k, T(0));
  for (std::size_t i = 0; i < labels.size(); ++i) v[i * k + labels[i]] = T(1);
  return pesfkd::Tensor<T>({labels.size(), k}, v);
}

inline std::vector<int> random_labels(std::mt19937_64& rng, std::size_t n, std::size_t k) {
  std::uniform_int_distribution<int> u(0, int(k) - 1);
  std::vector<int> out(n);
  for (auto& l : out) l = u(rng);
  return out;
}

}  // namespace testing_support
