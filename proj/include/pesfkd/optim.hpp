// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

#include "pesfkd/parameter_set.hpp"

namespace pesfkd {

/// SGD with classical momentum and L2 weight decay:
///   v <- m v + (g + wd theta);  theta <- theta - lr v
/// Frozen parameters are skipped entirely. Gradients are zeroed after the step.
template <class T>
class Sgd {
 public:
  Sgd(double momentum, double weight_decay) : momentum_(momentum), weight_decay_(weight_decay) {}

  void step(ParameterSet<T>& params, double lr);

 private:
  double momentum_;
  double weight_decay_;
  std::unordered_map<std::string, std::vector<T>> velocity_;
};

/// base_lr * decay^(number of milestones <= epoch). Milestones must ascend.
double lr_schedule(double base_lr, std::size_t epoch, const std::vector<std::size_t>& milestones, double decay);

}  // namespace pesfkd
