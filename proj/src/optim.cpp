// SPDX-License-Identifier: Apache-2.0
#include "pesfkd/optim.hpp"

#include <algorithm>

namespace pesfkd {

template <class T>
void Sgd<T>::step(ParameterSet<T>& params, double lr) {
  const T m = static_cast<T>(momentum_);
  const T wd = static_cast<T>(weight_decay_);
  const T rate = static_cast<T>(lr);
  for (const auto& e : params) {
    if (e.frozen) continue;
    Tensor<T> t = e.tensor;
    auto theta = t.mutable_data();
    auto [it, inserted] = velocity_.try_emplace(e.name, theta.size(), T(0));
    auto& v = it->second;
    const auto grad = t.has_grad() ? t.grad() : std::span<const T>{};
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const T g = grad.empty() ? T(0) : grad[i];
      v[i] = m * v[i] + (g + wd * theta[i]);
      theta[i] -= rate * v[i];
    }
    t.zero_grad();
  }
}

double lr_schedule(double base_lr, std::size_t epoch, const std::vector<std::size_t>& milestones, double decay) {
  if (!std::is_sorted(milestones.begin(), milestones.end())) throw ParameterError("lr milestones must ascend");
  double lr = base_lr;
  for (auto m : milestones) {
    if (epoch >= m) lr *= decay;
  }
  return lr;
}

template class Sgd<float>;
template class Sgd<double>;

}  // namespace pesfkd
