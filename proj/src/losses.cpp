// SPDX-License-Identifier: Apache-2.0
#include "pesfkd/losses.hpp"

#include <cmath>
#include <sstream>

namespace pesfkd {

namespace {

template <class T>
Tensor<T> floored_log_probs(const Tensor<T>& log_probs) {
  return clamp_min(log_probs, static_cast<T>(std::log(kProbabilityFloor)));
}

template <class T>
void check_matrix_pair(const Tensor<T>& a, const Tensor<T>& b, const char* what) {
  if (a.rank() != 2 || a.shape() != b.shape()) {
    throw DimensionError(std::string(what) + ": shapes " + shape_str(a.shape()) + " and " + shape_str(b.shape()) +
                         " differ");
  }
}

}  // namespace

void LossWeights::validate() const {
  if (!(alpha >= 0 && alpha <= 1)) throw ParameterError("alpha must lie in [0, 1]");
  if (!(teacher_task_weight >= 0)) throw ParameterError("teacher_task_weight must be non-negative");
  if (!(smoothing >= 0 && smoothing <= 1)) throw ParameterError("label smoothing must lie in [0, 1]");
}

template <class T>
SoftTarget<T> SoftTarget<T>::from_probabilities(const Tensor<T>& probs) {
  Tensor<T> floored = clamp_min(probs, static_cast<T>(kProbabilityFloor));
  return SoftTarget{probs, log(floored), 1.0};
}

template <class T>
SoftTarget<T> tempered_softmax(const Tensor<T>& logits, double tau) {
  if (!(tau > 0)) throw ParameterError("temperature must be positive");
  Tensor<T> lp = log_softmax(tau == 1.0 ? logits : scale(logits, static_cast<T>(1.0 / tau)));
  return SoftTarget<T>{exp(lp), lp, tau};
}

template <class T>
Tensor<T> cross_entropy(const Tensor<T>& targets, const SoftTarget<T>& predicted) {
  check_matrix_pair(targets, predicted.log_probs, "cross_entropy");
  const std::size_t rows = targets.shape()[0];
  const std::size_t cols = targets.shape()[1];
  const auto y = targets.data();
  const double tol = std::is_same_v<T, float> ? 1e-5 : 1e-9;
  for (std::size_t r = 0; r < rows; ++r) {
    double s = 0;
    for (std::size_t c = 0; c < cols; ++c) s += y[r * cols + c];
    if (std::abs(s - 1.0) > tol * double(cols)) {
      std::ostringstream os;
      os << "cross_entropy: target row " << r << " sums to " << s;
      throw ContractError(os.str());
    }
  }
  Tensor<T> per_entry = mul(targets, floored_log_probs(predicted.log_probs));
  return scale(sum(per_entry), static_cast<T>(-1.0 / double(rows)));
}

template <class T>
Tensor<T> label_smooth(const Tensor<T>& one_hot, double smoothing) {
  if (!(smoothing >= 0 && smoothing <= 1)) throw ParameterError("label smoothing must lie in [0, 1]");
  if (one_hot.rank() != 2) throw DimensionError("label_smooth expects batch x K targets");
  const double k = double(one_hot.shape()[1]);
  std::vector<T> out(one_hot.data().begin(), one_hot.data().end());
  if (smoothing == 0) return Tensor<T>(one_hot.shape(), std::move(out));
  for (auto& v : out) v = static_cast<T>(double(v) * (1 - smoothing) + smoothing / k);
  return Tensor<T>(one_hot.shape(), std::move(out));
}

template <class T>
Tensor<T> kd_kl_loss(const Tensor<T>& student_logits, const Tensor<T>& teacher_logits, double tau,
                     bool detach_teacher) {
  check_matrix_pair(student_logits, teacher_logits, "kd_kl_loss");
  const Tensor<T> zt = detach_teacher ? teacher_logits.detach() : teacher_logits;
  const auto pt = tempered_softmax(zt, tau);
  const auto ps = tempered_softmax(student_logits, tau);
  Tensor<T> diff = sub(floored_log_probs(pt.log_probs), floored_log_probs(ps.log_probs));
  Tensor<T> kl_sum = sum(mul(pt.probs, diff));
  const double rows = double(student_logits.shape()[0]);
  return scale(kl_sum, static_cast<T>(tau * tau / rows));
}

template <class T>
Tensor<T> student_loss(const Tensor<T>& student_logits, const Tensor<T>& teacher_logits,
                       const Tensor<T>& one_hot, const LossWeights& w, double tau) {
  w.validate();
  Tensor<T> kd = kd_kl_loss(student_logits, teacher_logits, tau, /*detach_teacher=*/true);
  Tensor<T> task = cross_entropy(label_smooth(one_hot, w.smoothing), tempered_softmax(student_logits, 1.0));
  return add(scale(kd, static_cast<T>(w.alpha)), scale(task, static_cast<T>(1.0 - w.alpha)));
}

template <class T>
Tensor<T> teacher_loss(const Tensor<T>& teacher_logits, const Tensor<T>& student_logits,
                       const Tensor<T>& one_hot, const LossWeights& w, double tau, bool feedback) {
  w.validate();
  Tensor<T> loss =
      scale(cross_entropy(one_hot, tempered_softmax(teacher_logits, 1.0)), static_cast<T>(w.teacher_task_weight));
  if (feedback) {
    Tensor<T> kd = kd_kl_loss(student_logits.detach(), teacher_logits, tau);
    loss = add(loss, scale(kd, static_cast<T>(w.alpha)));
  }
  return loss;
}

#define PESFKD_INSTANTIATE(T)                                                                              \
  template struct SoftTarget<T>;                                                                           \
  template SoftTarget<T> tempered_softmax(const Tensor<T>&, double);                                       \
  template Tensor<T> cross_entropy(const Tensor<T>&, const SoftTarget<T>&);                                \
  template Tensor<T> label_smooth(const Tensor<T>&, double);                                               \
  template Tensor<T> kd_kl_loss(const Tensor<T>&, const Tensor<T>&, double, bool);                         \
  template Tensor<T> student_loss(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, const LossWeights&, \
                                  double);                                                                 \
  template Tensor<T> teacher_loss(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, const LossWeights&, \
                                  double, bool);

PESFKD_INSTANTIATE(float)
PESFKD_INSTANTIATE(double)

#undef PESFKD_INSTANTIATE

}  // namespace pesfkd
