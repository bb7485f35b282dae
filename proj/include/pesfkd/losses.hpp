// SPDX-License-Identifier: Apache-2.0
//
// Scalar training objectives. Every batch reduction is a mean over rows, so
// loss scale does not depend on batch size.
#pragma once

#include "pesfkd/tensor.hpp"

namespace pesfkd {

/// Floor applied to probabilities inside every log: log p >= log(1e-12).
inline constexpr double kProbabilityFloor = 1e-12;

/// Row-wise softmax(z / tau) with its log, kept together so that logs are
/// taken in the stable log-softmax domain.
template <class T>
struct SoftTarget {
  Tensor<T> probs;
  Tensor<T> log_probs;
  double tau = 1.0;

  /// Wraps explicit probabilities (log computed with the floor).
  static SoftTarget from_probabilities(const Tensor<T>& probs);
};

struct LossWeights {
  double alpha = 0.9;                // KD weight in the student objective
  double teacher_task_weight = 0.5;  // multiplier on the teacher's own task loss
  double smoothing = 0.0;            // label smoothing of the student's task target

  /// Throws ParameterError when a weight leaves its range.
  void validate() const;
};

/// Throws ParameterError for tau <= 0.
template <class T>
SoftTarget<T> tempered_softmax(const Tensor<T>& logits, double tau);

/// Mean over rows of -sum_k y_k log max(p_k, 1e-12). Rows of y must sum to 1.
template <class T>
Tensor<T> cross_entropy(const Tensor<T>& targets, const SoftTarget<T>& predicted);

/// y (1 - a) + a / K. Throws ParameterError unless 0 <= a <= 1.
template <class T>
Tensor<T> label_smooth(const Tensor<T>& one_hot, double smoothing);

/// tau^2 * mean over rows of KL(p_teacher(tau) || p_student(tau)).
/// With detach_teacher the teacher logits are treated as constants.
template <class T>
Tensor<T> kd_kl_loss(const Tensor<T>& student_logits, const Tensor<T>& teacher_logits, double tau,
                     bool detach_teacher = false);

/// alpha * KD + (1 - alpha) * CE(smoothed y, softmax(z_s)). Teacher logits
/// are detached: this objective only ever moves the student.
template <class T>
Tensor<T> student_loss(const Tensor<T>& student_logits, const Tensor<T>& teacher_logits,
                       const Tensor<T>& one_hot, const LossWeights& w, double tau);

/// w_t * CE(y, softmax(z_t)) plus, with feedback, alpha * KD(z_s, z_t) whose
/// gradient reaches only the teacher logits.
template <class T>
Tensor<T> teacher_loss(const Tensor<T>& teacher_logits, const Tensor<T>& student_logits,
                       const Tensor<T>& one_hot, const LossWeights& w, double tau, bool feedback);

}  // namespace pesfkd
