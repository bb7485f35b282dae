// SPDX-License-Identifier: Apache-2.0
//
// Read-only teacher/student consistency statistics over logit matrices
// (batch x K) and representation matrices (batch x d). All arithmetic is done
// in double regardless of the tensor precision.
#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "pesfkd/tensor.hpp"

namespace pesfkd {

struct LogitStats {
  std::vector<double> sharpness;    // per-row logsumexp
  double sharpness_mean = 0;
  double sharpness_std = 0;
  std::vector<double> variance;     // per-row (1/K) sum z^2, a raw second moment
  double variance_mean = 0;
  std::vector<double> logit_mean;   // per-row (1/K) sum z
  double abs_logit_mean = 0;        // batch mean of |row mean|; zero-mean diagnostic
  std::vector<double> major_logit;  // per-row max
};

template <class T>
LogitStats logit_stats(const Tensor<T>& logits);

/// Per-row logsumexp.
template <class T>
std::vector<double> sharpness(const Tensor<T>& logits);

/// Batch mean of sharpness(teacher) - sharpness(student). Shapes must match.
template <class T>
double sharpness_gap(const Tensor<T>& teacher_logits, const Tensor<T>& student_logits);

struct GapApproximation {
  double approx = 0;  // mean of log(1 + var_t / 2) - log(1 + var_s / 2)
  double exact = 0;   // sharpness_gap
  double abs_error = 0;
  double abs_logit_mean_teacher = 0;  // how far rows are from zero mean
  double abs_logit_mean_student = 0;
};

/// Second-order variance form of the sharpness gap next to the exact value.
/// The zero-mean assumption behind the approximation is reported, not enforced.
template <class T>
GapApproximation gap_variance_approx(const Tensor<T>& teacher_logits, const Tensor<T>& student_logits);

/// Batch-mean KL(p_t(tau) || p_s(tau)) without any tau^2 factor.
template <class T>
double kl_consistency(const Tensor<T>& teacher_logits, const Tensor<T>& student_logits, double tau);

/// Linear CKA with internal column centring:
///   ||Yc' Xc||_F^2 / (||Xc' Xc||_F ||Yc' Yc||_F).
/// Throws DimensionError for n < 2 or differing row counts, and
/// DegenerateInputError when either matrix has no variance.
template <class T>
double linear_cka(const Tensor<T>& x, const Tensor<T>& y);

struct ConsistencyReport {
  double gap = 0;
  double gap_approx = 0;
  double kl = 0;
  double cka_logits = 0;
  double cka_penultimate = 0;
};

/// Fixed-range histogram; values outside [lo, hi) land in the edge bins so
/// the counts always sum to values.size().
struct Histogram {
  double lo = 0;
  double hi = 0;
  std::vector<std::size_t> counts;
};

Histogram histogram(std::span<const double> values, std::size_t bins, double lo, double hi);

/// CSV with header label,f0,...,f{d-1} and one row per sample.
template <class T>
void export_penultimate(const Tensor<T>& features, std::span<const int> labels, const std::filesystem::path& path);

}  // namespace pesfkd
