// SPDX-License-Identifier: Apache-2.0
#include "pesfkd/diagnostics.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

namespace pesfkd {

namespace {

using MatD = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <class T>
MatD to_matrix(const Tensor<T>& t, const char* what) {
  if (t.rank() != 2) throw DimensionError(std::string(what) + ": expected a matrix, got " + shape_str(t.shape()));
  MatD m(t.shape()[0], t.shape()[1]);
  const auto d = t.data();
  for (std::size_t i = 0; i < d.size(); ++i) m.data()[i] = static_cast<double>(d[i]);
  return m;
}

template <class T>
void check_same_logits(const Tensor<T>& a, const Tensor<T>& b, const char* what) {
  if (a.rank() != 2 || a.shape() != b.shape()) {
    throw DimensionError(std::string(what) + ": logit shapes " + shape_str(a.shape()) + " and " +
                         shape_str(b.shape()) + " differ");
  }
}

double row_logsumexp(const double* row, std::size_t k) {
  const double m = *std::max_element(row, row + k);
  double s = 0;
  for (std::size_t j = 0; j < k; ++j) s += std::exp(row[j] - m);
  return m + std::log(s);
}

double mean_of(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / double(v.size());
}

}  // namespace

template <class T>
std::vector<double> sharpness(const Tensor<T>& logits) {
  const MatD z = to_matrix(logits, "sharpness");
  std::vector<double> out(z.rows());
  for (Eigen::Index r = 0; r < z.rows(); ++r) out[r] = row_logsumexp(z.row(r).data(), z.cols());
  return out;
}

template <class T>
LogitStats logit_stats(const Tensor<T>& logits) {
  const MatD z = to_matrix(logits, "logit_stats");
  const auto n = static_cast<std::size_t>(z.rows());
  const auto k = static_cast<std::size_t>(z.cols());
  LogitStats s;
  s.sharpness = sharpness(logits);
  s.variance.resize(n);
  s.logit_mean.resize(n);
  s.major_logit.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    const double* row = z.row(r).data();
    double sum = 0, sq = 0;
    for (std::size_t j = 0; j < k; ++j) {
      sum += row[j];
      sq += row[j] * row[j];
    }
    s.logit_mean[r] = sum / double(k);
    s.variance[r] = sq / double(k);
    s.major_logit[r] = *std::max_element(row, row + k);
  }
  s.sharpness_mean = mean_of(s.sharpness);
  double var = 0;
  for (double x : s.sharpness) var += (x - s.sharpness_mean) * (x - s.sharpness_mean);
  s.sharpness_std = n > 1 ? std::sqrt(var / double(n - 1)) : 0.0;
  s.variance_mean = mean_of(s.variance);
  double abs_mean = 0;
  for (double m : s.logit_mean) abs_mean += std::abs(m);
  s.abs_logit_mean = n ? abs_mean / double(n) : 0.0;
  return s;
}

template <class T>
double sharpness_gap(const Tensor<T>& teacher_logits, const Tensor<T>& student_logits) {
  check_same_logits(teacher_logits, student_logits, "sharpness_gap");
  const auto st = sharpness(teacher_logits);
  const auto ss = sharpness(student_logits);
  double g = 0;
  for (std::size_t i = 0; i < st.size(); ++i) g += st[i] - ss[i];
  return g / double(st.size());
}

template <class T>
GapApproximation gap_variance_approx(const Tensor<T>& teacher_logits, const Tensor<T>& student_logits) {
  check_same_logits(teacher_logits, student_logits, "gap_variance_approx");
  const auto t = logit_stats(teacher_logits);
  const auto s = logit_stats(student_logits);
  GapApproximation out;
  double approx = 0;
  for (std::size_t i = 0; i < t.variance.size(); ++i) {
    approx += std::log1p(0.5 * t.variance[i]) - std::log1p(0.5 * s.variance[i]);
  }
  out.approx = approx / double(t.variance.size());
  out.exact = sharpness_gap(teacher_logits, student_logits);
  out.abs_error = std::abs(out.approx - out.exact);
  out.abs_logit_mean_teacher = t.abs_logit_mean;
  out.abs_logit_mean_student = s.abs_logit_mean;
  return out;
}

template <class T>
double kl_consistency(const Tensor<T>& teacher_logits, const Tensor<T>& student_logits, double tau) {
  if (!(tau > 0)) throw ParameterError("temperature must be positive");
  check_same_logits(teacher_logits, student_logits, "kl_consistency");
  const MatD zt = to_matrix(teacher_logits, "kl_consistency") / tau;
  const MatD zs = to_matrix(student_logits, "kl_consistency") / tau;
  const auto k = static_cast<std::size_t>(zt.cols());
  double total = 0;
  for (Eigen::Index r = 0; r < zt.rows(); ++r) {
    const double lt = row_logsumexp(zt.row(r).data(), k);
    const double ls = row_logsumexp(zs.row(r).data(), k);
    for (std::size_t j = 0; j < k; ++j) {
      const double log_pt = zt(r, j) - lt;
      const double log_ps = zs(r, j) - ls;
      total += std::exp(log_pt) * (log_pt - log_ps);
    }
  }
  return total / double(zt.rows());
}

template <class T>
double linear_cka(const Tensor<T>& x, const Tensor<T>& y) {
  MatD xc = to_matrix(x, "linear_cka");
  MatD yc = to_matrix(y, "linear_cka");
  if (xc.rows() != yc.rows()) {
    throw DimensionError("linear_cka: row counts " + std::to_string(xc.rows()) + " and " +
                         std::to_string(yc.rows()) + " differ");
  }
  if (xc.rows() < 2) throw DimensionError("linear_cka needs at least two rows");
  const double x_scale = xc.norm();
  const double y_scale = yc.norm();
  xc.rowwise() -= xc.colwise().mean();
  yc.rowwise() -= yc.colwise().mean();
  // Centring identical rows leaves only rounding noise; treat it as zero.
  if (xc.norm() <= 1e-12 * x_scale || x_scale == 0 || yc.norm() <= 1e-12 * y_scale || y_scale == 0) {
    throw DegenerateInputError("linear_cka: input matrix has no variance across rows");
  }
  const double cross = (yc.transpose() * xc).squaredNorm();
  const double xx = (xc.transpose() * xc).norm();
  const double yy = (yc.transpose() * yc).norm();
  return cross / (xx * yy);
}

Histogram histogram(std::span<const double> values, std::size_t bins, double lo, double hi) {
  if (bins == 0 || !(hi > lo)) throw ParameterError("histogram needs bins > 0 and hi > lo");
  Histogram h{lo, hi, std::vector<std::size_t>(bins, 0)};
  const double width = (hi - lo) / double(bins);
  for (double v : values) {
    long idx = std::isnan(v) ? 0 : static_cast<long>(std::floor((v - lo) / width));
    idx = std::clamp(idx, 0L, static_cast<long>(bins) - 1);
    ++h.counts[static_cast<std::size_t>(idx)];
  }
  return h;
}

template <class T>
void export_penultimate(const Tensor<T>& features, std::span<const int> labels, const std::filesystem::path& path) {
  if (features.rank() != 2 || features.shape()[0] != labels.size()) {
    throw DimensionError("export_penultimate: " + std::to_string(labels.size()) + " labels for features " +
                         shape_str(features.shape()));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FileError("cannot open '" + path.string() + "' for writing");
  const std::size_t n = features.shape()[0];
  const std::size_t d = features.shape()[1];
  out << "label";
  for (std::size_t j = 0; j < d; ++j) out << ",f" << j;
  out << '\n';
  const auto v = features.data();
  char buf[64];
  for (std::size_t i = 0; i < n; ++i) {
    out << labels[i];
    for (std::size_t j = 0; j < d; ++j) {
      auto res = std::to_chars(buf, buf + sizeof buf, static_cast<double>(v[i * d + j]), std::chars_format::fixed, 9);
      out << ',' << std::string_view(buf, res.ptr - buf);
    }
    out << '\n';
  }
  if (!out) throw FileError("write to '" + path.string() + "' failed");
}

#define PESFKD_INSTANTIATE(T)                                                                     \
  template std::vector<double> sharpness(const Tensor<T>&);                                      \
  template LogitStats logit_stats(const Tensor<T>&);                                             \
  template double sharpness_gap(const Tensor<T>&, const Tensor<T>&);                             \
  template GapApproximation gap_variance_approx(const Tensor<T>&, const Tensor<T>&);             \
  template double kl_consistency(const Tensor<T>&, const Tensor<T>&, double);                    \
  template double linear_cka(const Tensor<T>&, const Tensor<T>&);                                \
  template void export_penultimate(const Tensor<T>&, std::span<const int>, const std::filesystem::path&);

PESFKD_INSTANTIATE(float)
PESFKD_INSTANTIATE(double)

#undef PESFKD_INSTANTIATE

}  // namespace pesfkd
