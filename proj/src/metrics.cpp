// SPDX-License-Identifier: Apache-2.0
#include "pesfkd/metrics.hpp"

#include <charconv>
#include <cmath>

#include "pesfkd/errors.hpp"

namespace pesfkd {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string to_csv_row(const MetricsRecord& r) {
  std::string row = std::to_string(r.epoch);
  for (double v : {r.student_task_loss, r.student_kl_loss, r.teacher_task_loss, r.teacher_acc, r.student_acc,
                   r.sharp_t, r.sharp_s, r.gap, r.gap_approx, r.kl_t1, r.kl_ttrain, r.cka_logits, r.cka_penult}) {
    row += ',';
    row += format_number(v);
  }
  row += ',' + std::to_string(r.trainable_t) + ',' + std::to_string(r.trainable_s);
  return row;
}

MetricsWriter::MetricsWriter(const std::filesystem::path& path, std::string_view header)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw FileError("cannot open '" + path.string() + "' for writing");
  out_ << header << '\n';
  out_.flush();
}

void MetricsWriter::write_row(const std::string& row) {
  out_ << row << '\n';
  out_.flush();
  if (!out_) throw FileError("write to '" + path_.string() + "' failed");
}

}  // namespace pesfkd
