// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace pesfkd {

/// One row of the per-epoch distillation log. Accuracies are fractions in [0, 1].
struct MetricsRecord {
  std::size_t epoch = 0;
  double student_task_loss = 0;
  double student_kl_loss = 0;
  double teacher_task_loss = 0;
  double teacher_acc = 0;
  double student_acc = 0;
  double sharp_t = 0;
  double sharp_s = 0;
  double gap = 0;
  double gap_approx = 0;
  double kl_t1 = 0;
  double kl_ttrain = 0;
  double cka_logits = 0;
  double cka_penult = 0;
  std::size_t trainable_t = 0;
  std::size_t trainable_s = 0;
};

inline constexpr std::string_view kMetricsHeader =
    "epoch,student_task_loss,student_kl_loss,teacher_task_loss,teacher_acc,student_acc,sharp_t,sharp_s,gap,"
    "gap_approx,kl_t1,kl_ttrain,cka_logits,cka_penult,trainable_t,trainable_s";

/// Shortest decimal string that round-trips the value; "nan"/"inf" otherwise.
std::string format_number(double v);
std::string to_csv_row(const MetricsRecord& r);

/// Appends rows to a CSV file and flushes after each one.
class MetricsWriter {
 public:
  MetricsWriter(const std::filesystem::path& path, std::string_view header);
  void write_row(const std::string& row);

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

}  // namespace pesfkd
