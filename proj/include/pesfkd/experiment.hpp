// SPDX-License-Identifier: Apache-2.0
//
// Experiment engine: teacher pre-training, the three distillation regimes,
// multi-seed comparison and one-shot diagnostics.
#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "pesfkd/checkpoint.hpp"
#include "pesfkd/config.hpp"
#include "pesfkd/data.hpp"
#include "pesfkd/metrics.hpp"

namespace pesfkd {

/// Train/eval split of a dataset, standardised with train statistics when
/// the config asks for it.
struct PreparedData {
  Dataset train;
  Dataset eval;
};

/// Source "synthetic" draws from the configured generator; anything else is
/// read as a CSV path.
PreparedData prepare_data(const DataConfig& data, std::size_t num_classes);

inline constexpr std::string_view kTeacherMetricsHeader = "epoch,train_loss,train_acc,eval_acc,sharpness";

/// Trains a fresh teacher on the task loss alone.
template <class T>
Network<T> train_teacher(const DistillConfig& config, const PreparedData& data, MetricsWriter* metrics = nullptr);

struct DistillOptions {
  MetricsWriter* metrics = nullptr;
  /// Stop after this many optimiser steps (0 = run every epoch).
  std::size_t max_steps = 0;
};

template <class T>
struct DistillResult {
  Network<T> teacher;
  Network<T> student;
  std::vector<MetricsRecord> records;
};

/// Joint teacher/student training. Per step: one shared forward through both
/// networks, the student is updated on its objective, then the teacher on
/// teacher_loss (skipped in the vanilla regime). Diagnostics run on the eval
/// split after every epoch. The teacher must come without adapters; in the
/// adapter regime they are attached here. Throws CompatibilityError when the
/// teacher does not match config.teacher.
template <class T>
DistillResult<T> distill(const DistillConfig& config, Network<T> teacher, const PreparedData& data,
                         const DistillOptions& options = {});

/// Evaluation-split statistics for a teacher/student pair at step `epoch`.
template <class T>
MetricsRecord evaluate_pair(const Network<T>& teacher, const Network<T>& student, const Dataset& eval, double tau);

template <class T>
double accuracy(const Tensor<T>& logits, const std::vector<int>& labels);

// ---------------------------------------------------------------------------
// Command-level entry points (precision dispatched from the config/checkpoint).

void run_train_teacher(const DistillConfig& config, const std::filesystem::path& out,
                       const std::filesystem::path& metrics);

void run_distill(const DistillConfig& config, const std::filesystem::path& teacher_ckpt,
                 const std::filesystem::path& out, const std::filesystem::path& metrics,
                 const std::optional<std::filesystem::path>& teacher_out = std::nullopt);

struct ConfigSummary {
  std::string name;
  Regime regime = Regime::vanilla;
  std::string adapter_kind;  // "-" outside the adapter regime
  std::size_t runs = 0;
  double student_acc_mean = 0, student_acc_std = 0;
  double teacher_acc_mean = 0, teacher_acc_std = 0;
  double gap_mean = 0, gap_std = 0;
  double abs_gap_mean = 0, abs_gap_std = 0;
  double gap_approx_mean = 0;
  double kl_t1_mean = 0, kl_t1_std = 0;
  double kl_ttrain_mean = 0, kl_ttrain_std = 0;
  double cka_logits_mean = 0, cka_logits_std = 0;
  double cka_penult_mean = 0, cka_penult_std = 0;
  std::size_t trainable_t = 0;
  std::size_t total_t = 0;
  std::size_t trainable_s = 0;
};

struct RunResult {
  std::string config_name;
  std::uint64_t seed = 0;
  MetricsRecord final;
  std::size_t total_t = 0;
  double wall_clock_s = 0;
};

struct CompareResult {
  std::vector<ConfigSummary> rows;
  std::vector<RunResult> runs;
};

inline constexpr std::string_view kSummaryHeader =
    "config,regime,adapter_kind,runs,student_acc_mean,student_acc_std,teacher_acc_mean,teacher_acc_std,gap_mean,"
    "gap_std,abs_gap_mean,abs_gap_std,gap_approx_mean,kl_t1_mean,kl_t1_std,kl_ttrain_mean,kl_ttrain_std,"
    "cka_logits_mean,cka_logits_std,cka_penult_mean,cka_penult_std,trainable_t,total_t,trainable_ratio_t,"
    "trainable_s";

struct CompareOptions {
  std::size_t seeds = 5;
  /// Adds per-run wall-clock seconds to report.json under "non_normative".
  bool record_wall_clock = false;
  /// Writes runs/<config>_seed<k>.csv next to the summary.
  bool write_run_metrics = true;
};

/// Runs every (config, seed) pair, seed k using config.seed + k, and writes
/// summary.csv and report.json into out_dir. Pre-trained teachers are shared
/// between configs that agree on teacher, data and pre-training settings.
/// On a failed run a partial report is written before the error propagates.
CompareResult compare(const std::vector<DistillConfig>& configs, const std::filesystem::path& out_dir,
                      const CompareOptions& options = {});

struct DiagnoseOptions {
  std::optional<double> tau;  // defaults to the checkpoint config's tau, else 4
  std::size_t bins = 50;
  double hist_lo = -10.0;
  double hist_hi = 40.0;
  std::optional<std::filesystem::path> penultimate_prefix;
};

/// One-shot consistency report on the eval split.
nlohmann::json diagnose(const Checkpoint& teacher, const Checkpoint& student, const PreparedData& data,
                        const DiagnoseOptions& options = {});

/// Data config stored in a checkpoint, or defaults when it carries none.
DistillConfig config_of(const Checkpoint& ckpt);

}  // namespace pesfkd
