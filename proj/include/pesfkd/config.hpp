// SPDX-License-Identifier: Apache-2.0
//
// Experiment configuration. The JSON form mirrors the struct field names in
// snake_case; unknown keys are rejected at every nesting level.
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "pesfkd/adapters.hpp"
#include "pesfkd/data.hpp"
#include "pesfkd/losses.hpp"
#include "pesfkd/nn.hpp"

namespace pesfkd {

/// How the teacher is treated during distillation:
/// vanilla keeps it frozen, finetune trains all of it, adapter trains only
/// adapters attached to a frozen backbone.
enum class Regime { vanilla, finetune, adapter };
enum class Precision { f32, f64 };

std::string_view to_string(Regime r);
Regime parse_regime(std::string_view s);
std::string_view to_string(Precision p);
Precision parse_precision(std::string_view s);

struct OptimizerConfig {
  double lr = 0.05;
  double momentum = 0.9;
  double weight_decay = 0.0;
  std::vector<std::size_t> milestones;
  double decay = 0.1;

  bool operator==(const OptimizerConfig&) const = default;
};

struct DataConfig {
  /// "synthetic" or a CSV path.
  std::string source = "synthetic";
  SyntheticSpec synthetic;
  double eval_fraction = 0.2;
  std::uint64_t split_seed = 0;
  bool standardize = true;

  bool operator==(const DataConfig&) const = default;
};

struct DistillConfig {
  std::string name = "run";
  Regime regime = Regime::adapter;
  double tau = 4.0;
  double alpha = 0.9;
  double teacher_task_weight = 0.5;
  bool feedback = true;
  double label_smoothing = 0.0;
  std::size_t epochs = 100;
  std::size_t batch_size = 64;
  std::uint64_t seed = 0;
  Precision precision = Precision::f32;

  OptimizerConfig student_optimizer{0.05, 0.9, 5e-4, {60, 75, 90}, 0.1};
  OptimizerConfig teacher_optimizer{1e-2, 0.9, 0.0, {60, 75, 90}, 0.1};
  OptimizerConfig pretrain_optimizer{0.05, 0.9, 5e-4, {60, 75, 90}, 0.1};
  std::size_t pretrain_epochs = 100;

  AdapterSpec adapter;  // consulted in the adapter regime only
  ModelSpec teacher{2, {256, 256}, 10, Activation::relu, 0};
  ModelSpec student{2, {32}, 10, Activation::relu, 0};
  DataConfig data;

  LossWeights weights() const { return {alpha, teacher_task_weight, label_smoothing}; }

  // Seeds derived from `seed`; model init_seed fields in the config are ignored.
  std::uint64_t teacher_init_seed() const;
  std::uint64_t student_init_seed() const;
  std::uint64_t adapter_seed() const;
  std::uint64_t shuffle_seed() const;
  std::uint64_t pretrain_shuffle_seed() const;

  /// Cross-field checks. Throws SpecError / ParameterError.
  void validate() const;
};

/// Applies regime-dependent defaults (teacher LR 1e-3 for finetune, 1e-2 for
/// adapter; feedback on except in vanilla, where it is forced off; adapters
/// after every hidden layer when insertion points are not given).
DistillConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const DistillConfig& c);
DistillConfig load_config(const std::filesystem::path& path);

nlohmann::json to_json(const ModelSpec& m);
ModelSpec model_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const AdapterSpec& a);
AdapterSpec adapter_spec_from_json(const nlohmann::json& j, std::span<const std::size_t> hidden_widths);

/// First 16 hex digits of the SHA-256 of the canonical JSON dump.
std::string config_hash(const DistillConfig& c);
std::string sha256_hex(std::span<const unsigned char> bytes);

/// Mixes a seed with a stream tag (splitmix64 finaliser).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace pesfkd
