// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "pesfkd/tensor.hpp"

namespace pesfkd {

enum class Split : std::uint8_t { train, eval };

/// Row-major feature matrix with integer labels in [0, num_classes).
struct Dataset {
  std::size_t num_samples = 0;
  std::size_t feature_dim = 0;
  std::size_t num_classes = 0;
  std::vector<double> features;
  std::vector<int> labels;
  std::vector<Split> split;  // empty until assign_split()

  const double* row(std::size_t i) const { return features.data() + i * feature_dim; }
  bool operator==(const Dataset&) const = default;
};

struct SyntheticSpec {
  std::size_t num_classes = 10;
  std::size_t samples_per_class = 200;
  std::size_t feature_dim = 2;
  double cluster_std = 0.1;
  double overlap = 0.0;  // >= 0; class means are pulled together by 1 / (1 + overlap)
  std::uint64_t seed = 0;

  /// Throws SpecError for non-positive counts, dims or std, or negative overlap.
  void validate() const;
  bool operator==(const SyntheticSpec&) const = default;
};

/// K Gaussian clusters. Class means are drawn uniformly from [-1, 1]^d and
/// scaled by 1 / (1 + overlap); samples add isotropic noise of cluster_std.
/// Samples are emitted class by class.
Dataset generate(const SyntheticSpec& spec);

/// Parses "label,x1,...,xd" rows. A first line whose first cell is not a
/// number is treated as a header. Throws FileError, ParseError (with line
/// number) or RangeError.
Dataset load_csv(const std::filesystem::path& path, std::size_t num_classes);

/// Tags round(n * eval_fraction) samples as eval using a permutation seeded by `seed`.
void assign_split(Dataset& ds, double eval_fraction, std::uint64_t seed);

/// Rows tagged with `which`, in original order, without split tags.
Dataset subset(const Dataset& ds, Split which);

struct Standardizer {
  std::vector<double> mean;
  std::vector<double> stddev;

  static Standardizer fit(const Dataset& ds);
  /// Columns with zero spread are only centred.
  void apply(Dataset& ds) const;
};

/// Deterministic permutation of [0, n) derived from (seed, epoch), cut into
/// consecutive batches; the last partial batch is kept.
std::vector<std::vector<std::size_t>> batch_indices(std::size_t n, std::size_t batch_size, std::uint64_t seed,
                                                    std::size_t epoch);

template <class T>
struct Batch {
  Tensor<T> features;  // b x d
  Tensor<T> one_hot;   // b x K
  std::vector<int> labels;
};

template <class T>
Batch<T> make_batch(const Dataset& ds, const std::vector<std::size_t>& indices);

template <class T>
Batch<T> full_batch(const Dataset& ds);

template <class T>
std::vector<Batch<T>> batches(const Dataset& ds, std::size_t batch_size, std::uint64_t shuffle_seed,
                              std::size_t epoch) {
  std::vector<Batch<T>> out;
  for (const auto& idx : batch_indices(ds.num_samples, batch_size, shuffle_seed, epoch)) {
    out.push_back(make_batch<T>(ds, idx));
  }
  return out;
}

}  // namespace pesfkd
