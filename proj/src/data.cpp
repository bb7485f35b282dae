// SPDX-License-Identifier: Apache-2.0
#include "pesfkd/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <string>
#include <string_view>

namespace pesfkd {

void SyntheticSpec::validate() const {
  if (num_classes < 2) throw SpecError("synthetic data needs at least two classes");
  if (samples_per_class == 0) throw SpecError("samples_per_class must be positive");
  if (feature_dim == 0) throw SpecError("feature_dim must be positive");
  if (!(cluster_std > 0)) throw SpecError("cluster_std must be positive");
  if (!(overlap >= 0)) throw SpecError("overlap must be non-negative");
}

Dataset generate(const SyntheticSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::normal_distribution<double> noise(0.0, spec.cluster_std);
  const double shrink = 1.0 / (1.0 + spec.overlap);

  std::vector<double> means(spec.num_classes * spec.feature_dim);
  for (auto& m : means) m = unit(rng) * shrink;

  Dataset ds;
  ds.num_samples = spec.num_classes * spec.samples_per_class;
  ds.feature_dim = spec.feature_dim;
  ds.num_classes = spec.num_classes;
  ds.features.reserve(ds.num_samples * ds.feature_dim);
  ds.labels.reserve(ds.num_samples);
  for (std::size_t k = 0; k < spec.num_classes; ++k) {
    for (std::size_t i = 0; i < spec.samples_per_class; ++i) {
      for (std::size_t j = 0; j < spec.feature_dim; ++j) {
        ds.features.push_back(means[k * spec.feature_dim + j] + noise(rng));
      }
      ds.labels.push_back(static_cast<int>(k));
    }
  }
  return ds;
}

namespace {

std::vector<std::string_view> split_cells(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && !s.empty();
}

bool parse_int(std::string_view s, long& out) {
  s = trim(s);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && !s.empty();
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path, std::size_t num_classes) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError("cannot open '" + path.string() + "'");
  Dataset ds;
  ds.num_classes = num_classes;
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = trim(line);
    if (view.empty()) continue;
    const auto cells = split_cells(view);
    if (first) {
      first = false;
      double probe;
      if (!parse_double(cells[0], probe)) continue;  // header
    }
    if (cells.size() < 2) {
      throw ParseError("line " + std::to_string(line_no) + ": expected a label and at least one feature");
    }
    if (ds.feature_dim == 0) {
      ds.feature_dim = cells.size() - 1;
    } else if (cells.size() - 1 != ds.feature_dim) {
      throw ParseError("line " + std::to_string(line_no) + ": expected " + std::to_string(ds.feature_dim + 1) +
                       " columns, found " + std::to_string(cells.size()));
    }
    long label;
    if (!parse_int(cells[0], label)) {
      throw ParseError("line " + std::to_string(line_no) + ": label '" + std::string(cells[0]) + "' is not an integer");
    }
    if (label < 0 || static_cast<std::size_t>(label) >= num_classes) {
      throw RangeError("line " + std::to_string(line_no) + ": label " + std::to_string(label) + " outside [0, " +
                       std::to_string(num_classes) + ")");
    }
    ds.labels.push_back(static_cast<int>(label));
    for (std::size_t j = 1; j < cells.size(); ++j) {
      double v;
      if (!parse_double(cells[j], v)) {
        throw ParseError("line " + std::to_string(line_no) + ": feature '" + std::string(cells[j]) +
                         "' is not a number");
      }
      ds.features.push_back(v);
    }
  }
  if (ds.labels.empty()) throw ParseError("'" + path.string() + "' contains no data rows");
  ds.num_samples = ds.labels.size();
  return ds;
}

void assign_split(Dataset& ds, double eval_fraction, std::uint64_t seed) {
  if (!(eval_fraction >= 0 && eval_fraction < 1)) throw ParameterError("eval_fraction must lie in [0, 1)");
  std::vector<std::size_t> perm(ds.num_samples);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  const auto n_eval = static_cast<std::size_t>(std::llround(double(ds.num_samples) * eval_fraction));
  ds.split.assign(ds.num_samples, Split::train);
  for (std::size_t i = 0; i < n_eval; ++i) ds.split[perm[i]] = Split::eval;
}

Dataset subset(const Dataset& ds, Split which) {
  if (ds.split.size() != ds.num_samples) throw ContractError("dataset has no split assignment");
  Dataset out;
  out.feature_dim = ds.feature_dim;
  out.num_classes = ds.num_classes;
  for (std::size_t i = 0; i < ds.num_samples; ++i) {
    if (ds.split[i] != which) continue;
    out.features.insert(out.features.end(), ds.row(i), ds.row(i) + ds.feature_dim);
    out.labels.push_back(ds.labels[i]);
  }
  out.num_samples = out.labels.size();
  return out;
}

Standardizer Standardizer::fit(const Dataset& ds) {
  Standardizer s;
  s.mean.assign(ds.feature_dim, 0.0);
  s.stddev.assign(ds.feature_dim, 0.0);
  if (ds.num_samples == 0) return s;
  for (std::size_t i = 0; i < ds.num_samples; ++i) {
    for (std::size_t j = 0; j < ds.feature_dim; ++j) s.mean[j] += ds.row(i)[j];
  }
  for (auto& m : s.mean) m /= double(ds.num_samples);
  for (std::size_t i = 0; i < ds.num_samples; ++i) {
    for (std::size_t j = 0; j < ds.feature_dim; ++j) {
      const double d = ds.row(i)[j] - s.mean[j];
      s.stddev[j] += d * d;
    }
  }
  for (auto& v : s.stddev) v = std::sqrt(v / double(ds.num_samples));
  return s;
}

void Standardizer::apply(Dataset& ds) const {
  if (mean.size() != ds.feature_dim) throw DimensionError("standardizer width does not match dataset");
  for (std::size_t i = 0; i < ds.num_samples; ++i) {
    for (std::size_t j = 0; j < ds.feature_dim; ++j) {
      double& v = ds.features[i * ds.feature_dim + j];
      v -= mean[j];
      if (stddev[j] > 0) v /= stddev[j];
    }
  }
}

std::vector<std::vector<std::size_t>> batch_indices(std::size_t n, std::size_t batch_size, std::uint64_t seed,
                                                    std::size_t epoch) {
  if (batch_size == 0) throw ParameterError("batch_size must be at least 1");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(epoch), static_cast<std::uint32_t>(epoch >> 32)};
  std::mt19937_64 rng(seq);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t start = 0; start < n; start += batch_size) {
    const auto stop = std::min(n, start + batch_size);
    out.emplace_back(perm.begin() + static_cast<std::ptrdiff_t>(start), perm.begin() + static_cast<std::ptrdiff_t>(stop));
  }
  return out;
}

template <class T>
Batch<T> make_batch(const Dataset& ds, const std::vector<std::size_t>& indices) {
  if (indices.empty()) throw ContractError("empty batch");
  const std::size_t b = indices.size();
  std::vector<T> x(b * ds.feature_dim);
  std::vector<T> y(b * ds.num_classes, T(0));
  Batch<T> batch;
  batch.labels.reserve(b);
  for (std::size_t i = 0; i < b; ++i) {
    const auto src = indices[i];
    for (std::size_t j = 0; j < ds.feature_dim; ++j) x[i * ds.feature_dim + j] = static_cast<T>(ds.row(src)[j]);
    y[i * ds.num_classes + static_cast<std::size_t>(ds.labels[src])] = T(1);
    batch.labels.push_back(ds.labels[src]);
  }
  batch.features = Tensor<T>({b, ds.feature_dim}, std::move(x));
  batch.one_hot = Tensor<T>({b, ds.num_classes}, std::move(y));
  return batch;
}

template <class T>
Batch<T> full_batch(const Dataset& ds) {
  std::vector<std::size_t> idx(ds.num_samples);
  std::iota(idx.begin(), idx.end(), 0);
  return make_batch<T>(ds, idx);
}

template Batch<float> make_batch(const Dataset&, const std::vector<std::size_t>&);
template Batch<double> make_batch(const Dataset&, const std::vector<std::size_t>&);
template Batch<float> full_batch(const Dataset&);
template Batch<double> full_batch(const Dataset&);

}  // namespace pesfkd
