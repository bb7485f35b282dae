// SPDX-License-Identifier: Apache-2.0
#include "pesfkd/adapters.hpp"

#include <cmath>
#include <random>
#include <set>

namespace pesfkd {

std::string_view to_string(AdapterKind k) {
  switch (k) {
    case AdapterKind::sequential:
      return "sequential";
    case AdapterKind::low_rank_parallel:
      return "low_rank_parallel";
    case AdapterKind::scaled_parallel:
      return "scaled_parallel";
  }
  return "?";
}

AdapterKind parse_adapter_kind(std::string_view s) {
  if (s == "sequential") return AdapterKind::sequential;
  if (s == "low_rank_parallel") return AdapterKind::low_rank_parallel;
  if (s == "scaled_parallel") return AdapterKind::scaled_parallel;
  throw SpecError("unknown adapter kind '" + std::string(s) + "'");
}

void AdapterSpec::validate(std::span<const std::size_t> hidden_widths) const {
  if (bottleneck == 0) throw SpecError("adapter bottleneck must be positive");
  if (kind == AdapterKind::scaled_parallel && !(scaling > 0)) {
    throw SpecError("scaled_parallel adapter needs scaling > 0");
  }
  std::set<std::size_t> seen;
  for (auto p : insertion_points) {
    if (p >= hidden_widths.size()) {
      throw SpecError("adapter insertion point " + std::to_string(p) + " is not a hidden layer (network has " +
                      std::to_string(hidden_widths.size()) + ")");
    }
    if (!seen.insert(p).second) throw SpecError("duplicate adapter insertion point " + std::to_string(p));
    if (bottleneck >= hidden_widths[p]) {
      throw SpecError("adapter bottleneck " + std::to_string(bottleneck) + " is not below layer width " +
                      std::to_string(hidden_widths[p]));
    }
  }
}

std::string adapter_down_name(std::size_t point) {
  return std::string(kAdapterPrefix) + std::to_string(point) + ".down";
}
std::string adapter_up_name(std::size_t point) {
  return std::string(kAdapterPrefix) + std::to_string(point) + ".up";
}

bool is_adapter_param(std::string_view name) { return name.starts_with(kAdapterPrefix); }

std::size_t adapter_param_count(const AdapterSpec& spec, std::span<const std::size_t> hidden_widths) {
  std::size_t n = 0;
  for (auto p : spec.insertion_points) n += 2 * hidden_widths[p] * spec.bottleneck;
  return n;
}

template <class T>
Tensor<T> adapter_forward(const Tensor<T>& h, const Tensor<T>& w_down, const Tensor<T>& w_up,
                          const AdapterSpec& spec) {
  if (h.rank() != 2 || w_down.rank() != 2 || h.shape()[1] != w_down.shape()[0]) {
    throw DimensionError("adapter: input " + shape_str(h.shape()) + " does not match W_down " +
                         shape_str(w_down.shape()));
  }
  Tensor<T> z = matmul(h, w_down);
  if (spec.kind != AdapterKind::low_rank_parallel) z = activate(z, spec.activation);
  Tensor<T> branch = matmul(z, w_up);
  if (spec.kind == AdapterKind::scaled_parallel) branch = scale(branch, static_cast<T>(spec.scaling));
  return add(h, branch);
}

template <class T>
void attach(Mlp<T>& teacher, const AdapterSpec& spec, std::uint64_t seed) {
  const auto& widths = teacher.spec().hidden_dims;
  spec.validate(widths);
  if (teacher.has_hidden_hook()) throw SpecError("network already carries adapters");

  auto& params = teacher.params();
  params.set_frozen([](std::string_view) { return true; });

  std::mt19937_64 rng(seed);
  for (auto p : spec.insertion_points) {
    const std::size_t d = widths[p];
    const std::size_t r = spec.bottleneck;
    std::uniform_real_distribution<double> dist(-1.0 / std::sqrt(double(d)), 1.0 / std::sqrt(double(d)));
    std::vector<T> down(d * r);
    for (auto& v : down) v = static_cast<T>(dist(rng));
    params.add(adapter_down_name(p), Tensor<T>({d, r}, std::move(down)));
    params.add(adapter_up_name(p), Tensor<T>::zeros({r, d}));
  }

  std::vector<bool> active(widths.size(), false);
  for (auto p : spec.insertion_points) active[p] = true;
  teacher.set_hidden_hook([spec, active](const ParameterSet<T>& ps, std::size_t layer, const Tensor<T>& h) {
    if (!active[layer]) return h;
    return adapter_forward(h, ps.get(adapter_down_name(layer)), ps.get(adapter_up_name(layer)), spec);
  });
}

template Tensor<float> adapter_forward(const Tensor<float>&, const Tensor<float>&, const Tensor<float>&,
                                       const AdapterSpec&);
template Tensor<double> adapter_forward(const Tensor<double>&, const Tensor<double>&, const Tensor<double>&,
                                        const AdapterSpec&);
template void attach(Mlp<float>&, const AdapterSpec&, std::uint64_t);
template void attach(Mlp<double>&, const AdapterSpec&, std::uint64_t);

}  // namespace pesfkd
