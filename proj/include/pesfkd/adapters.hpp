// SPDX-License-Identifier: Apache-2.0
//
// Bottleneck adapters spliced into a frozen teacher. Each adapter maps a
// hidden activation h (batch x d) through a rank-r residual branch:
//
//   sequential:         h + f(h W_down) W_up
//   low_rank_parallel:  h + (h W_down) W_up
//   scaled_parallel:    h + s * f(h W_down) W_up
//
// W_down is d x r, W_up is r x d, neither has a bias. W_up starts at zero so a
// freshly attached adapter is exactly the identity.
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pesfkd/nn.hpp"

namespace pesfkd {

enum class AdapterKind { sequential, low_rank_parallel, scaled_parallel };

std::string_view to_string(AdapterKind k);
AdapterKind parse_adapter_kind(std::string_view s);

struct AdapterSpec {
  AdapterKind kind = AdapterKind::sequential;
  std::size_t bottleneck = 3;
  Activation activation = Activation::relu;
  double scaling = 1.0;  // scaled_parallel only
  std::vector<std::size_t> insertion_points;

  /// Checks r > 0, s > 0 for scaled_parallel, valid and distinct insertion
  /// points, and r < d at every point. Throws SpecError.
  void validate(std::span<const std::size_t> hidden_widths) const;
  bool operator==(const AdapterSpec&) const = default;
};

inline constexpr std::string_view kAdapterPrefix = "adapter";

std::string adapter_down_name(std::size_t point);
std::string adapter_up_name(std::size_t point);
bool is_adapter_param(std::string_view name);

template <class T>
Tensor<T> adapter_forward(const Tensor<T>& h, const Tensor<T>& w_down, const Tensor<T>& w_up,
                          const AdapterSpec& spec);

/// Registers adapter{i}.down / adapter{i}.up for every insertion point,
/// freezes every pre-existing parameter and installs the forward hook.
template <class T>
void attach(Mlp<T>& teacher, const AdapterSpec& spec, std::uint64_t seed);

/// Sum over insertion points of 2 * d_i * r.
std::size_t adapter_param_count(const AdapterSpec& spec, std::span<const std::size_t> hidden_widths);

}  // namespace pesfkd
