// SPDX-License-Identifier: Apache-2.0
//
// Checkpoint file layout:
//   line 1   UTF-8 JSON manifest terminated by LF
//   rest     little-endian IEEE-754 parameter values, concatenated in
//            manifest order, 4 bytes each for f32 or 8 bytes for f64
#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "pesfkd/adapters.hpp"
#include "pesfkd/config.hpp"
#include "pesfkd/nn.hpp"

namespace pesfkd {

/// A network together with the adapters spliced into it, if any.
template <class T>
struct Network {
  Mlp<T> mlp;
  std::optional<AdapterSpec> adapter;
};

struct CheckpointParam {
  std::string name;
  Shape shape;
  bool frozen = false;
};

struct Checkpoint {
  Precision precision = Precision::f32;
  ModelSpec model;
  std::optional<AdapterSpec> adapter;
  std::string config_hash;
  nlohmann::json config;  // null when the network was not produced from a config
  std::vector<CheckpointParam> params;
  std::vector<unsigned char> payload;

  nlohmann::json manifest() const;
};

template <class T>
Checkpoint make_checkpoint(const Network<T>& net, const DistillConfig* config);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
/// Throws FileError, ParseError, or CompatibilityError when the payload does
/// not match its manifest.
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Rebuilds the network bit-exactly. Throws CompatibilityError when the
/// checkpoint precision differs from T or the layout does not match the spec.
template <class T>
Network<T> restore_network(const Checkpoint& ckpt);

/// Raw little-endian bytes of the selected parameters, in set order.
template <class T>
std::vector<unsigned char> parameter_bytes(const ParameterSet<T>& params,
                                           const std::function<bool(std::string_view)>& select);

}  // namespace pesfkd
