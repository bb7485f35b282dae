// SPDX-License-Identifier: Apache-2.0
#include "pesfkd/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

namespace pesfkd {

static_assert(std::endian::native == std::endian::little, "checkpoint payload assumes a little-endian host");
static_assert(std::numeric_limits<float>::is_iec559 && std::numeric_limits<double>::is_iec559);

using nlohmann::json;

namespace {

constexpr std::string_view kFormat = "pesfkd-checkpoint/1";

template <class T>
constexpr Precision precision_of() {
  return std::is_same_v<T, float> ? Precision::f32 : Precision::f64;
}

std::size_t element_size(Precision p) { return p == Precision::f32 ? 4 : 8; }

}  // namespace

template <class T>
std::vector<unsigned char> parameter_bytes(const ParameterSet<T>& params,
                                           const std::function<bool(std::string_view)>& select) {
  std::vector<unsigned char> out;
  for (const auto& e : params) {
    if (!select(e.name)) continue;
    const auto d = e.tensor.data();
    const auto* bytes = reinterpret_cast<const unsigned char*>(d.data());
    out.insert(out.end(), bytes, bytes + d.size_bytes());
  }
  return out;
}

json Checkpoint::manifest() const {
  json params_json = json::array();
  for (const auto& p : params) {
    params_json.push_back({{"name", p.name}, {"shape", p.shape}, {"frozen", p.frozen}});
  }
  return {{"format", kFormat},
          {"precision", std::string(to_string(precision))},
          {"model", to_json(model)},
          {"adapter", adapter ? to_json(*adapter) : json(nullptr)},
          {"config_hash", config_hash},
          {"config", config},
          {"params", params_json},
          {"payload_bytes", payload.size()},
          {"payload_sha256", sha256_hex(payload)}};
}

template <class T>
Checkpoint make_checkpoint(const Network<T>& net, const DistillConfig* config) {
  Checkpoint c;
  c.precision = precision_of<T>();
  c.model = net.mlp.spec();
  c.adapter = net.adapter;
  if (config) {
    c.config = to_json(*config);
    c.config_hash = config_hash(*config);
  }
  for (const auto& e : net.mlp.params()) c.params.push_back({e.name, e.tensor.shape(), e.frozen});
  c.payload = parameter_bytes(net.mlp.params(), [](std::string_view) { return true; });
  return c;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FileError("cannot open '" + path.string() + "' for writing");
  out << ckpt.manifest().dump() << '\n';
  out.write(reinterpret_cast<const char*>(ckpt.payload.data()), static_cast<std::streamsize>(ckpt.payload.size()));
  if (!out) throw FileError("write to '" + path.string() + "' failed");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError("cannot open checkpoint '" + path.string() + "'");
  std::string header;
  if (!std::getline(in, header)) throw ParseError("checkpoint '" + path.string() + "' has no manifest line");
  json m;
  try {
    m = json::parse(header);
  } catch (const json::parse_error& e) {
    throw ParseError("checkpoint manifest: " + std::string(e.what()));
  }
  Checkpoint c;
  try {
    if (m.at("format").get<std::string>() != kFormat) throw CompatibilityError("unsupported checkpoint format");
    c.precision = parse_precision(m.at("precision").get<std::string>());
    c.model = model_spec_from_json(m.at("model"));
    if (!m.at("adapter").is_null()) c.adapter = adapter_spec_from_json(m.at("adapter"), c.model.hidden_dims);
    c.config_hash = m.at("config_hash").get<std::string>();
    c.config = m.at("config");
    for (const auto& p : m.at("params")) {
      c.params.push_back({p.at("name").get<std::string>(), p.at("shape").get<Shape>(), p.at("frozen").get<bool>()});
    }
  } catch (const json::exception& e) {
    throw ParseError("checkpoint manifest: " + std::string(e.what()));
  }
  c.payload.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());

  std::size_t expected = 0;
  for (const auto& p : c.params) expected += shape_numel(p.shape) * element_size(c.precision);
  if (c.payload.size() != expected || c.payload.size() != m.value("payload_bytes", std::size_t{0})) {
    throw CompatibilityError("checkpoint payload holds " + std::to_string(c.payload.size()) + " bytes, manifest implies " +
                             std::to_string(expected));
  }
  if (sha256_hex(c.payload) != m.value("payload_sha256", std::string{})) {
    throw CompatibilityError("checkpoint payload checksum mismatch");
  }
  return c;
}

template <class T>
Network<T> restore_network(const Checkpoint& ckpt) {
  if (ckpt.precision != precision_of<T>()) {
    throw CompatibilityError("checkpoint precision is " + std::string(to_string(ckpt.precision)) + ", expected " +
                             std::string(to_string(precision_of<T>())));
  }
  Network<T> net{Mlp<T>(ckpt.model), ckpt.adapter};
  if (ckpt.adapter) attach(net.mlp, *ckpt.adapter, 0);
  auto& params = net.mlp.params();
  if (params.size() != ckpt.params.size()) {
    throw CompatibilityError("checkpoint lists " + std::to_string(ckpt.params.size()) + " parameters, model has " +
                             std::to_string(params.size()));
  }
  std::size_t offset = 0;
  for (std::size_t i = 0; i < ckpt.params.size(); ++i) {
    const auto& p = ckpt.params[i];
    const auto& e = params.entries()[i];
    if (e.name != p.name || e.tensor.shape() != p.shape) {
      throw CompatibilityError("checkpoint parameter " + p.name + shape_str(p.shape) + " does not match model " +
                               e.name + shape_str(e.tensor.shape()));
    }
    Tensor<T> t = e.tensor;
    auto dst = t.mutable_data();
    std::memcpy(dst.data(), ckpt.payload.data() + offset, dst.size_bytes());
    offset += dst.size_bytes();
    params.set_frozen(p.name, p.frozen);
  }
  return net;
}

template Checkpoint make_checkpoint(const Network<float>&, const DistillConfig*);
template Checkpoint make_checkpoint(const Network<double>&, const DistillConfig*);
template Network<float> restore_network(const Checkpoint&);
template Network<double> restore_network(const Checkpoint&);
template std::vector<unsigned char> parameter_bytes(const ParameterSet<float>&,
                                                    const std::function<bool(std::string_view)>&);
template std::vector<unsigned char> parameter_bytes(const ParameterSet<double>&,
                                                    const std::function<bool(std::string_view)>&);

}  // namespace pesfkd
