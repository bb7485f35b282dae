// SPDX-License-Identifier: Apache-2.0
#include "pesfkd/config.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <set>
#include <sstream>

namespace pesfkd {

using nlohmann::json;

std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::vanilla:
      return "vanilla";
    case Regime::finetune:
      return "finetune";
    case Regime::adapter:
      return "adapter";
  }
  return "?";
}

Regime parse_regime(std::string_view s) {
  if (s == "vanilla") return Regime::vanilla;
  if (s == "finetune") return Regime::finetune;
  if (s == "adapter") return Regime::adapter;
  throw SpecError("unknown regime '" + std::string(s) + "' (expected vanilla, finetune or adapter)");
}

std::string_view to_string(Precision p) { return p == Precision::f32 ? "f32" : "f64"; }

Precision parse_precision(std::string_view s) {
  if (s == "f32") return Precision::f32;
  if (s == "f64") return Precision::f64;
  throw SpecError("unknown precision '" + std::string(s) + "' (expected f32 or f64)");
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t DistillConfig::teacher_init_seed() const { return derive_seed(seed, 1); }
std::uint64_t DistillConfig::student_init_seed() const { return derive_seed(seed, 2); }
std::uint64_t DistillConfig::adapter_seed() const { return derive_seed(seed, 3); }
std::uint64_t DistillConfig::shuffle_seed() const { return derive_seed(seed, 4); }
std::uint64_t DistillConfig::pretrain_shuffle_seed() const { return derive_seed(seed, 5); }

namespace {

bool is_count(const nlohmann::json& v) {
  return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
}

// Reads typed fields from a JSON object and rejects keys nobody asked for.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw SpecError(where_ + ": expected a JSON object");
  }

  const json* find(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void read(const char* key, double& out) {
    if (auto* v = find(key)) {
      if (!v->is_number()) fail(key, "a number");
      out = v->get<double>();
    }
  }
  void read(const char* key, std::size_t& out) {
    if (auto* v = find(key)) {
      if (!is_count(*v)) fail(key, "a non-negative integer");
      out = v->get<std::size_t>();
    }
  }
  void read(const char* key, std::uint64_t& out, int) {
    if (auto* v = find(key)) {
      if (!is_count(*v)) fail(key, "a non-negative integer");
      out = v->get<std::uint64_t>();
    }
  }
  void read(const char* key, bool& out) {
    if (auto* v = find(key)) {
      if (!v->is_boolean()) fail(key, "a boolean");
      out = v->get<bool>();
    }
  }
  void read(const char* key, std::string& out) {
    if (auto* v = find(key)) {
      if (!v->is_string()) fail(key, "a string");
      out = v->get<std::string>();
    }
  }
  void read(const char* key, std::vector<std::size_t>& out) {
    if (auto* v = find(key)) {
      if (!v->is_array()) fail(key, "an array of non-negative integers");
      out.clear();
      for (const auto& e : *v) {
        if (!is_count(e)) fail(key, "an array of non-negative integers");
        out.push_back(e.get<std::size_t>());
      }
    }
  }

  std::string path(const char* key) const { return where_ + "." + key; }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.contains(key)) throw SpecError("unknown config key '" + where_ + "." + key + "'");
    }
  }

 private:
  [[noreturn]] void fail(const char* key, const char* expected) const {
    throw SpecError("config key '" + where_ + "." + key + "' must be " + expected);
  }

  const json& j_;
  std::string where_;
  std::set<std::string, std::less<>> seen_;
};

OptimizerConfig optimizer_from_json(const json& j, const std::string& where, OptimizerConfig base) {
  ObjectReader r(j, where);
  r.read("lr", base.lr);
  r.read("momentum", base.momentum);
  r.read("weight_decay", base.weight_decay);
  r.read("milestones", base.milestones);
  r.read("decay", base.decay);
  r.finish();
  return base;
}

json to_json(const OptimizerConfig& o) {
  return {{"lr", o.lr}, {"momentum", o.momentum}, {"weight_decay", o.weight_decay}, {"milestones", o.milestones},
          {"decay", o.decay}};
}

ModelSpec model_from_json(const json& j, const std::string& where, ModelSpec base) {
  ObjectReader r(j, where);
  r.read("input_dim", base.input_dim);
  r.read("hidden_dims", base.hidden_dims);
  r.read("num_classes", base.num_classes);
  std::string act(to_string(base.activation));
  r.read("activation", act);
  base.activation = parse_activation(act);
  r.read("init_seed", base.init_seed, 0);
  r.finish();
  return base;
}

AdapterSpec adapter_from_json(const json& j, const std::string& where, std::span<const std::size_t> widths) {
  AdapterSpec a;
  ObjectReader r(j, where);
  std::string kind(to_string(a.kind));
  r.read("kind", kind);
  a.kind = parse_adapter_kind(kind);
  r.read("bottleneck", a.bottleneck);
  std::string act(to_string(a.activation));
  r.read("activation", act);
  a.activation = parse_activation(act);
  r.read("scaling", a.scaling);
  if (r.find("insertion_points")) {
    r.read("insertion_points", a.insertion_points);
  } else {
    for (std::size_t i = 0; i < widths.size(); ++i) a.insertion_points.push_back(i);
  }
  r.finish();
  return a;
}

}  // namespace

json to_json(const ModelSpec& m) {
  return {{"input_dim", m.input_dim},
          {"hidden_dims", m.hidden_dims},
          {"num_classes", m.num_classes},
          {"activation", std::string(to_string(m.activation))},
          {"init_seed", m.init_seed}};
}

ModelSpec model_spec_from_json(const json& j) { return model_from_json(j, "model", ModelSpec{}); }

json to_json(const AdapterSpec& a) {
  return {{"kind", std::string(to_string(a.kind))},
          {"bottleneck", a.bottleneck},
          {"activation", std::string(to_string(a.activation))},
          {"scaling", a.scaling},
          {"insertion_points", a.insertion_points}};
}

AdapterSpec adapter_spec_from_json(const json& j, std::span<const std::size_t> hidden_widths) {
  return adapter_from_json(j, "adapter", hidden_widths);
}

void DistillConfig::validate() const {
  weights().validate();
  if (!(tau > 0)) throw ParameterError("tau must be positive");
  if (batch_size == 0) throw ParameterError("batch_size must be at least 1");
  teacher.validate();
  student.validate();
  if (teacher.num_classes != student.num_classes) {
    throw SpecError("teacher and student disagree on num_classes");
  }
  if (teacher.input_dim != student.input_dim) throw SpecError("teacher and student disagree on input_dim");
  if (regime == Regime::vanilla && feedback) throw SpecError("vanilla regime cannot use teacher feedback");
  if (regime == Regime::adapter) adapter.validate(teacher.hidden_dims);
  if (data.source == "synthetic") {
    data.synthetic.validate();
    if (data.synthetic.feature_dim != teacher.input_dim) {
      throw SpecError("synthetic feature_dim does not match model input_dim");
    }
    if (data.synthetic.num_classes != teacher.num_classes) {
      throw SpecError("synthetic num_classes does not match model num_classes");
    }
  }
  if (!(data.eval_fraction > 0 && data.eval_fraction < 1)) throw ParameterError("eval_fraction must lie in (0, 1)");
}

DistillConfig config_from_json(const json& j) {
  DistillConfig c;
  ObjectReader r(j, "config");
  r.read("name", c.name);
  std::string regime(to_string(c.regime));
  r.read("regime", regime);
  c.regime = parse_regime(regime);
  c.teacher_optimizer.lr = c.regime == Regime::finetune ? 1e-3 : c.regime == Regime::adapter ? 1e-2 : 0.0;
  c.feedback = c.regime != Regime::vanilla;

  r.read("tau", c.tau);
  r.read("alpha", c.alpha);
  r.read("teacher_task_weight", c.teacher_task_weight);
  r.read("feedback", c.feedback);
  if (c.regime == Regime::vanilla) c.feedback = false;
  r.read("label_smoothing", c.label_smoothing);
  r.read("epochs", c.epochs);
  r.read("batch_size", c.batch_size);
  r.read("seed", c.seed, 0);
  std::string precision(to_string(c.precision));
  r.read("precision", precision);
  c.precision = parse_precision(precision);
  r.read("pretrain_epochs", c.pretrain_epochs);

  if (auto* v = r.find("student_optimizer")) {
    c.student_optimizer = optimizer_from_json(*v, r.path("student_optimizer"), c.student_optimizer);
  }
  if (auto* v = r.find("teacher_optimizer")) {
    c.teacher_optimizer = optimizer_from_json(*v, r.path("teacher_optimizer"), c.teacher_optimizer);
  }
  if (auto* v = r.find("pretrain_optimizer")) {
    c.pretrain_optimizer = optimizer_from_json(*v, r.path("pretrain_optimizer"), c.pretrain_optimizer);
  }
  if (auto* v = r.find("teacher")) c.teacher = model_from_json(*v, r.path("teacher"), c.teacher);
  if (auto* v = r.find("student")) c.student = model_from_json(*v, r.path("student"), c.student);

  if (auto* v = r.find("adapter")) {
    c.adapter = adapter_from_json(*v, r.path("adapter"), c.teacher.hidden_dims);
  } else {
    c.adapter = adapter_from_json(json::object(), r.path("adapter"), c.teacher.hidden_dims);
  }

  if (auto* v = r.find("data")) {
    ObjectReader d(*v, r.path("data"));
    d.read("source", c.data.source);
    d.read("eval_fraction", c.data.eval_fraction);
    d.read("split_seed", c.data.split_seed, 0);
    d.read("standardize", c.data.standardize);
    if (auto* s = d.find("synthetic")) {
      ObjectReader sr(*s, d.path("synthetic"));
      sr.read("num_classes", c.data.synthetic.num_classes);
      sr.read("samples_per_class", c.data.synthetic.samples_per_class);
      sr.read("feature_dim", c.data.synthetic.feature_dim);
      sr.read("cluster_std", c.data.synthetic.cluster_std);
      sr.read("overlap", c.data.synthetic.overlap);
      sr.read("seed", c.data.synthetic.seed, 0);
      sr.finish();
    }
    d.finish();
  }
  r.finish();
  c.validate();
  return c;
}

json to_json(const DistillConfig& c) {
  const auto& s = c.data.synthetic;
  return {
      {"name", c.name},
      {"regime", std::string(to_string(c.regime))},
      {"tau", c.tau},
      {"alpha", c.alpha},
      {"teacher_task_weight", c.teacher_task_weight},
      {"feedback", c.feedback},
      {"label_smoothing", c.label_smoothing},
      {"epochs", c.epochs},
      {"batch_size", c.batch_size},
      {"seed", c.seed},
      {"precision", std::string(to_string(c.precision))},
      {"pretrain_epochs", c.pretrain_epochs},
      {"student_optimizer", to_json(c.student_optimizer)},
      {"teacher_optimizer", to_json(c.teacher_optimizer)},
      {"pretrain_optimizer", to_json(c.pretrain_optimizer)},
      {"teacher", to_json(c.teacher)},
      {"student", to_json(c.student)},
      {"adapter", to_json(c.adapter)},
      {"data",
       {{"source", c.data.source},
        {"eval_fraction", c.data.eval_fraction},
        {"split_seed", c.data.split_seed},
        {"standardize", c.data.standardize},
        {"synthetic",
         {{"num_classes", s.num_classes},
          {"samples_per_class", s.samples_per_class},
          {"feature_dim", s.feature_dim},
          {"cluster_std", s.cluster_std},
          {"overlap", s.overlap},
          {"seed", s.seed}}}}},
  };
}

DistillConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FileError("cannot open config '" + path.string() + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ParseError("config '" + path.string() + "': " + e.what());
  }
  return config_from_json(j);
}

std::string sha256_hex(std::span<const unsigned char> bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xf]);
  }
  return out;
}

std::string config_hash(const DistillConfig& c) {
  const std::string dump = to_json(c).dump();
  return sha256_hex({reinterpret_cast<const unsigned char*>(dump.data()), dump.size()}).substr(0, 16);
}

}  // namespace pesfkd
