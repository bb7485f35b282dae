// SPDX-License-Identifier: Apache-2.0
//
// End-to-end acceptance checks. Prints one [PASS]/[FAIL] line per criterion
// and exits non-zero when any of them fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "pesfkd/diagnostics.hpp"
#include "pesfkd/experiment.hpp"
#include "pesfkd/losses.hpp"
#include "support.hpp"

using namespace pesfkd;
using testing_support::one_hot;
using testing_support::random_labels;
using testing_support::random_matrix;
using testing_support::uniform_values;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool ok = false;
  std::string detail;
};

int failures = 0;

void report(const std::string& id, const std::string& title, const std::function<Outcome()>& check) {
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.ok) ++failures;
  std::cout << (o.ok ? "[PASS] " : "[FAIL] ") << id << " " << title << ": " << o.detail << std::endl;
}

std::string fmt(double v, int prec = 6) {
  std::ostringstream s;
  s.precision(prec);
  s << v;
  return s.str();
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path workdir(const std::string& name) {
  const auto d = fs::current_path() / "acceptance_work" / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  return out;
}

AdapterSpec adapter_of(AdapterKind kind, std::vector<std::size_t> points, Activation act = Activation::relu) {
  AdapterSpec a;
  a.kind = kind;
  a.activation = act;
  a.scaling = kind == AdapterKind::scaled_parallel ? 0.5 : 1.0;
  a.insertion_points = std::move(points);
  return a;
}

nlohmann::json adapter_json(AdapterKind kind) {
  return {{"kind", std::string(to_string(kind))}, {"scaling", kind == AdapterKind::scaled_parallel ? 0.5 : 1.0}};
}

const std::vector<AdapterKind> kAllKinds = {AdapterKind::sequential, AdapterKind::low_rank_parallel,
                                            AdapterKind::scaled_parallel};

// ---------------------------------------------------------------------------

// Student and teacher objectives differentiated through a 3-layer teacher
// with one adapter. gelu keeps finite differences away from relu kinks.
Outcome gradient_oracle(AdapterKind kind) {
  const auto t0 = Clock::now();
  const LossWeights w{0.9, 0.5, 0.1};
  const double tau = 4.0;
  double worst_student = 0, worst_adapter = 0, worst_full = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    Mlp<double> teacher({3, {8, 8}, 4, Activation::gelu, seed});
    attach(teacher, adapter_of(kind, {1}, Activation::gelu), seed + 7);
    auto& up = teacher.params().get(adapter_up_name(1));
    const auto v = uniform_values(rng, up.numel(), -0.5, 0.5);
    std::copy(v.begin(), v.end(), up.mutable_data().begin());
    Mlp<double> student({3, {5}, 4, Activation::gelu, seed + 1000});
    const auto x = random_matrix(rng, 8, 3, -2, 2);
    const auto y = one_hot(random_labels(rng, 8, 4), 4);

    worst_student = std::max(
        worst_student, grad_check<double>(
                           [&](const ParameterSet<double>&) {
                             return student_loss(student.forward(x).logits, teacher.forward(x).logits, y, w, tau);
                           },
                           student.params(), 1e-5));
    auto teacher_objective = [&](const Mlp<double>& t) {
      return [&](const ParameterSet<double>&) {
        return teacher_loss(t.forward(x).logits, student.forward(x).logits, y, w, tau, true);
      };
    };
    worst_adapter = std::max(worst_adapter, grad_check<double>(teacher_objective(teacher), teacher.params(), 1e-5));
    Mlp<double> full = teacher;
    full.params().set_frozen([](std::string_view) { return false; });
    worst_full = std::max(worst_full, grad_check<double>(teacher_objective(full), full.params(), 1e-5));
  }
  const double secs = seconds_since(t0);
  // Gradients w.r.t. the whole teacher belong to the finetune regime; shown for reference only.
  std::cout << "       info: " << to_string(kind) << " teacher loss w.r.t. every teacher parameter, max rel err "
            << fmt(worst_full, 3) << std::endl;
  const double worst = std::max(worst_student, worst_adapter);
  return {worst < 1e-5 && secs < 60.0, "max rel err student loss " + fmt(worst_student, 3) +
                                           ", teacher loss w.r.t. adapter " + fmt(worst_adapter, 3) +
                                           " over 20 seeds in " + fmt(secs, 3) + " s"};
}

template <class T>
double identity_difference(AdapterKind kind, std::uint64_t seed) {
  DistillConfig defaults = config_from_json({{"regime", "adapter"}});
  ModelSpec spec = defaults.teacher;
  spec.init_seed = seed;
  Mlp<T> plain(spec);
  Mlp<T> augmented = plain;
  AdapterSpec a = defaults.adapter;
  a.kind = kind;
  a.scaling = kind == AdapterKind::scaled_parallel ? 0.5 : 1.0;
  attach(augmented, a, seed + 1);
  std::mt19937_64 rng(seed);
  const auto x = random_matrix<T>(rng, 1000, spec.input_dim, -4, 4);
  const auto z0 = plain.forward(x).logits;
  const auto z1 = augmented.forward(x).logits;
  double diff = 0;
  for (std::size_t i = 0; i < z0.numel(); ++i) diff = std::max(diff, std::abs(double(z0.data()[i]) - double(z1.data()[i])));
  return diff;
}

Outcome adapter_identity(AdapterKind kind) {
  const double d32 = identity_difference<float>(kind, 3);
  const double d64 = identity_difference<double>(kind, 3);
  return {d32 == 0.0 && d64 == 0.0,
          "max |z_aug - z| on 1000 inputs: f32 " + fmt(d32) + ", f64 " + fmt(d64)};
}

// Shared desk-scale teacher checkpoint for the freeze check.
fs::path freeze_teacher_checkpoint() {
  static fs::path path;
  if (path.empty()) {
    const auto dir = workdir("freeze");
    auto cfg = config_from_json({{"regime", "adapter"}, {"pretrain_epochs", 5}});
    path = dir / "teacher.ckpt";
    run_train_teacher(cfg, path, dir / "teacher.csv");
  }
  return path;
}

Outcome backbone_freeze(AdapterKind kind) {
  auto cfg = config_from_json({{"regime", "adapter"}, {"pretrain_epochs", 5}, {"adapter", adapter_json(kind)}});
  const auto ckpt = load_checkpoint(freeze_teacher_checkpoint());
  auto teacher = restore_network<float>(ckpt);
  auto backbone = [](std::string_view n) { return !is_adapter_param(n); };
  const auto before = parameter_bytes(teacher.mlp.params(), backbone);
  const auto sha_before = sha256_hex(before);
  const auto sha_file = sha256_hex(ckpt.payload);

  DistillOptions opts;
  opts.max_steps = 100;
  const auto data = prepare_data(cfg.data, cfg.teacher.num_classes);
  const auto res = distill<float>(cfg, std::move(teacher), data, opts);

  const auto after = parameter_bytes(res.teacher.mlp.params(), backbone);
  const auto sha_after = sha256_hex(after);
  bool adapters_moved = false;
  for (const auto& e : res.teacher.mlp.params())
    if (is_adapter_param(e.name) && !e.name.ends_with("down"))
      for (float v : e.tensor.data()) adapters_moved |= v != 0.0f;
  const bool identical = before == after;
  return {identical && sha_before == sha_after && sha_before == sha_file && adapters_moved,
          std::string("backbone bytes ") + (identical ? "identical" : "CHANGED") + ", sha256 " +
              sha_after.substr(0, 16) + (sha_before == sha_after ? " unchanged" : " changed") +
              (sha_before == sha_file ? ", matches checkpoint payload" : ", differs from checkpoint payload") +
              (adapters_moved ? ", adapters trained" : ", adapters did not move")};
}

// Zero-mean logit rows with every entry inside [-m, m].
Tensor<double> centred_row(std::mt19937_64& rng, std::size_t k, double m) {
  auto z = random_matrix(rng, 1, k, -m / 2, m / 2);
  auto d = z.mutable_data();
  double mean = 0;
  for (double v : d) mean += v;
  mean /= double(k);
  for (double& v : d) v -= mean;
  return z;
}

Outcome approximation_oracle() {
  std::mt19937_64 rng(2024);
  double worst_1 = 0, worst_2 = 0, raw_1 = 0;
  for (int t = 0; t < 1000; ++t) {
    worst_1 = std::max(worst_1, gap_variance_approx(centred_row(rng, 10, 0.1), centred_row(rng, 10, 0.1)).abs_error);
    worst_2 =
        std::max(worst_2, gap_variance_approx(centred_row(rng, 10, 0.01), centred_row(rng, 10, 0.01)).abs_error);
    raw_1 = std::max(raw_1, gap_variance_approx(random_matrix(rng, 1, 10, -0.1, 0.1),
                                                random_matrix(rng, 1, 10, -0.1, 0.1))
                                .abs_error);
  }
  std::cout << "       info: without centring, entries in [-0.1, 0.1] give max error " << fmt(raw_1, 3)
            << " (row means shift the exact gap but not the variance form)" << std::endl;
  return {worst_1 < 1e-3 && worst_2 < 1e-5, "zero-mean pairs, max |approx - exact|: " + fmt(worst_1, 3) +
                                                " at 0.1 (< 1e-3), " + fmt(worst_2, 3) + " at 0.01 (< 1e-5)"};
}

Outcome loss_oracles() {
  const Tensor<double> zt({1, 2}, {2.0, 0.0});
  const Tensor<double> zs({1, 2}, {0.0, 0.0});
  const double kd = kd_kl_loss(zs, zt, 2.0).data()[0];
  // tau^2 * KL(softmax([1,0]) || [0.5, 0.5]) evaluated by hand.
  const double p = 1.0 / (1.0 + std::exp(-1.0));
  const double hand = 4.0 * (p * std::log(2 * p) + (1 - p) * std::log(2 * (1 - p)));
  double worst_ce = 0;
  for (std::size_t k : {2, 3, 5, 10, 100, 1000}) {
    std::mt19937_64 rng(k);
    const std::size_t n = 6;
    const Tensor<double> flat({n, k}, std::vector<double>(n * k, 0.37));
    const auto pred = tempered_softmax(flat, 1.0);
    const Tensor<double> uniform({n, k}, std::vector<double>(n * k, 1.0 / double(k)));
    const double ce_uniform = cross_entropy(uniform, pred).data()[0];
    const double ce_onehot = cross_entropy(one_hot(random_labels(rng, n, k), k), pred).data()[0];
    worst_ce = std::max({worst_ce, std::abs(ce_uniform - std::log(double(k))),
                         std::abs(ce_onehot - std::log(double(k)))});
  }
  return {std::abs(kd - 0.4438) < 1e-3 && std::abs(kd - hand) < 1e-12 && worst_ce < 1e-9,
          "kd_kl_loss = " + fmt(kd, 8) + " (hand " + fmt(hand, 8) + "), max |CE - ln K| = " + fmt(worst_ce, 3)};
}

Tensor<double> orthogonal(std::mt19937_64& rng, std::size_t d) {
  // Gram-Schmidt on a random square matrix.
  auto a = random_matrix(rng, d, d);
  std::vector<std::vector<double>> cols(d, std::vector<double>(d));
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t i = 0; i < d; ++i) cols[j][i] = a.at(i, j);
    for (std::size_t prev = 0; prev < j; ++prev) {
      double dot = 0;
      for (std::size_t i = 0; i < d; ++i) dot += cols[j][i] * cols[prev][i];
      for (std::size_t i = 0; i < d; ++i) cols[j][i] -= dot * cols[prev][i];
    }
    double norm = 0;
    for (double v : cols[j]) norm += v * v;
    norm = std::sqrt(norm);
    for (double& v : cols[j]) v /= norm;
  }
  std::vector<double> q(d * d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) q[i * d + j] = cols[j][i];
  return Tensor<double>({d, d}, q);
}

Tensor<double> matmul_plain(const Tensor<double>& a, const Tensor<double>& b) {
  const std::size_t n = a.shape()[0], m = a.shape()[1], p = b.shape()[1];
  std::vector<double> out(n * p, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < m; ++k)
      for (std::size_t j = 0; j < p; ++j) out[i * p + j] += a.at(i, k) * b.at(k, j);
  return Tensor<double>({n, p}, out);
}

Outcome cka_suite() {
  std::mt19937_64 rng(77);
  double self = 0, scale = 0, rot = 0, sym = 0;
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = 30, d = 3 + t % 6, e = 2 + t % 5;
    const auto x = random_matrix(rng, n, d, -2, 2);
    const auto y = random_matrix(rng, n, e, -2, 2);
    const double base = linear_cka(x, y);
    self = std::max(self, std::abs(linear_cka(x, x) - 1.0));
    const double c = 0.1 + 10.0 * uniform_values(rng, 1, 0, 1)[0];
    std::vector<double> scaled(x.data().begin(), x.data().end());
    for (double& v : scaled) v *= c;
    scale = std::max(scale, std::abs(linear_cka(Tensor<double>({n, d}, scaled), y) - base));
    rot = std::max(rot, std::abs(linear_cka(matmul_plain(x, orthogonal(rng, d)), y) - base));
    sym = std::max(sym, std::abs(linear_cka(y, x) - base));
  }
  return {self < 1e-10 && scale < 1e-8 && rot < 1e-8 && sym < 1e-10,
          "50 matrices, max deviation: self " + fmt(self, 3) + ", scaling " + fmt(scale, 3) + ", rotation " +
              fmt(rot, 3) + ", symmetry " + fmt(sym, 3)};
}

const ConfigSummary* row_named(const CompareResult& r, const std::string& name) {
  for (const auto& row : r.rows)
    if (row.name == name) return &row;
  return nullptr;
}

struct RegimeComparison {
  CompareResult result;
  fs::path dir;
  double seconds = 0;
};

RegimeComparison& regime_comparison() {
  static std::optional<RegimeComparison> cached;
  if (!cached) {
    RegimeComparison rc;
    rc.dir = workdir("regimes");
    std::vector<DistillConfig> cfgs;
    for (const char* regime : {"vanilla", "finetune", "adapter"})
      cfgs.push_back(config_from_json({{"name", regime}, {"regime", regime}}));
    CompareOptions opts;
    opts.seeds = 5;
    opts.record_wall_clock = true;
    const auto t0 = Clock::now();
    rc.result = compare(cfgs, rc.dir, opts);
    rc.seconds = seconds_since(t0);
    cached = std::move(rc);
  }
  return *cached;
}

Outcome directional_replication() {
  const auto& rc = regime_comparison();
  const auto* v = row_named(rc.result, "vanilla");
  const auto* f = row_named(rc.result, "finetune");
  const auto* a = row_named(rc.result, "adapter");
  if (!v || !f || !a) return {false, "missing regime rows"};
  for (const auto* r : {v, f, a})
    std::cout << "       " << r->name << ": |gap| " << fmt(r->abs_gap_mean, 4) << " +- " << fmt(r->abs_gap_std, 3)
              << ", student acc " << fmt(r->student_acc_mean, 4) << ", teacher acc " << fmt(r->teacher_acc_mean, 4)
              << std::endl;
  const bool gaps = a->abs_gap_mean < v->abs_gap_mean && f->abs_gap_mean < v->abs_gap_mean;
  const bool acc = a->student_acc_mean >= v->student_acc_mean - 0.005;
  return {gaps && acc && rc.seconds < 600.0,
          "mean |gap| adapter " + fmt(a->abs_gap_mean, 4) + ", finetune " + fmt(f->abs_gap_mean, 4) + " vs vanilla " +
              fmt(v->abs_gap_mean, 4) + "; student acc adapter " + fmt(a->student_acc_mean, 4) + " vs vanilla " +
              fmt(v->student_acc_mean, 4) + "; " + fmt(rc.seconds, 4) + " s for 5 seeds"};
}

Outcome parameter_efficiency() {
  const auto& rc = regime_comparison();
  const auto defaults = config_from_json({{"regime", "adapter"}});
  const std::size_t adapters = adapter_param_count(defaults.adapter, defaults.teacher.hidden_dims);
  const std::size_t total = model_param_count(defaults.teacher) + adapters;
  const double ratio = double(adapters) / double(total);

  // The exact counts must appear in summary.csv.
  std::istringstream csv(slurp(rc.dir / "summary.csv"));
  std::string line;
  std::getline(csv, line);
  const auto header = split(line, ',');
  auto col = [&](const std::string& name) {
    return std::size_t(std::find(header.begin(), header.end(), name) - header.begin());
  };
  bool reported = false;
  while (std::getline(csv, line)) {
    const auto f = split(line, ',');
    if (f[0] == "adapter")
      reported = f[col("trainable_t")] == std::to_string(adapters) && f[col("total_t")] == std::to_string(total);
  }
  return {ratio < 0.05 && reported, "adapter trainable " + std::to_string(adapters) + " / " + std::to_string(total) +
                                        " teacher parameters = " + fmt(100 * ratio, 4) + "%" +
                                        (reported ? ", counts in summary.csv" : ", counts MISSING from summary.csv")};
}

Outcome determinism() {
  const auto dir = workdir("determinism");
  auto cfg = config_from_json({{"regime", "adapter"}, {"epochs", 3}, {"pretrain_epochs", 3}});
  run_train_teacher(cfg, dir / "t1.ckpt", dir / "t1.csv");
  run_train_teacher(cfg, dir / "t2.ckpt", dir / "t2.csv");
  run_distill(cfg, dir / "t1.ckpt", dir / "s1.ckpt", dir / "m1.csv");
  run_distill(cfg, dir / "t1.ckpt", dir / "s2.ckpt", dir / "m2.csv");
  const bool metrics_same = slurp(dir / "t1.csv") == slurp(dir / "t2.csv") && slurp(dir / "m1.csv") == slurp(dir / "m2.csv");
  const bool ckpt_same = slurp(dir / "t1.ckpt") == slurp(dir / "t2.ckpt") && slurp(dir / "s1.ckpt") == slurp(dir / "s2.ckpt");

  // Save, load, restore, save again: every parameter bit and every file byte survive.
  bool round_trip = true;
  auto check_round_trip = [&](auto tag) {
    using T = decltype(tag);
    std::mt19937_64 rng(9);
    Network<T> net{Mlp<T>(cfg.teacher), cfg.adapter};
    attach(net.mlp, cfg.adapter, 4);
    for (const auto& e : net.mlp.params()) {
      auto& t = net.mlp.params().get(e.name);
      const auto v = uniform_values(rng, t.numel(), -1, 1);
      std::copy(v.begin(), v.end(), t.mutable_data().begin());
    }
    const auto p1 = dir / "rt1.ckpt", p2 = dir / "rt2.ckpt";
    save_checkpoint(make_checkpoint(net, &cfg), p1);
    const auto back = restore_network<T>(load_checkpoint(p1));
    save_checkpoint(make_checkpoint(back, &cfg), p2);
    auto all = [](std::string_view) { return true; };
    round_trip = round_trip && parameter_bytes(net.mlp.params(), all) == parameter_bytes(back.mlp.params(), all) &&
                 slurp(p1) == slurp(p2);
  };
  check_round_trip(float{});
  check_round_trip(double{});
  return {metrics_same && ckpt_same && round_trip,
          std::string("metrics CSV ") + (metrics_same ? "byte-identical" : "DIFFER") + ", checkpoints " +
              (ckpt_same ? "byte-identical" : "DIFFER") + ", f32/f64 round trip " + (round_trip ? "bit-exact" : "NOT exact")};
}

Outcome regime_reduction() {
  const auto dir = workdir("reduction");
  auto vanilla = config_from_json({{"regime", "vanilla"}, {"epochs", 6}, {"pretrain_epochs", 5}});
  auto finetune = config_from_json({{"regime", "finetune"},
                                    {"epochs", 6},
                                    {"pretrain_epochs", 5},
                                    {"teacher_task_weight", 0.0},
                                    {"feedback", false},
                                    {"teacher_optimizer", {{"lr", 0.0}}}});
  run_train_teacher(vanilla, dir / "t.ckpt", dir / "t.csv");
  run_distill(vanilla, dir / "t.ckpt", dir / "v.ckpt", dir / "v.csv");
  run_distill(finetune, dir / "t.ckpt", dir / "f.ckpt", dir / "f.csv");

  // Every column except trainable_t, which counts the unfrozen teacher by definition.
  auto strip = [](const std::string& text) {
    std::istringstream in(text);
    std::string line, out;
    std::getline(in, line);
    const auto header = split(line, ',');
    const auto skip = std::size_t(std::find(header.begin(), header.end(), "trainable_t") - header.begin());
    while (std::getline(in, line)) {
      const auto f = split(line, ',');
      for (std::size_t i = 0; i < f.size(); ++i)
        if (i != skip) out += f[i] + ",";
      out += "\n";
    }
    return out;
  };
  const auto v = strip(slurp(dir / "v.csv"));
  const auto f = strip(slurp(dir / "f.csv"));
  const bool student_same = load_checkpoint(dir / "v.ckpt").payload == load_checkpoint(dir / "f.ckpt").payload;
  return {v == f && !v.empty() && student_same,
          std::string("student metric columns ") + (v == f ? "byte-identical" : "DIFFER") + " over 6 epochs, student parameters " +
              (student_same ? "bit-identical" : "differ")};
}

Outcome ablation(const std::vector<std::string>& per_kind_failures) {
  const auto dir = workdir("ablation");
  std::vector<DistillConfig> cfgs;
  for (auto kind : kAllKinds)
    cfgs.push_back(config_from_json(
        {{"name", std::string(to_string(kind))}, {"regime", "adapter"}, {"adapter", adapter_json(kind)}}));
  CompareOptions opts;
  opts.seeds = 5;
  const auto t0 = Clock::now();
  const auto res = compare(cfgs, dir, opts);
  bool complete = res.rows.size() == 3;
  for (const auto& r : res.rows) {
    std::cout << "       " << r.name << ": student acc " << fmt(r.student_acc_mean, 4) << " +- "
              << fmt(r.student_acc_std, 3) << ", cka logits " << fmt(r.cka_logits_mean, 4) << ", cka penult "
              << fmt(r.cka_penult_mean, 4) << ", trainable " << r.trainable_t << " / " << r.total_t << std::endl;
    complete = complete && r.runs == 5 && std::isfinite(r.student_acc_mean) && std::isfinite(r.cka_logits_mean) &&
               r.trainable_t > 0;
  }
  std::string failed;
  for (const auto& f : per_kind_failures) failed += " " + f;
  return {complete && per_kind_failures.empty(),
          std::string("compare over 3 kinds ") + (complete ? "complete" : "INCOMPLETE") + " in " +
              fmt(seconds_since(t0), 4) + " s; criteria 1-3 per kind: " +
              (per_kind_failures.empty() ? "all pass" : "failed:" + failed)};
}

}  // namespace

int main() {
  const auto t0 = Clock::now();
  report("C1", "gradient oracle", [] { return gradient_oracle(AdapterKind::sequential); });
  report("C2", "adapter identity at init", [] { return adapter_identity(AdapterKind::sequential); });
  report("C3", "backbone freeze", [] { return backbone_freeze(AdapterKind::sequential); });
  report("C4", "gap approximation", approximation_oracle);
  report("C5", "loss values", loss_oracles);
  report("C6", "CKA invariances", cka_suite);
  report("C7", "directional gap reduction", directional_replication);
  report("C8", "parameter efficiency", parameter_efficiency);
  report("C9", "determinism and persistence", determinism);
  report("C10", "regime reduction", regime_reduction);

  std::vector<std::string> per_kind_failures;
  for (auto kind : kAllKinds) {
    const std::string k(to_string(kind));
    auto safe = [&](const char* id, const std::function<Outcome()>& f) {
      Outcome o;
      try {
        o = f();
      } catch (const std::exception& e) {
        o = {false, e.what()};
      }
      std::cout << "       " << k << " " << id << ": " << (o.ok ? "pass" : "FAIL") << " (" << o.detail << ")"
                << std::endl;
      if (!o.ok) per_kind_failures.push_back(k + "/" + id);
    };
    safe("C1", [&] { return gradient_oracle(kind); });
    safe("C2", [&] { return adapter_identity(kind); });
    safe("C3", [&] { return backbone_freeze(kind); });
  }
  report("C11", "adapter-kind ablation", [&] { return ablation(per_kind_failures); });

  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << " in "
            << fmt(seconds_since(t0), 4) << " s" << std::endl;
  return failures == 0 ? 0 : 1;
}
