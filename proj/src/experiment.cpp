// SPDX-License-Identifier: Apache-2.0
#include "pesfkd/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>

#include "pesfkd/diagnostics.hpp"
#include "pesfkd/losses.hpp"
#include "pesfkd/optim.hpp"

namespace pesfkd {

using nlohmann::json;

namespace {

template <class F>
decltype(auto) with_precision(Precision p, F&& f) {
  if (p == Precision::f32) return f(float{});
  return f(double{});
}

std::vector<std::string> spec_differences(const ModelSpec& have, const ModelSpec& want) {
  std::vector<std::string> diffs;
  if (have.input_dim != want.input_dim) diffs.push_back("input_dim");
  if (have.hidden_dims != want.hidden_dims) diffs.push_back("hidden_dims");
  if (have.num_classes != want.num_classes) diffs.push_back("num_classes");
  if (have.activation != want.activation) diffs.push_back("activation");
  return diffs;
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) out += (out.empty() ? "" : ", ") + p;
  return out;
}

double mean_of(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / double(v.size());
}

// Sample standard deviation; 0 for fewer than two values.
double std_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / double(v.size() - 1));
}

template <class T>
double cka_or_nan(const Tensor<T>& x, const Tensor<T>& y) {
  try {
    return linear_cka(x, y);
  } catch (const DegenerateInputError&) {
    return std::nan("");
  }
}

}  // namespace

PreparedData prepare_data(const DataConfig& data, std::size_t num_classes) {
  Dataset all;
  if (data.source == "synthetic") {
    all = generate(data.synthetic);
  } else {
    all = load_csv(data.source, num_classes);
  }
  if (all.num_classes != num_classes) {
    throw CompatibilityError("dataset has " + std::to_string(all.num_classes) + " classes, model expects " +
                             std::to_string(num_classes));
  }
  assign_split(all, data.eval_fraction, data.split_seed);
  PreparedData out{subset(all, Split::train), subset(all, Split::eval)};
  if (out.train.num_samples == 0 || out.eval.num_samples == 0) {
    throw SpecError("train/eval split leaves an empty side");
  }
  if (data.standardize) {
    const auto s = Standardizer::fit(out.train);
    s.apply(out.train);
    s.apply(out.eval);
  }
  return out;
}

template <class T>
double accuracy(const Tensor<T>& logits, const std::vector<int>& labels) {
  const std::size_t n = logits.shape()[0];
  const std::size_t k = logits.shape()[1];
  const auto z = logits.data();
  std::size_t correct = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = z.subspan(i * k, k);
    const auto best = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
    if (best == labels[i]) ++correct;
  }
  return n ? double(correct) / double(n) : 0.0;
}

template <class T>
Network<T> train_teacher(const DistillConfig& config, const PreparedData& data, MetricsWriter* metrics) {
  ModelSpec spec = config.teacher;
  spec.init_seed = config.teacher_init_seed();
  Network<T> net{Mlp<T>(spec), std::nullopt};
  if (data.train.feature_dim != spec.input_dim) {
    throw CompatibilityError("dataset width " + std::to_string(data.train.feature_dim) +
                             " does not match teacher input_dim " + std::to_string(spec.input_dim));
  }
  const auto& opt = config.pretrain_optimizer;
  Sgd<T> sgd(opt.momentum, opt.weight_decay);
  const auto eval = full_batch<T>(data.eval);
  for (std::size_t epoch = 0; epoch < config.pretrain_epochs; ++epoch) {
    const double lr = lr_schedule(opt.lr, epoch, opt.milestones, opt.decay);
    double loss_sum = 0;
    std::size_t correct = 0;
    for (const auto& idx : batch_indices(data.train.num_samples, config.batch_size, config.pretrain_shuffle_seed(),
                                         epoch)) {
      const auto batch = make_batch<T>(data.train, idx);
      const auto trace = net.mlp.forward(batch.features);
      auto loss = cross_entropy(batch.one_hot, tempered_softmax(trace.logits, 1.0));
      loss.backward();
      sgd.step(net.mlp.params(), lr);
      loss_sum += double(loss.item()) * double(idx.size());
      correct += static_cast<std::size_t>(std::llround(accuracy(trace.logits, batch.labels) * double(idx.size())));
    }
    if (metrics) {
      NoGradGuard no_grad;
      const auto trace = net.mlp.forward(eval.features);
      const auto stats = logit_stats(trace.logits);
      const double n = double(data.train.num_samples);
      metrics->write_row(std::to_string(epoch) + ',' + format_number(loss_sum / n) + ',' +
                         format_number(double(correct) / n) + ',' +
                         format_number(accuracy(trace.logits, eval.labels)) + ',' +
                         format_number(stats.sharpness_mean));
    }
  }
  return net;
}

template <class T>
MetricsRecord evaluate_pair(const Network<T>& teacher, const Network<T>& student, const Dataset& eval, double tau) {
  NoGradGuard no_grad;
  const auto batch = full_batch<T>(eval);
  const auto tt = teacher.mlp.forward(batch.features);
  const auto ts = student.mlp.forward(batch.features);
  MetricsRecord r;
  r.teacher_acc = accuracy(tt.logits, batch.labels);
  r.student_acc = accuracy(ts.logits, batch.labels);
  const auto approx = gap_variance_approx(tt.logits, ts.logits);
  r.sharp_t = logit_stats(tt.logits).sharpness_mean;
  r.sharp_s = logit_stats(ts.logits).sharpness_mean;
  r.gap = approx.exact;
  r.gap_approx = approx.approx;
  r.kl_t1 = kl_consistency(tt.logits, ts.logits, 1.0);
  r.kl_ttrain = kl_consistency(tt.logits, ts.logits, tau);
  r.cka_logits = cka_or_nan(tt.logits, ts.logits);
  r.cka_penult = cka_or_nan(tt.penultimate, ts.penultimate);
  r.trainable_t = count_params(teacher.mlp.params(), true);
  r.trainable_s = count_params(student.mlp.params(), true);
  return r;
}

template <class T>
DistillResult<T> distill(const DistillConfig& config, Network<T> teacher, const PreparedData& data,
                         const DistillOptions& options) {
  config.validate();
  if (auto diffs = spec_differences(teacher.mlp.spec(), config.teacher); !diffs.empty()) {
    throw CompatibilityError("teacher checkpoint differs from config.teacher in: " + join(diffs));
  }
  if (teacher.adapter || teacher.mlp.has_hidden_hook()) {
    throw CompatibilityError("teacher checkpoint already carries adapters");
  }
  if (data.train.feature_dim != config.student.input_dim) {
    throw CompatibilityError("dataset width does not match model input_dim");
  }

  auto& tparams = teacher.mlp.params();
  switch (config.regime) {
    case Regime::vanilla:
      tparams.set_frozen([](std::string_view) { return true; });
      break;
    case Regime::finetune:
      tparams.set_frozen([](std::string_view) { return false; });
      break;
    case Regime::adapter:
      attach(teacher.mlp, config.adapter, config.adapter_seed());
      teacher.adapter = config.adapter;
      break;
  }
  const bool teacher_trains = config.regime != Regime::vanilla;

  ModelSpec sspec = config.student;
  sspec.init_seed = config.student_init_seed();
  Network<T> student{Mlp<T>(sspec), std::nullopt};

  const auto w = config.weights();
  const double tau = config.tau;
  Sgd<T> student_sgd(config.student_optimizer.momentum, config.student_optimizer.weight_decay);
  Sgd<T> teacher_sgd(config.teacher_optimizer.momentum, config.teacher_optimizer.weight_decay);

  std::vector<MetricsRecord> records;
  std::size_t steps = 0;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const auto& so = config.student_optimizer;
    const auto& to = config.teacher_optimizer;
    const double lr_s = lr_schedule(so.lr, epoch, so.milestones, so.decay);
    const double lr_t = lr_schedule(to.lr, epoch, to.milestones, to.decay);
    double s_task = 0, s_kl = 0, t_task = 0;
    std::size_t seen = 0;
    bool stop = false;
    for (const auto& idx : batch_indices(data.train.num_samples, config.batch_size, config.shuffle_seed(), epoch)) {
      const auto batch = make_batch<T>(data.train, idx);
      ForwardTrace<T> tt;
      if (teacher_trains) {
        tt = teacher.mlp.forward(batch.features);
      } else {
        NoGradGuard no_grad;
        tt = teacher.mlp.forward(batch.features);
      }
      const auto ts = student.mlp.forward(batch.features);

      auto ls = student_loss(ts.logits, tt.logits, batch.one_hot, w, tau);
      ls.backward();
      student_sgd.step(student.mlp.params(), lr_s);

      if (teacher_trains) {
        auto lt = teacher_loss(tt.logits, ts.logits, batch.one_hot, w, tau, config.feedback);
        lt.backward();
        teacher_sgd.step(tparams, lr_t);
      }

      {
        NoGradGuard no_grad;
        const double b = double(idx.size());
        s_task += b * double(cross_entropy(label_smooth(batch.one_hot, w.smoothing),
                                           tempered_softmax(ts.logits, 1.0)).item());
        s_kl += b * double(kd_kl_loss(ts.logits, tt.logits, tau).item());
        t_task += b * double(cross_entropy(batch.one_hot, tempered_softmax(tt.logits, 1.0)).item());
        seen += idx.size();
      }
      if (options.max_steps && ++steps >= options.max_steps) {
        stop = true;
        break;
      }
    }
    auto record = evaluate_pair(teacher, student, data.eval, tau);
    record.epoch = epoch;
    record.student_task_loss = s_task / double(seen);
    record.student_kl_loss = s_kl / double(seen);
    record.teacher_task_loss = t_task / double(seen);
    if (options.metrics) options.metrics->write_row(to_csv_row(record));
    records.push_back(record);
    if (stop) break;
  }
  return DistillResult<T>{std::move(teacher), std::move(student), std::move(records)};
}

// ---------------------------------------------------------------------------
// Command-level entry points

void run_train_teacher(const DistillConfig& config, const std::filesystem::path& out,
                       const std::filesystem::path& metrics) {
  const auto data = prepare_data(config.data, config.teacher.num_classes);
  MetricsWriter writer(metrics, kTeacherMetricsHeader);
  with_precision(config.precision, [&](auto tag) {
    using T = decltype(tag);
    const auto net = train_teacher<T>(config, data, &writer);
    save_checkpoint(make_checkpoint(net, &config), out);
  });
}

void run_distill(const DistillConfig& config, const std::filesystem::path& teacher_ckpt,
                 const std::filesystem::path& out, const std::filesystem::path& metrics,
                 const std::optional<std::filesystem::path>& teacher_out) {
  const auto ckpt = load_checkpoint(teacher_ckpt);
  if (ckpt.precision != config.precision) {
    throw CompatibilityError("teacher checkpoint precision " + std::string(to_string(ckpt.precision)) +
                             " differs from config precision " + std::string(to_string(config.precision)));
  }
  const auto data = prepare_data(config.data, config.student.num_classes);
  MetricsWriter writer(metrics, kMetricsHeader);
  with_precision(config.precision, [&](auto tag) {
    using T = decltype(tag);
    auto result = distill<T>(config, restore_network<T>(ckpt), data, DistillOptions{&writer, 0});
    save_checkpoint(make_checkpoint(result.student, &config), out);
    if (teacher_out) save_checkpoint(make_checkpoint(result.teacher, &config), *teacher_out);
  });
}

DistillConfig config_of(const Checkpoint& ckpt) {
  if (ckpt.config.is_null()) return DistillConfig{};
  return config_from_json(ckpt.config);
}

namespace {

json summary_json(const ConfigSummary& s) {
  return {{"config", s.name},
          {"regime", std::string(to_string(s.regime))},
          {"adapter_kind", s.adapter_kind},
          {"runs", s.runs},
          {"student_acc", {{"mean", s.student_acc_mean}, {"std", s.student_acc_std}}},
          {"teacher_acc", {{"mean", s.teacher_acc_mean}, {"std", s.teacher_acc_std}}},
          {"gap", {{"mean", s.gap_mean}, {"std", s.gap_std}}},
          {"abs_gap", {{"mean", s.abs_gap_mean}, {"std", s.abs_gap_std}}},
          {"gap_approx", {{"mean", s.gap_approx_mean}}},
          {"kl_t1", {{"mean", s.kl_t1_mean}, {"std", s.kl_t1_std}}},
          {"kl_ttrain", {{"mean", s.kl_ttrain_mean}, {"std", s.kl_ttrain_std}}},
          {"cka_logits", {{"mean", s.cka_logits_mean}, {"std", s.cka_logits_std}}},
          {"cka_penult", {{"mean", s.cka_penult_mean}, {"std", s.cka_penult_std}}},
          {"trainable_t", s.trainable_t},
          {"total_t", s.total_t},
          {"trainable_s", s.trainable_s}};
}

std::string summary_row(const ConfigSummary& s) {
  std::string row = s.name + ',' + std::string(to_string(s.regime)) + ',' + s.adapter_kind + ',' +
                    std::to_string(s.runs);
  for (double v : {s.student_acc_mean, s.student_acc_std, s.teacher_acc_mean, s.teacher_acc_std, s.gap_mean,
                   s.gap_std, s.abs_gap_mean, s.abs_gap_std, s.gap_approx_mean, s.kl_t1_mean, s.kl_t1_std,
                   s.kl_ttrain_mean, s.kl_ttrain_std, s.cka_logits_mean, s.cka_logits_std, s.cka_penult_mean,
                   s.cka_penult_std}) {
    row += ',' + format_number(v);
  }
  const double ratio = s.total_t ? double(s.trainable_t) / double(s.total_t) : 0.0;
  row += ',' + std::to_string(s.trainable_t) + ',' + std::to_string(s.total_t) + ',' + format_number(ratio) + ',' +
         std::to_string(s.trainable_s);
  return row;
}

ConfigSummary summarise(const DistillConfig& c, const std::vector<RunResult>& runs) {
  ConfigSummary s;
  s.name = c.name;
  s.regime = c.regime;
  s.adapter_kind = c.regime == Regime::adapter ? std::string(to_string(c.adapter.kind)) : "-";
  s.runs = runs.size();
  std::vector<double> sacc, tacc, gap, agap, gapx, kl1, klt, ckal, ckap;
  for (const auto& r : runs) {
    sacc.push_back(r.final.student_acc);
    tacc.push_back(r.final.teacher_acc);
    gap.push_back(r.final.gap);
    agap.push_back(std::abs(r.final.gap));
    gapx.push_back(r.final.gap_approx);
    kl1.push_back(r.final.kl_t1);
    klt.push_back(r.final.kl_ttrain);
    ckal.push_back(r.final.cka_logits);
    ckap.push_back(r.final.cka_penult);
  }
  s.student_acc_mean = mean_of(sacc), s.student_acc_std = std_of(sacc);
  s.teacher_acc_mean = mean_of(tacc), s.teacher_acc_std = std_of(tacc);
  s.gap_mean = mean_of(gap), s.gap_std = std_of(gap);
  s.abs_gap_mean = mean_of(agap), s.abs_gap_std = std_of(agap);
  s.gap_approx_mean = mean_of(gapx);
  s.kl_t1_mean = mean_of(kl1), s.kl_t1_std = std_of(kl1);
  s.kl_ttrain_mean = mean_of(klt), s.kl_ttrain_std = std_of(klt);
  s.cka_logits_mean = mean_of(ckal), s.cka_logits_std = std_of(ckal);
  s.cka_penult_mean = mean_of(ckap), s.cka_penult_std = std_of(ckap);
  if (!runs.empty()) {
    s.trainable_t = runs.front().final.trainable_t;
    s.trainable_s = runs.front().final.trainable_s;
    s.total_t = runs.front().total_t;
  }
  return s;
}

void write_compare_outputs(const std::filesystem::path& out_dir, const std::vector<ConfigSummary>& rows,
                           const std::vector<RunResult>& runs, const CompareOptions& options,
                           const std::string& error) {
  {
    std::ofstream csv(out_dir / "summary.csv", std::ios::binary | std::ios::trunc);
    if (!csv) throw FileError("cannot write " + (out_dir / "summary.csv").string());
    csv << kSummaryHeader << '\n';
    for (const auto& r : rows) csv << summary_row(r) << '\n';
  }
  json report;
  report["status"] = error.empty() ? "complete" : "aborted";
  if (!error.empty()) {
    report["error"] = error;
    report["note"] = "partial results: only configs whose runs all finished are summarised";
  }
  report["seeds"] = options.seeds;
  report["configs"] = json::array();
  for (const auto& r : rows) report["configs"].push_back(summary_json(r));
  report["runs"] = json::array();
  for (const auto& r : runs) {
    report["runs"].push_back({{"config", r.config_name},
                              {"seed", r.seed},
                              {"student_acc", r.final.student_acc},
                              {"teacher_acc", r.final.teacher_acc},
                              {"gap", r.final.gap},
                              {"kl_ttrain", r.final.kl_ttrain},
                              {"cka_logits", r.final.cka_logits},
                              {"cka_penult", r.final.cka_penult},
                              {"trainable_t", r.final.trainable_t},
                              {"total_t", r.total_t},
                              {"trainable_s", r.final.trainable_s}});
  }
  if (options.record_wall_clock) {
    json wc = json::array();
    for (const auto& r : runs) wc.push_back({{"config", r.config_name}, {"seed", r.seed}, {"seconds", r.wall_clock_s}});
    report["non_normative"] = {{"wall_clock", wc}};
  }
  std::ofstream out(out_dir / "report.json", std::ios::binary | std::ios::trunc);
  if (!out) throw FileError("cannot write " + (out_dir / "report.json").string());
  out << report.dump(2) << '\n';
}

std::string teacher_cache_key(const DistillConfig& c) {
  json key = {{"teacher", to_json(c.teacher)},
              {"data", to_json(c)["data"]},
              {"pretrain_optimizer", to_json(c)["pretrain_optimizer"]},
              {"pretrain_epochs", c.pretrain_epochs},
              {"batch_size", c.batch_size},
              {"seed", c.seed},
              {"precision", std::string(to_string(c.precision))}};
  return key.dump();
}

}  // namespace

CompareResult compare(const std::vector<DistillConfig>& configs, const std::filesystem::path& out_dir,
                      const CompareOptions& options) {
  if (configs.size() < 2) throw ParameterError("compare needs at least two configs");
  if (options.seeds == 0) throw ParameterError("compare needs at least one seed");
  std::map<std::string, int> names;
  for (const auto& c : configs) {
    if (++names[c.name] > 1) throw SpecError("config name '" + c.name + "' is used twice");
  }
  std::filesystem::create_directories(out_dir);
  if (options.write_run_metrics) std::filesystem::create_directories(out_dir / "runs");

  CompareResult result;
  std::map<std::string, Checkpoint> teachers;
  std::map<std::string, PreparedData> datasets;
  std::string error;
  try {
    for (const auto& base : configs) {
      std::vector<RunResult> runs;
      for (std::size_t k = 0; k < options.seeds; ++k) {
        DistillConfig c = base;
        c.seed = base.seed + k;
        const auto started = std::chrono::steady_clock::now();
        const std::string data_key = to_json(c)["data"].dump();
        if (!datasets.contains(data_key)) datasets.emplace(data_key, prepare_data(c.data, c.teacher.num_classes));
        const auto& data = datasets.at(data_key);

        RunResult run;
        run.config_name = c.name;
        run.seed = c.seed;
        with_precision(c.precision, [&](auto tag) {
          using T = decltype(tag);
          const auto key = teacher_cache_key(c);
          if (!teachers.contains(key)) teachers.emplace(key, make_checkpoint(train_teacher<T>(c, data), &c));
          std::optional<MetricsWriter> writer;
          if (options.write_run_metrics) {
            writer.emplace(out_dir / "runs" / (c.name + "_seed" + std::to_string(c.seed) + ".csv"), kMetricsHeader);
          }
          auto res = distill<T>(c, restore_network<T>(teachers.at(key)), data,
                                DistillOptions{writer ? &*writer : nullptr, 0});
          if (res.records.empty()) throw Error("run produced no epochs");
          run.final = res.records.back();
          run.total_t = count_params(res.teacher.mlp.params(), false);
        });
        run.wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        runs.push_back(run);
        result.runs.push_back(run);
      }
      result.rows.push_back(summarise(base, runs));
    }
  } catch (const std::exception& e) {
    error = e.what();
    write_compare_outputs(out_dir, result.rows, result.runs, options, error);
    throw;
  }
  write_compare_outputs(out_dir, result.rows, result.runs, options, error);
  return result;
}

namespace {

struct EvalOutputs {
  Tensor<double> logits;
  Tensor<double> penultimate;
};

template <class T>
Tensor<double> widen(const Tensor<T>& t) {
  return Tensor<double>(t.shape(), std::vector<double>(t.data().begin(), t.data().end()));
}

EvalOutputs evaluate_checkpoint(const Checkpoint& ckpt, const Dataset& eval) {
  return with_precision(ckpt.precision, [&](auto tag) {
    using T = decltype(tag);
    const auto net = restore_network<T>(ckpt);
    NoGradGuard no_grad;
    const auto trace = net.mlp.forward(full_batch<T>(eval).features);
    return EvalOutputs{widen(trace.logits), widen(trace.penultimate)};
  });
}

json stats_json(const LogitStats& s) {
  return {{"sharpness_mean", s.sharpness_mean},
          {"sharpness_std", s.sharpness_std},
          {"logit_variance_mean", s.variance_mean},
          {"abs_logit_mean", s.abs_logit_mean}};
}

}  // namespace

json diagnose(const Checkpoint& teacher, const Checkpoint& student, const PreparedData& data,
              const DiagnoseOptions& options) {
  std::vector<std::string> diffs;
  if (teacher.model.num_classes != student.model.num_classes) diffs.push_back("num_classes");
  if (teacher.model.input_dim != student.model.input_dim) diffs.push_back("input_dim");
  if (teacher.model.input_dim != data.eval.feature_dim) diffs.push_back("data feature_dim");
  if (teacher.model.num_classes != data.eval.num_classes) diffs.push_back("data num_classes");
  if (!diffs.empty()) throw CompatibilityError("teacher, student and data disagree in: " + join(diffs));

  double tau = 4.0;
  if (options.tau) {
    tau = *options.tau;
  } else if (!student.config.is_null()) {
    tau = config_of(student).tau;
  }

  const auto t = evaluate_checkpoint(teacher, data.eval);
  const auto s = evaluate_checkpoint(student, data.eval);
  const auto ts = logit_stats(t.logits);
  const auto ss = logit_stats(s.logits);
  const auto approx = gap_variance_approx(t.logits, s.logits);
  const auto ht = histogram(ts.major_logit, options.bins, options.hist_lo, options.hist_hi);
  const auto hs = histogram(ss.major_logit, options.bins, options.hist_lo, options.hist_hi);

  if (options.penultimate_prefix) {
    const auto& prefix = options.penultimate_prefix->string();
    export_penultimate(t.penultimate, data.eval.labels, prefix + "_teacher.csv");
    export_penultimate(s.penultimate, data.eval.labels, prefix + "_student.csv");
  }

  return {{"samples", data.eval.num_samples},
          {"tau", tau},
          {"teacher_acc", accuracy(t.logits, data.eval.labels)},
          {"student_acc", accuracy(s.logits, data.eval.labels)},
          {"gap", approx.exact},
          {"gap_approx", approx.approx},
          {"gap_approx_abs_error", approx.abs_error},
          {"teacher", stats_json(ts)},
          {"student", stats_json(ss)},
          {"kl", {{"tau_1", kl_consistency(t.logits, s.logits, 1.0)}, {"tau_train", kl_consistency(t.logits, s.logits, tau)}}},
          {"cka_logits", cka_or_nan(t.logits, s.logits)},
          {"cka_penultimate", cka_or_nan(t.penultimate, s.penultimate)},
          {"major_logit_histogram",
           {{"lo", ht.lo}, {"hi", ht.hi}, {"bins", options.bins}, {"teacher", ht.counts}, {"student", hs.counts}}}};
}

template Network<float> train_teacher(const DistillConfig&, const PreparedData&, MetricsWriter*);
template Network<double> train_teacher(const DistillConfig&, const PreparedData&, MetricsWriter*);
template DistillResult<float> distill(const DistillConfig&, Network<float>, const PreparedData&, const DistillOptions&);
template DistillResult<double> distill(const DistillConfig&, Network<double>, const PreparedData&,
                                       const DistillOptions&);
template MetricsRecord evaluate_pair(const Network<float>&, const Network<float>&, const Dataset&, double);
template MetricsRecord evaluate_pair(const Network<double>&, const Network<double>&, const Dataset&, double);
template double accuracy(const Tensor<float>&, const std::vector<int>&);
template double accuracy(const Tensor<double>&, const std::vector<int>&);

}  // namespace pesfkd
