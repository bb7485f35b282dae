// SPDX-License-Identifier: Apache-2.0
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "pesfkd/errors.hpp"
#include "pesfkd/experiment.hpp"

namespace fs = std::filesystem;
using namespace pesfkd;

namespace {

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  for (std::string part; std::getline(in, part, ',');) {
    if (!part.empty()) out.push_back(part);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Teacher/student distillation harness"};
  app.require_subcommand(1);

  std::string config_path, out_path, data_arg, metrics_path, teacher_path, student_path, report_path, teacher_out;
  std::string configs_arg, penultimate;
  std::size_t seeds = 5;
  double tau = 0;
  bool wall_clock = false;

  auto* train = app.add_subcommand("train-teacher", "pre-train a teacher on the task loss");
  train->add_option("--config", config_path, "experiment config (JSON)")->required();
  train->add_option("--out", out_path, "output checkpoint")->required();
  train->add_option("--data", data_arg, "'synthetic' or a CSV path (overrides data.source)");
  train->add_option("--metrics", metrics_path, "per-epoch CSV (default: <out>.metrics.csv)");

  auto* dist = app.add_subcommand("distill", "joint teacher/student training from a teacher checkpoint");
  dist->add_option("--config", config_path, "experiment config (JSON)")->required();
  dist->add_option("--teacher", teacher_path, "teacher checkpoint")->required();
  dist->add_option("--out", out_path, "student checkpoint")->required();
  dist->add_option("--metrics", metrics_path, "per-epoch metrics CSV")->required();
  dist->add_option("--teacher-out", teacher_out, "also save the trained teacher here");

  auto* diag = app.add_subcommand("diagnose", "consistency report for a teacher/student pair");
  diag->add_option("--teacher", teacher_path, "teacher checkpoint")->required();
  diag->add_option("--student", student_path, "student checkpoint")->required();
  diag->add_option("--data", data_arg, "'synthetic' or a CSV path")->required();
  diag->add_option("--report", report_path, "output JSON")->required();
  auto* tau_opt = diag->add_option("--tau", tau, "KL temperature (default: student config tau)");
  diag->add_option("--penultimate", penultimate, "write <prefix>_teacher.csv and <prefix>_student.csv");

  auto* cmp = app.add_subcommand("compare", "multi-seed comparison of several configs");
  cmp->add_option("--configs", configs_arg, "comma-separated config paths")->required();
  cmp->add_option("--seeds", seeds, "runs per config")->check(CLI::PositiveNumber);
  cmp->add_option("--out", out_path, "output directory")->required();
  cmp->add_flag("--wall-clock", wall_clock, "record non-normative wall-clock seconds in report.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*train) {
      auto cfg = load_config(config_path);
      if (!data_arg.empty()) cfg.data.source = data_arg;
      run_train_teacher(cfg, out_path, metrics_path.empty() ? out_path + ".metrics.csv" : metrics_path);
    } else if (*dist) {
      run_distill(load_config(config_path), teacher_path, out_path, metrics_path,
                  teacher_out.empty() ? std::nullopt : std::optional<fs::path>(teacher_out));
    } else if (*diag) {
      const auto t = load_checkpoint(teacher_path);
      const auto s = load_checkpoint(student_path);
      auto data_cfg = config_of(s.config.is_null() ? t : s).data;
      data_cfg.source = data_arg;
      DiagnoseOptions opts;
      if (*tau_opt) opts.tau = tau;
      if (!penultimate.empty()) opts.penultimate_prefix = penultimate;
      const auto report = diagnose(t, s, prepare_data(data_cfg, t.model.num_classes), opts);
      std::ofstream out(report_path, std::ios::binary | std::ios::trunc);
      if (!out) throw FileError("cannot write " + report_path);
      out << report.dump(2) << '\n';
    } else if (*cmp) {
      const auto paths = split_commas(configs_arg);
      if (paths.size() < 2) {
        std::cerr << "compare: --configs needs at least two paths\n";
        return 1;
      }
      std::vector<DistillConfig> configs;
      for (const auto& p : paths) configs.push_back(load_config(p));
      CompareOptions opts;
      opts.seeds = seeds;
      opts.record_wall_clock = wall_clock;
      const auto res = compare(configs, out_path, opts);
      for (const auto& row : res.rows) {
        std::cout << row.name << ": student_acc " << row.student_acc_mean << " +/- " << row.student_acc_std
                  << ", |gap| " << row.abs_gap_mean << ", trainable teacher params " << row.trainable_t << '/'
                  << row.total_t << '\n';
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
