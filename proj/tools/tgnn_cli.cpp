#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tgnn/tgnn.hpp"

namespace {

tgnn::RunConfig build_config(const std::string& config_path,
                             const std::vector<std::string>& overrides) {
  tgnn::RunConfig cfg;
  if (!config_path.empty()) cfg = tgnn::load_run_config(config_path);
  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("--set expects key=value, got '" + kv + "'");
    tgnn::apply_config_override(cfg, tgnn::trim(kv.substr(0, eq)), kv.substr(eq + 1));
  }
  tgnn::validate_config(cfg);
  return cfg;
}

void print_report(const tgnn::RunReport& report) {
  std::printf("variant %s over %zu seed(s)\n", report.variant.c_str(), report.seeds.size());
  for (size_t i = 0; i < report.seeds.size(); ++i)
    std::printf("  seed %llu: test accuracy %.4f\n",
                static_cast<unsigned long long>(report.seeds[i]), report.seed_accuracies[i]);
  std::printf("  mean %.4f  std %.4f  (%.1fs)\n", report.mean_accuracy, report.stddev_accuracy,
              report.wall_seconds);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semi-supervised graph classification with twin encoders"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  app.add_option("-c,--config", config_path, "Run configuration file (key = value lines)");
  app.add_option("-s,--set", overrides, "Override a config key, e.g. --set epochs=50")
      ->take_all();

  auto* run_cmd = app.add_subcommand("run", "Train and evaluate over the configured seeds");

  auto* sweep_cmd = app.add_subcommand("sweep", "Grid sweep over one hyperparameter");
  std::string sweep_param;
  std::vector<double> sweep_values;
  sweep_cmd->add_option("parameter", sweep_param, "One of: d, P, label_ratio, lambda, M")
      ->required();
  sweep_cmd->add_option("values", sweep_values, "Values to sweep")->expected(-1);

  auto* export_cmd = app.add_subcommand("export", "Dump hidden graphs of a checkpoint as DOT");
  std::string ckpt_path, export_dir = "export";
  double threshold = 0.0;
  export_cmd->add_option("checkpoint", ckpt_path, "Checkpoint file written by run")->required();
  export_cmd->add_option("-o,--out", export_dir, "Output directory");
  export_cmd->add_option("-t,--threshold", threshold, "Minimum edge weight to keep");

  auto* check_cmd = app.add_subcommand("check", "Run the gradient/oracle self-test suite");
  std::uint64_t check_seed = 12345;
  check_cmd->add_option("--seed", check_seed, "Seed for the randomized checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      const tgnn::RunConfig cfg = build_config(config_path, overrides);
      print_report(tgnn::run_experiment(cfg));
      std::printf("outputs under %s\n", cfg.out_dir.c_str());
    } else if (sweep_cmd->parsed()) {
      tgnn::RunConfig cfg = build_config(config_path, overrides);
      auto reports = tgnn::sweep(cfg, sweep_param, sweep_values);
      for (size_t i = 0; i < reports.size(); ++i) {
        std::printf("%s = %s\n", sweep_param.c_str(), tgnn::format_double(sweep_values[i]).c_str());
        print_report(reports[i]);
      }
      if (reports.empty()) std::printf("no values given; empty sweep\n");
    } else if (export_cmd->parsed()) {
      auto files = tgnn::export_hidden_graphs_from_checkpoint(ckpt_path, threshold, export_dir);
      std::printf("wrote %zu DOT file(s) and manifest.json under %s\n", files.size(),
                  export_dir.c_str());
    } else if (check_cmd->parsed()) {
      bool all_pass = true;
      for (const auto& r : tgnn::run_self_checks(check_seed)) {
        std::printf("[%s] %s: %s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
        all_pass = all_pass && r.pass;
      }
      if (!all_pass) return 1;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
