#pragma once

#include <chrono>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tgnn/config.hpp"
#include "tgnn/core.hpp"
#include "tgnn/rwkernel.hpp"
#include "tgnn/split.hpp"
#include "tgnn/synthetic.hpp"
#include "tgnn/trainer.hpp"
#include "tgnn/tu_io.hpp"

namespace tgnn {

// Experiment runner: per-seed split/train/evaluate with aggregated accuracy,
// plus parameter sweeps and hidden-graph export.

struct RunReport {
  std::string variant;
  std::vector<std::uint64_t> seeds;
  std::vector<double> seed_accuracies;
  double mean_accuracy = 0.0;
  double stddev_accuracy = 0.0;  // population standard deviation
  double wall_seconds = 0.0;
  std::string config_echo;
};

inline void compute_report_stats(RunReport& report) {
  const size_t n = report.seed_accuracies.size();
  double mean = 0;
  for (double a : report.seed_accuracies) mean += a;
  mean /= static_cast<double>(n);
  double var = 0;
  for (double a : report.seed_accuracies) var += (a - mean) * (a - mean);
  report.mean_accuracy = mean;
  report.stddev_accuracy = std::sqrt(var / static_cast<double>(n));
}

inline Dataset prepare_dataset(const RunConfig& cfg) {
  Dataset ds = cfg.dataset == "synthetic"
                   ? make_synthetic_dataset(cfg.synthetic_per_class, cfg.synthetic_min_nodes,
                                            cfg.synthetic_max_nodes, cfg.synthetic_seed)
                   : load_tu_dataset(cfg.dataset);
  if (!dataset_has_features(ds)) apply_degree_features(ds, cfg.max_degree);
  return ds;
}

inline ModelDims make_model_dims(const RunConfig& cfg, const Dataset& ds) {
  ModelDims dims;
  dims.input_dim = ds.graphs.empty() ? 0 : ds.graphs.front().feature_dim;
  dims.num_classes = ds.num_classes;
  dims.embed_dim = cfg.embed_dim;
  dims.mpnn_layers = cfg.mpnn_layers;
  dims.hidden_graphs = cfg.hidden_graphs;
  dims.hidden_nodes = cfg.hidden_nodes;
  dims.walk_length = cfg.walk_length;
  dims.kernel_log1p = cfg.kernel_log1p;
  return dims;
}

// Variant wiring for views: the full model and both ensembles augment; the
// purely supervised baselines and the no-aug variant see clean graphs.
inline Augmenter make_augmenter(const RunConfig& cfg, const Dataset& ds) {
  const Variant variant = variant_from_name(cfg.variant);
  AugmentConfig ac;
  ac.edge_drop_ratio = cfg.aug_edge_drop;
  ac.node_drop_ratio = cfg.aug_node_drop;
  ac.attr_mask_ratio = cfg.aug_attr_mask;
  ac.subgraph_ratio = cfg.aug_subgraph;
  if (variant == Variant::no_aug || variant == Variant::mp_sup || variant == Variant::gk_sup) {
    ac.enabled = {AugmentKind::identity};
  } else {
    ac.enabled.clear();
    for (const auto& kind : cfg.aug_kinds) ac.enabled.push_back(augment_kind_from_name(kind));
  }
  return Augmenter(ac, dataset_mean_feature(ds));
}

inline TrainConfig make_train_config(const RunConfig& cfg, std::uint64_t seed) {
  TrainConfig tc;
  tc.epochs = cfg.epochs;
  tc.batch_size = cfg.batch_size;
  tc.learning_rate = cfg.learning_rate;
  tc.adam_beta1 = cfg.adam_beta1;
  tc.adam_beta2 = cfg.adam_beta2;
  tc.adam_epsilon = cfg.adam_epsilon;
  tc.tau = cfg.tau;
  tc.lambda = cfg.lambda;
  tc.bank_capacity = cfg.bank_capacity;
  tc.seed = seed;
  return tc;
}

inline std::string history_csv(const std::vector<EpochStats>& history) {
  std::ostringstream os;
  os << "epoch,sup_loss,con_loss,val_acc\n";
  for (const auto& e : history)
    os << e.epoch << "," << format_double(e.sup_loss) << "," << format_double(e.con_loss) << ","
       << format_double(e.val_acc) << "\n";
  return os.str();
}

struct SeedRunResult {
  double test_accuracy = 0.0;
  FitResult fit_result;
  TwinModel model;
};

// One complete train/evaluate cycle for a single seed.
inline SeedRunResult run_single_seed(const RunConfig& cfg, const Dataset& ds, std::uint64_t seed) {
  SplitDataset split = split_dataset(ds, cfg.split_ratios, seed);
  apply_label_ratio(split, ds, cfg.label_ratio, seed);

  SeedRunResult out;
  out.model = TwinModel::init(variant_from_name(cfg.variant), make_model_dims(cfg, ds), seed);
  const Augmenter augmenter = make_augmenter(cfg, ds);
  out.fit_result = fit(out.model, ds, split, make_train_config(cfg, seed), augmenter);
  out.test_accuracy = evaluate(out.model, ds, split.test).accuracy;
  return out;
}

inline RunReport run_experiment(const RunConfig& cfg, bool write_outputs = true) {
  validate_config(cfg);
  namespace fs = std::filesystem;
  const auto t0 = std::chrono::steady_clock::now();
  const Dataset ds = prepare_dataset(cfg);

  RunReport report;
  report.variant = cfg.variant;
  report.seeds = cfg.seeds;
  report.config_echo = serialize_config(cfg);
  if (write_outputs) fs::create_directories(cfg.out_dir);

  for (std::uint64_t seed : cfg.seeds) {
    SeedRunResult res = run_single_seed(cfg, ds, seed);
    report.seed_accuracies.push_back(res.test_accuracy);
    if (write_outputs) {
      const std::string tag = "seed" + std::to_string(seed);
      write_text_file((fs::path(cfg.out_dir) / ("history_" + tag + ".csv")).string(),
                      history_csv(res.fit_result.history));
      save_checkpoint(res.model.to_checkpoint(),
                      (fs::path(cfg.out_dir) / ("model_" + tag + ".ckpt")).string());
    }
  }
  compute_report_stats(report);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  if (write_outputs) {
    std::ostringstream os;
    os << "seed,test_accuracy\n";
    for (size_t i = 0; i < report.seeds.size(); ++i)
      os << report.seeds[i] << "," << format_double(report.seed_accuracies[i]) << "\n";
    os << "mean," << format_double(report.mean_accuracy) << "\n";
    os << "std," << format_double(report.stddev_accuracy) << "\n";
    write_text_file((fs::path(cfg.out_dir) / "report.csv").string(), os.str());
    write_text_file((fs::path(cfg.out_dir) / "config_echo.txt").string(), report.config_echo);
  }
  return report;
}

// Grid sweep over one hyperparameter; one RunReport per value.
inline std::vector<RunReport> sweep(const RunConfig& base, const std::string& parameter,
                                    const std::vector<double>& values, bool write_outputs = true) {
  std::vector<RunReport> reports;
  for (double value : values) {
    RunConfig cfg = base;
    if (parameter == "d") cfg.embed_dim = static_cast<int>(value);
    else if (parameter == "P") cfg.walk_length = static_cast<int>(value);
    else if (parameter == "label_ratio") cfg.label_ratio = value;
    else if (parameter == "lambda") cfg.lambda = value;
    else if (parameter == "M") cfg.bank_capacity = static_cast<int>(value);
    else throw std::runtime_error("sweep: unsupported parameter " + parameter +
                                  " (expected one of d, P, label_ratio, lambda, M)");
    cfg.out_dir = base.out_dir + "/" + parameter + "_" + format_double(value);
    reports.push_back(run_experiment(cfg, write_outputs));
  }
  if (write_outputs && !values.empty()) {
    std::ostringstream os;
    os << "parameter,value,mean_accuracy,std_accuracy\n";
    for (size_t i = 0; i < values.size(); ++i)
      os << parameter << "," << format_double(values[i]) << ","
         << format_double(reports[i].mean_accuracy) << ","
         << format_double(reports[i].stddev_accuracy) << "\n";
    namespace fs = std::filesystem;
    fs::create_directories(base.out_dir);
    write_text_file((fs::path(base.out_dir) / ("sweep_" + parameter + ".csv")).string(), os.str());
  }
  return reports;
}

// Writes one DOT file per hidden graph of a trained checkpoint plus a JSON
// manifest describing them.
inline std::vector<std::string> export_hidden_graphs_from_checkpoint(const std::string& ckpt_path,
                                                                     double threshold,
                                                                     const std::string& out_dir) {
  namespace fs = std::filesystem;
  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  TwinModel model = TwinModel::from_checkpoint(ckpt);

  const KernelParams* kernel = nullptr;
  if (model.secondary && model.secondary->is_kernel()) kernel = &*model.secondary->kernel;
  else if (model.primary.is_kernel()) kernel = &*model.primary.kernel;
  if (!kernel) throw std::runtime_error("export: checkpoint has no graph kernel module");

  fs::create_directories(out_dir);
  const auto edge_lists = hidden_graph_edges(*kernel, threshold);
  nlohmann::json manifest;
  manifest["checkpoint"] = ckpt_path;
  manifest["threshold"] = threshold;
  manifest["graphs"] = nlohmann::json::array();
  std::vector<std::string> files;
  for (size_t i = 0; i < edge_lists.size(); ++i) {
    const std::string name = "hidden_" + std::to_string(i);
    const std::string file = name + ".dot";
    const int nodes = kernel->hidden.graphs[i].num_nodes;
    write_text_file((fs::path(out_dir) / file).string(),
                    hidden_graph_dot(edge_lists[i], nodes, name));
    manifest["graphs"].push_back({{"file", file}, {"nodes", nodes}, {"edges", edge_lists[i].size()}});
    files.push_back(file);
  }
  write_text_file((fs::path(out_dir) / "manifest.json").string(), manifest.dump(2) + "\n");
  return files;
}

}  // namespace tgnn
