#pragma once

#include <array>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "tgnn/augment.hpp"
#include "tgnn/io_util.hpp"
#include "tgnn/trainer.hpp"

namespace tgnn {

// Flat key=value run configuration ('#' starts a comment). Every key can
// also be overridden from the command line, which keeps sweep scripts
// diffable. Unknown keys are errors.
struct RunConfig {
  std::string dataset = "synthetic";  // "synthetic" or a TU-format directory
  int max_degree = 64;                // degree one-hot bound for attribute-less datasets
  std::array<int, 4> split_ratios{2, 5, 1, 2};
  std::string variant = "tgnn";
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  double label_ratio = 1.0;

  int embed_dim = 64;     // d
  int mpnn_layers = 3;    // K
  int hidden_graphs = 16; // N
  int hidden_nodes = 5;
  int walk_length = 3;    // P
  bool kernel_log1p = false;

  double tau = 0.5;
  double lambda = 1.0;
  int bank_capacity = 256;
  int epochs = 300;
  int batch_size = 64;
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;

  double aug_edge_drop = 0.2;
  double aug_node_drop = 0.2;
  double aug_attr_mask = 0.2;
  double aug_subgraph = 0.2;
  std::vector<std::string> aug_kinds{"edge_drop", "node_drop", "attr_mask", "subgraph"};

  std::string out_dir = "runs/default";

  int synthetic_per_class = 100;
  int synthetic_min_nodes = 6;
  int synthetic_max_nodes = 12;
  std::uint64_t synthetic_seed = 1;
};

namespace detail_cfg {

inline bool parse_bool(const std::string& v, const char* what) {
  if (v == "1" || v == "true" || v == "on") return true;
  if (v == "0" || v == "false" || v == "off") return false;
  throw std::runtime_error(std::string(what) + ": expected boolean, got '" + v + "'");
}

}  // namespace detail_cfg

inline void apply_config_override(RunConfig& cfg, const std::string& key, const std::string& raw) {
  const std::string value = trim(raw);
  if (key == "dataset") cfg.dataset = value;
  else if (key == "max_degree") cfg.max_degree = static_cast<int>(parse_long(value, "max_degree"));
  else if (key == "split_ratios") {
    const auto parts = split(value, ',');
    if (parts.size() != 4) throw std::runtime_error("split_ratios: expected four comma-separated shares");
    for (int i = 0; i < 4; ++i) cfg.split_ratios[i] = static_cast<int>(parse_long(parts[i], "split_ratios"));
  } else if (key == "variant") cfg.variant = value;
  else if (key == "seeds") {
    cfg.seeds.clear();
    for (const auto& part : split(value, ','))
      cfg.seeds.push_back(static_cast<std::uint64_t>(parse_long(part, "seeds")));
  } else if (key == "label_ratio") cfg.label_ratio = parse_double(value, "label_ratio");
  else if (key == "embed_dim") cfg.embed_dim = static_cast<int>(parse_long(value, "embed_dim"));
  else if (key == "mpnn_layers") cfg.mpnn_layers = static_cast<int>(parse_long(value, "mpnn_layers"));
  else if (key == "hidden_graphs") cfg.hidden_graphs = static_cast<int>(parse_long(value, "hidden_graphs"));
  else if (key == "hidden_nodes") cfg.hidden_nodes = static_cast<int>(parse_long(value, "hidden_nodes"));
  else if (key == "walk_length") cfg.walk_length = static_cast<int>(parse_long(value, "walk_length"));
  else if (key == "kernel_log1p") cfg.kernel_log1p = detail_cfg::parse_bool(value, "kernel_log1p");
  else if (key == "tau") cfg.tau = parse_double(value, "tau");
  else if (key == "lambda") cfg.lambda = parse_double(value, "lambda");
  else if (key == "bank_capacity") cfg.bank_capacity = static_cast<int>(parse_long(value, "bank_capacity"));
  else if (key == "epochs") cfg.epochs = static_cast<int>(parse_long(value, "epochs"));
  else if (key == "batch_size") cfg.batch_size = static_cast<int>(parse_long(value, "batch_size"));
  else if (key == "learning_rate") cfg.learning_rate = parse_double(value, "learning_rate");
  else if (key == "adam_beta1") cfg.adam_beta1 = parse_double(value, "adam_beta1");
  else if (key == "adam_beta2") cfg.adam_beta2 = parse_double(value, "adam_beta2");
  else if (key == "adam_epsilon") cfg.adam_epsilon = parse_double(value, "adam_epsilon");
  else if (key == "aug_edge_drop") cfg.aug_edge_drop = parse_double(value, "aug_edge_drop");
  else if (key == "aug_node_drop") cfg.aug_node_drop = parse_double(value, "aug_node_drop");
  else if (key == "aug_attr_mask") cfg.aug_attr_mask = parse_double(value, "aug_attr_mask");
  else if (key == "aug_subgraph") cfg.aug_subgraph = parse_double(value, "aug_subgraph");
  else if (key == "aug_kinds") {
    cfg.aug_kinds.clear();
    for (const auto& part : split(value, ',')) cfg.aug_kinds.push_back(trim(part));
  } else if (key == "out_dir") cfg.out_dir = value;
  else if (key == "synthetic_per_class") cfg.synthetic_per_class = static_cast<int>(parse_long(value, "synthetic_per_class"));
  else if (key == "synthetic_min_nodes") cfg.synthetic_min_nodes = static_cast<int>(parse_long(value, "synthetic_min_nodes"));
  else if (key == "synthetic_max_nodes") cfg.synthetic_max_nodes = static_cast<int>(parse_long(value, "synthetic_max_nodes"));
  else if (key == "synthetic_seed") cfg.synthetic_seed = static_cast<std::uint64_t>(parse_long(value, "synthetic_seed"));
  else throw std::runtime_error("unknown config key: " + key);
}

inline void validate_config(const RunConfig& cfg) {
  variant_from_name(cfg.variant);  // throws on unknown variant
  if (cfg.seeds.empty()) throw std::runtime_error("config: seeds must be nonempty");
  if (!(cfg.label_ratio > 0.0 && cfg.label_ratio <= 1.0))
    throw std::runtime_error("config: label_ratio must be in (0, 1]");
  if (cfg.embed_dim < 1 || cfg.mpnn_layers < 1 || cfg.hidden_graphs < 1 || cfg.hidden_nodes < 2 ||
      cfg.walk_length < 1)
    throw std::runtime_error("config: model dimensions must be positive");
  if (!(cfg.tau > 0.0)) throw std::runtime_error("config: tau must be positive");
  if (cfg.bank_capacity < 1 || cfg.epochs < 0 || cfg.batch_size < 1)
    throw std::runtime_error("config: bad training sizes");
  for (const auto& kind : cfg.aug_kinds) augment_kind_from_name(kind);  // throws on typo
}

inline RunConfig parse_run_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(lineno) + ": expected key = value");
    apply_config_override(cfg, trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  return cfg;
}

inline RunConfig load_run_config(const std::string& path) { return parse_run_config(read_text_file(path)); }

inline std::string serialize_config(const RunConfig& cfg) {
  std::ostringstream os;
  os << "dataset = " << cfg.dataset << "\n";
  os << "max_degree = " << cfg.max_degree << "\n";
  os << "split_ratios = " << cfg.split_ratios[0] << "," << cfg.split_ratios[1] << ","
     << cfg.split_ratios[2] << "," << cfg.split_ratios[3] << "\n";
  os << "variant = " << cfg.variant << "\n";
  os << "seeds = ";
  for (size_t i = 0; i < cfg.seeds.size(); ++i) os << (i ? "," : "") << cfg.seeds[i];
  os << "\n";
  os << "label_ratio = " << format_double(cfg.label_ratio) << "\n";
  os << "embed_dim = " << cfg.embed_dim << "\n";
  os << "mpnn_layers = " << cfg.mpnn_layers << "\n";
  os << "hidden_graphs = " << cfg.hidden_graphs << "\n";
  os << "hidden_nodes = " << cfg.hidden_nodes << "\n";
  os << "walk_length = " << cfg.walk_length << "\n";
  os << "kernel_log1p = " << (cfg.kernel_log1p ? "true" : "false") << "\n";
  os << "tau = " << format_double(cfg.tau) << "\n";
  os << "lambda = " << format_double(cfg.lambda) << "\n";
  os << "bank_capacity = " << cfg.bank_capacity << "\n";
  os << "epochs = " << cfg.epochs << "\n";
  os << "batch_size = " << cfg.batch_size << "\n";
  os << "learning_rate = " << format_double(cfg.learning_rate) << "\n";
  os << "adam_beta1 = " << format_double(cfg.adam_beta1) << "\n";
  os << "adam_beta2 = " << format_double(cfg.adam_beta2) << "\n";
  os << "adam_epsilon = " << format_double(cfg.adam_epsilon) << "\n";
  os << "aug_edge_drop = " << format_double(cfg.aug_edge_drop) << "\n";
  os << "aug_node_drop = " << format_double(cfg.aug_node_drop) << "\n";
  os << "aug_attr_mask = " << format_double(cfg.aug_attr_mask) << "\n";
  os << "aug_subgraph = " << format_double(cfg.aug_subgraph) << "\n";
  os << "aug_kinds = ";
  for (size_t i = 0; i < cfg.aug_kinds.size(); ++i) os << (i ? "," : "") << cfg.aug_kinds[i];
  os << "\n";
  os << "out_dir = " << cfg.out_dir << "\n";
  os << "synthetic_per_class = " << cfg.synthetic_per_class << "\n";
  os << "synthetic_min_nodes = " << cfg.synthetic_min_nodes << "\n";
  os << "synthetic_max_nodes = " << cfg.synthetic_max_nodes << "\n";
  os << "synthetic_seed = " << cfg.synthetic_seed << "\n";
  return os.str();
}

}  // namespace tgnn
