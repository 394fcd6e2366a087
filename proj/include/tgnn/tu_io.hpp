#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "tgnn/core.hpp"
#include "tgnn/io_util.hpp"

namespace tgnn {

// Loader/writer for the published TU benchmark layout:
//   <name>_A.txt               comma-separated 1-based edge pairs
//   <name>_graph_indicator.txt 1-based graph id per node line
//   <name>_graph_labels.txt    one label per graph line
//   <name>_node_labels.txt     one integer per node line (optional)
//   <name>_node_attributes.txt comma-separated reals per node line (optional)

namespace detail_tu {

inline std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("tu: missing file " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (!t.empty()) lines.push_back(t);
  }
  return lines;
}

inline std::string detect_prefix(const std::string& dir) {
  namespace fs = std::filesystem;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.size() > 6 && name.ends_with("_A.txt")) return name.substr(0, name.size() - 6);
  }
  throw std::runtime_error("tu: no *_A.txt found in " + dir);
}

}  // namespace detail_tu

inline Dataset load_tu_dataset(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw std::runtime_error("tu: not a directory: " + dir);
  const std::string prefix = detail_tu::detect_prefix(dir);
  const std::string base = (fs::path(dir) / prefix).string();

  const auto indicator_lines = detail_tu::read_lines(base + "_graph_indicator.txt");
  const auto label_lines = detail_tu::read_lines(base + "_graph_labels.txt");
  const auto edge_lines = detail_tu::read_lines(base + "_A.txt");

  const int total_nodes = static_cast<int>(indicator_lines.size());
  const int num_graphs = static_cast<int>(label_lines.size());

  // node -> graph and node -> index within its graph
  std::vector<int> node_graph(total_nodes), node_local(total_nodes);
  std::vector<int> graph_size(num_graphs, 0);
  for (int i = 0; i < total_nodes; ++i) {
    const long gid = parse_long(indicator_lines[i], "tu graph_indicator");
    if (gid < 1 || gid > num_graphs)
      throw std::runtime_error("tu: graph_indicator id out of range: " + std::to_string(gid));
    node_graph[i] = static_cast<int>(gid - 1);
    node_local[i] = graph_size[node_graph[i]]++;
  }

  Dataset ds;
  ds.name = prefix;
  ds.graphs.resize(num_graphs);
  for (int g = 0; g < num_graphs; ++g) ds.graphs[g].num_nodes = graph_size[g];

  for (const auto& line : edge_lines) {
    const auto parts = split(line, ',');
    if (parts.size() != 2) throw std::runtime_error("tu: malformed edge line: " + line);
    const long u = parse_long(parts[0], "tu edge");
    const long v = parse_long(parts[1], "tu edge");
    if (u < 1 || v < 1 || u > total_nodes || v > total_nodes)
      throw std::runtime_error("tu: edge endpoint out of range: " + line);
    const int ui = static_cast<int>(u - 1), vi = static_cast<int>(v - 1);
    if (node_graph[ui] != node_graph[vi]) throw std::runtime_error("tu: edge crosses graphs: " + line);
    ds.graphs[node_graph[ui]].edges.emplace_back(node_local[ui], node_local[vi]);
  }
  for (auto& g : ds.graphs) canonicalize_edges(g.edges);  // dedups the two directions

  // graph labels, remapped to 0..C-1 in sorted order
  std::vector<long> raw_labels(num_graphs);
  std::set<long> distinct;
  for (int g = 0; g < num_graphs; ++g) {
    raw_labels[g] = parse_long(label_lines[g], "tu graph_labels");
    distinct.insert(raw_labels[g]);
  }
  std::map<long, int> remap;
  for (long v : distinct) remap.emplace(v, static_cast<int>(remap.size()));
  for (int g = 0; g < num_graphs; ++g) ds.graphs[g].label = remap.at(raw_labels[g]);
  ds.num_classes = static_cast<int>(remap.size());

  // optional node labels (one-hot) and/or attributes, concatenated
  std::vector<std::vector<double>> onehot, attrs;
  int onehot_dim = 0, attr_dim = 0;
  if (fs::exists(base + "_node_labels.txt")) {
    const auto lines = detail_tu::read_lines(base + "_node_labels.txt");
    if (static_cast<int>(lines.size()) != total_nodes)
      throw std::runtime_error("tu: node_labels line count differs from graph_indicator");
    std::vector<long> vals(total_nodes);
    std::set<long> seen;
    for (int i = 0; i < total_nodes; ++i) {
      vals[i] = parse_long(lines[i], "tu node_labels");
      seen.insert(vals[i]);
    }
    std::map<long, int> lmap;
    for (long v : seen) lmap.emplace(v, static_cast<int>(lmap.size()));
    onehot_dim = static_cast<int>(lmap.size());
    onehot.assign(total_nodes, std::vector<double>(onehot_dim, 0.0));
    for (int i = 0; i < total_nodes; ++i) onehot[i][lmap.at(vals[i])] = 1.0;
  }
  if (fs::exists(base + "_node_attributes.txt")) {
    const auto lines = detail_tu::read_lines(base + "_node_attributes.txt");
    if (static_cast<int>(lines.size()) != total_nodes)
      throw std::runtime_error("tu: node_attributes line count differs from graph_indicator");
    attrs.resize(total_nodes);
    for (int i = 0; i < total_nodes; ++i) {
      for (const auto& part : split(lines[i], ',')) attrs[i].push_back(parse_double(part, "tu node_attributes"));
      if (i == 0)
        attr_dim = static_cast<int>(attrs[0].size());
      else if (static_cast<int>(attrs[i].size()) != attr_dim)
        throw std::runtime_error("tu: ragged node_attributes rows");
    }
  }

  const int feature_dim = onehot_dim + attr_dim;
  if (feature_dim > 0) {
    for (int g = 0; g < num_graphs; ++g) {
      ds.graphs[g].feature_dim = feature_dim;
      ds.graphs[g].features.assign(static_cast<size_t>(graph_size[g]) * feature_dim, 0.0);
    }
    for (int i = 0; i < total_nodes; ++i) {
      Graph& g = ds.graphs[node_graph[i]];
      double* row = &g.features[static_cast<size_t>(node_local[i]) * feature_dim];
      for (int j = 0; j < onehot_dim; ++j) row[j] = onehot[i][j];
      for (int j = 0; j < attr_dim; ++j) row[onehot_dim + j] = attrs[i][j];
    }
  }

  validate_dataset(ds);
  return ds;
}

// Writes the dataset back in TU layout (features go to node_attributes).
// Each undirected edge is listed in both directions, as published files do.
inline void write_tu_dataset(const Dataset& ds, const std::string& dir, const std::string& name) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const std::string base = (fs::path(dir) / name).string();

  std::ofstream a(base + "_A.txt"), ind(base + "_graph_indicator.txt"), lab(base + "_graph_labels.txt");
  std::ofstream attr;
  const bool has_features = dataset_has_features(ds);
  if (has_features) attr.open(base + "_node_attributes.txt");

  int node_base = 0, gid = 0;
  for (const auto& g : ds.graphs) {
    ++gid;
    for (const auto& [u, v] : g.edges) {
      a << (node_base + u + 1) << ", " << (node_base + v + 1) << "\n";
      a << (node_base + v + 1) << ", " << (node_base + u + 1) << "\n";
    }
    for (int v = 0; v < g.num_nodes; ++v) {
      ind << gid << "\n";
      if (has_features) {
        for (int j = 0; j < g.feature_dim; ++j) attr << (j ? ", " : "") << format_double(g.feature(v, j));
        attr << "\n";
      }
    }
    lab << (g.label ? *g.label : 0) << "\n";
    node_base += g.num_nodes;
  }
}

}  // namespace tgnn
