#pragma once

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tgnn {

// Undirected graph with a dense node-feature matrix. Edges are stored as
// canonical (u < v) pairs, sorted and deduplicated, never self-loops.
struct Graph {
  int num_nodes = 0;
  std::vector<std::pair<int, int>> edges;
  std::vector<double> features;  // row-major, num_nodes x feature_dim
  int feature_dim = 0;
  std::optional<int> label;

  double feature(int node, int j) const { return features[static_cast<size_t>(node) * feature_dim + j]; }
  double& feature(int node, int j) { return features[static_cast<size_t>(node) * feature_dim + j]; }
};

// Normalizes an edge list in place: orient u < v, drop self-loops, sort, dedup.
inline void canonicalize_edges(std::vector<std::pair<int, int>>& edges) {
  for (auto& e : edges) {
    if (e.first > e.second) std::swap(e.first, e.second);
  }
  std::erase_if(edges, [](const auto& e) { return e.first == e.second; });
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
}

inline void validate_graph(const Graph& g, int num_classes = -1) {
  if (g.num_nodes < 0) throw std::invalid_argument("graph: negative node count");
  for (const auto& [u, v] : g.edges) {
    if (u < 0 || v < 0 || u >= g.num_nodes || v >= g.num_nodes)
      throw std::invalid_argument("graph: edge endpoint out of range");
    if (u == v) throw std::invalid_argument("graph: self-loop");
    if (u > v) throw std::invalid_argument("graph: edge not in canonical (u < v) order");
  }
  for (size_t i = 1; i < g.edges.size(); ++i)
    if (!(g.edges[i - 1] < g.edges[i])) throw std::invalid_argument("graph: duplicate or unsorted edge");
  if (g.features.size() != static_cast<size_t>(g.num_nodes) * g.feature_dim)
    throw std::invalid_argument("graph: feature matrix size mismatch");
  if (g.label && num_classes >= 0 && (*g.label < 0 || *g.label >= num_classes))
    throw std::invalid_argument("graph: label out of range");
}

inline std::vector<std::vector<int>> adjacency_lists(const Graph& g) {
  std::vector<std::vector<int>> nbrs(g.num_nodes);
  for (const auto& [u, v] : g.edges) {
    nbrs[u].push_back(v);
    nbrs[v].push_back(u);
  }
  for (auto& n : nbrs) std::sort(n.begin(), n.end());
  return nbrs;
}

inline std::vector<int> degrees(const Graph& g) {
  std::vector<int> deg(g.num_nodes, 0);
  for (const auto& [u, v] : g.edges) {
    ++deg[u];
    ++deg[v];
  }
  return deg;
}

struct Dataset {
  std::vector<Graph> graphs;
  int num_classes = 0;
  std::string name;
};

inline void validate_dataset(const Dataset& ds) {
  for (const auto& g : ds.graphs) validate_graph(g, ds.num_classes);
}

// One-hot degree encoding for datasets without node attributes. Degrees at or
// above max_degree land in the last bucket, so feature_dim = max_degree + 1.
inline Graph degree_features(const Graph& g, int max_degree) {
  if (max_degree < 1) throw std::invalid_argument("degree_features: max_degree must be >= 1");
  Graph out = g;
  out.feature_dim = max_degree + 1;
  out.features.assign(static_cast<size_t>(g.num_nodes) * out.feature_dim, 0.0);
  const auto deg = degrees(g);
  for (int v = 0; v < g.num_nodes; ++v) out.feature(v, std::min(deg[v], max_degree)) = 1.0;
  return out;
}

inline bool dataset_has_features(const Dataset& ds) {
  for (const auto& g : ds.graphs)
    if (g.feature_dim > 0) return true;
  return false;
}

inline void apply_degree_features(Dataset& ds, int max_degree) {
  for (auto& g : ds.graphs) g = degree_features(g, max_degree);
}

// Mean feature row over every node of every graph (used by attribute masking).
inline std::vector<double> dataset_mean_feature(const Dataset& ds) {
  if (ds.graphs.empty()) return {};
  const int dim = ds.graphs.front().feature_dim;
  std::vector<double> mean(dim, 0.0);
  long long rows = 0;
  for (const auto& g : ds.graphs) {
    if (g.feature_dim != dim) throw std::invalid_argument("dataset: inconsistent feature_dim");
    for (int v = 0; v < g.num_nodes; ++v)
      for (int j = 0; j < dim; ++j) mean[j] += g.feature(v, j);
    rows += g.num_nodes;
  }
  if (rows > 0)
    for (auto& m : mean) m /= static_cast<double>(rows);
  return mean;
}

}  // namespace tgnn
