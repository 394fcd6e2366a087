#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "tgnn/core.hpp"
#include "tgnn/rng.hpp"

namespace tgnn {

// Stochastic view generation. Every operation is pure given its random
// stream, preserves Graph invariants, and never produces an empty graph.

enum class AugmentKind { edge_drop, node_drop, attr_mask, subgraph, identity };

inline const char* augment_kind_name(AugmentKind k) {
  switch (k) {
    case AugmentKind::edge_drop: return "edge_drop";
    case AugmentKind::node_drop: return "node_drop";
    case AugmentKind::attr_mask: return "attr_mask";
    case AugmentKind::subgraph: return "subgraph";
    case AugmentKind::identity: return "identity";
  }
  return "?";
}

inline AugmentKind augment_kind_from_name(const std::string& s) {
  for (AugmentKind k : {AugmentKind::edge_drop, AugmentKind::node_drop, AugmentKind::attr_mask,
                        AugmentKind::subgraph, AugmentKind::identity})
    if (s == augment_kind_name(k)) return k;
  throw std::invalid_argument("unknown augmentation kind: " + s);
}

namespace detail_aug {

inline void check_ratio(double ratio) {
  if (!(ratio >= 0.0 && ratio <= 1.0)) throw std::invalid_argument("augment: ratio must be in [0, 1]");
}

// First k positions of a random permutation of 0..n-1.
inline std::vector<int> sample_indices(int n, int k, Rng& rng) {
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  for (int i = 0; i < k; ++i) {
    std::uniform_int_distribution<int> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(k);
  return idx;
}

inline Graph induced_subgraph(const Graph& g, std::vector<int> kept) {
  std::sort(kept.begin(), kept.end());
  std::vector<int> remap(g.num_nodes, -1);
  for (size_t i = 0; i < kept.size(); ++i) remap[kept[i]] = static_cast<int>(i);
  Graph out;
  out.num_nodes = static_cast<int>(kept.size());
  out.feature_dim = g.feature_dim;
  out.label = g.label;
  for (const auto& [u, v] : g.edges)
    if (remap[u] >= 0 && remap[v] >= 0) out.edges.emplace_back(remap[u], remap[v]);
  canonicalize_edges(out.edges);
  out.features.resize(static_cast<size_t>(out.num_nodes) * g.feature_dim);
  for (size_t i = 0; i < kept.size(); ++i)
    for (int j = 0; j < g.feature_dim; ++j)
      out.features[i * g.feature_dim + j] = g.feature(kept[i], j);
  return out;
}

}  // namespace detail_aug

// Removes a uniformly random floor(ratio * |E|) subset of edges.
inline Graph edge_drop(const Graph& g, double ratio, Rng& rng) {
  detail_aug::check_ratio(ratio);
  const int total = static_cast<int>(g.edges.size());
  const int drop = static_cast<int>(ratio * total);
  if (drop == 0) return g;
  const auto dropped = detail_aug::sample_indices(total, drop, rng);
  std::unordered_set<int> gone(dropped.begin(), dropped.end());
  Graph out = g;
  out.edges.clear();
  for (int i = 0; i < total; ++i)
    if (!gone.count(i)) out.edges.push_back(g.edges[i]);
  return out;
}

// Removes floor(ratio * |V|) random nodes (keeping at least one) plus their
// incident edges; survivors are reindexed densely with their feature rows.
inline Graph node_drop(const Graph& g, double ratio, Rng& rng) {
  detail_aug::check_ratio(ratio);
  const int drop = std::min(static_cast<int>(ratio * g.num_nodes), g.num_nodes - 1);
  if (drop <= 0) return g;
  const auto dropped = detail_aug::sample_indices(g.num_nodes, drop, rng);
  std::vector<bool> gone(g.num_nodes, false);
  for (int v : dropped) gone[v] = true;
  std::vector<int> kept;
  for (int v = 0; v < g.num_nodes; ++v)
    if (!gone[v]) kept.push_back(v);
  return detail_aug::induced_subgraph(g, std::move(kept));
}

// Replaces the feature rows of floor(ratio * |V|) random nodes with the
// dataset-mean feature vector. Topology is untouched.
inline Graph attr_mask(const Graph& g, double ratio, const std::vector<double>& mean_feature,
                       Rng& rng) {
  detail_aug::check_ratio(ratio);
  if (g.feature_dim < 1) throw std::invalid_argument("attr_mask: graph has no features");
  if (static_cast<int>(mean_feature.size()) != g.feature_dim)
    throw std::invalid_argument("attr_mask: mean feature dimension mismatch");
  const int count = static_cast<int>(ratio * g.num_nodes);
  if (count == 0) return g;
  Graph out = g;
  for (int v : detail_aug::sample_indices(g.num_nodes, count, rng))
    for (int j = 0; j < g.feature_dim; ++j) out.feature(v, j) = mean_feature[j];
  return out;
}

// Grows a node set of size ceil((1 - ratio) * |V|) by random walk from a
// random seed node, restarting on stall, and returns the induced subgraph.
// If the reached component is too small the result is the whole component.
inline Graph subgraph(const Graph& g, double ratio, Rng& rng) {
  detail_aug::check_ratio(ratio);
  if (g.num_nodes < 1) throw std::invalid_argument("subgraph: empty graph");
  const int target = std::max(1, static_cast<int>(std::ceil((1.0 - ratio) * g.num_nodes)));
  if (target >= g.num_nodes) return g;

  const auto nbrs = adjacency_lists(g);
  std::uniform_int_distribution<int> start(0, g.num_nodes - 1);
  std::vector<bool> in_set(g.num_nodes, false);
  std::vector<int> kept;
  int cur = start(rng);
  in_set[cur] = true;
  kept.push_back(cur);

  int stall = 0;
  const int stall_limit = 2 * g.num_nodes + 8;
  while (static_cast<int>(kept.size()) < target) {
    if (stall > stall_limit) {
      // walk is stuck: jump straight to an unvisited neighbor of the set
      std::vector<std::pair<int, int>> frontier;
      for (int v : kept)
        for (int u : nbrs[v])
          if (!in_set[u]) frontier.emplace_back(v, u);
      if (frontier.empty()) break;  // component exhausted
      std::uniform_int_distribution<size_t> pick(0, frontier.size() - 1);
      cur = frontier[pick(rng)].second;
      in_set[cur] = true;
      kept.push_back(cur);
      stall = 0;
      continue;
    }
    if (nbrs[cur].empty()) {
      std::uniform_int_distribution<size_t> restart(0, kept.size() - 1);
      cur = kept[restart(rng)];
      ++stall;
      continue;
    }
    std::uniform_int_distribution<size_t> pick(0, nbrs[cur].size() - 1);
    const int nxt = nbrs[cur][pick(rng)];
    if (!in_set[nxt]) {
      in_set[nxt] = true;
      kept.push_back(nxt);
      stall = 0;
    } else {
      ++stall;
    }
    cur = nxt;
  }
  return detail_aug::induced_subgraph(g, std::move(kept));
}

struct AugmentConfig {
  double edge_drop_ratio = 0.2;
  double node_drop_ratio = 0.2;
  double attr_mask_ratio = 0.2;
  double subgraph_ratio = 0.2;
  std::vector<AugmentKind> enabled{AugmentKind::edge_drop, AugmentKind::node_drop,
                                   AugmentKind::attr_mask, AugmentKind::subgraph};
};

// View generator: picks one enabled strategy uniformly at random and applies
// it at the configured ratio.
class Augmenter {
 public:
  Augmenter() = default;
  Augmenter(AugmentConfig config, std::vector<double> mean_feature)
      : config_(std::move(config)), mean_feature_(std::move(mean_feature)) {
    if (config_.enabled.empty()) throw std::invalid_argument("augmenter: no strategies enabled");
  }

  Graph apply(const Graph& g, AugmentKind kind, Rng& rng) const {
    switch (kind) {
      case AugmentKind::edge_drop: return edge_drop(g, config_.edge_drop_ratio, rng);
      case AugmentKind::node_drop: return node_drop(g, config_.node_drop_ratio, rng);
      case AugmentKind::attr_mask: return attr_mask(g, config_.attr_mask_ratio, mean_feature_, rng);
      case AugmentKind::subgraph: return subgraph(g, config_.subgraph_ratio, rng);
      case AugmentKind::identity: return g;
    }
    throw std::logic_error("augmenter: unreachable");
  }

  AugmentKind pick_kind(Rng& rng) const {
    std::uniform_int_distribution<size_t> pick(0, config_.enabled.size() - 1);
    return config_.enabled[pick(rng)];
  }

  Graph random_augment(const Graph& g, Rng& rng) const { return apply(g, pick_kind(rng), rng); }

  const AugmentConfig& config() const { return config_; }

 private:
  AugmentConfig config_;
  std::vector<double> mean_feature_;
};

}  // namespace tgnn
