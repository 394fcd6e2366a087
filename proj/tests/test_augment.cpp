#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <set>

#include "tgnn/augment.hpp"
#include "tgnn/core.hpp"
#include "tgnn/rng.hpp"
#include "tgnn/synthetic.hpp"

using namespace tgnn;

namespace {

Graph tagged_cycle(int n) {
  // 1-d feature identifying each node, so mappings survive reindexing
  Graph g;
  g.num_nodes = n;
  g.feature_dim = 1;
  for (int v = 0; v < n; ++v) {
    g.edges.emplace_back(v, (v + 1) % n);
    g.features.push_back(static_cast<double>(v));
  }
  canonicalize_edges(g.edges);
  return g;
}

bool same_graph(const Graph& a, const Graph& b) {
  return a.num_nodes == b.num_nodes && a.edges == b.edges && a.features == b.features;
}

}  // namespace

TEST_CASE("edge_drop") {
  Graph g = tagged_cycle(10);
  Rng rng = make_rng(1);
  CHECK(same_graph(edge_drop(g, 0.0, rng), g));

  Graph none = edge_drop(g, 1.0, rng);
  CHECK(none.edges.empty());
  CHECK(none.num_nodes == 10);
  CHECK(none.features == g.features);

  Graph some = edge_drop(g, 0.2, rng);
  CHECK(some.edges.size() == 8);
  validate_graph(some);
}

TEST_CASE("node_drop") {
  Rng rng = make_rng(2);
  Graph tri = tagged_cycle(3);
  CHECK(same_graph(node_drop(tri, 0.0, rng), tri));

  Graph two = node_drop(tri, 0.34, rng);
  CHECK(two.num_nodes == 2);
  CHECK(two.edges == std::vector<std::pair<int, int>>{{0, 1}});
  CHECK(two.features.size() == 2);
  validate_graph(two);

  Graph lone;
  lone.num_nodes = 1;
  lone.feature_dim = 1;
  lone.features = {0.0};
  CHECK(same_graph(node_drop(lone, 0.99, rng), lone));
}

TEST_CASE("attr_mask") {
  Rng rng = make_rng(3);
  Graph g = tagged_cycle(6);
  const std::vector<double> mean{2.5};

  CHECK(same_graph(attr_mask(g, 0.0, mean, rng), g));

  Graph all = attr_mask(g, 1.0, mean, rng);
  CHECK(all.edges == g.edges);  // topology untouched
  for (int v = 0; v < 6; ++v) CHECK(all.feature(v, 0) == 2.5);

  Graph half = attr_mask(g, 0.5, mean, rng);
  CHECK(half.edges == g.edges);
  int masked = 0;
  for (int v = 0; v < 6; ++v) masked += half.feature(v, 0) == 2.5 ? 1 : 0;
  CHECK(masked == 3);
}

TEST_CASE("subgraph") {
  Rng rng = make_rng(4);
  Graph g = tagged_cycle(8);

  Graph whole = subgraph(g, 0.0, rng);
  CHECK(whole.num_nodes == 8);
  CHECK(whole.edges.size() == 8);

  for (int trial = 0; trial < 25; ++trial) {
    Graph sub = subgraph(g, 0.5, rng);
    CHECK(sub.num_nodes == 4);  // ceil(0.5 * 8)
    validate_graph(sub);

    // induced property: edges below match exactly the original edges among
    // the kept nodes (features identify the original ids)
    std::vector<int> orig(sub.num_nodes);
    for (int v = 0; v < sub.num_nodes; ++v) orig[v] = static_cast<int>(sub.feature(v, 0));
    std::set<std::pair<int, int>> kept_orig_edges;
    for (auto [u, v] : sub.edges) {
      int a = orig[u], b = orig[v];
      if (a > b) std::swap(a, b);
      kept_orig_edges.insert({a, b});
    }
    std::set<int> kept(orig.begin(), orig.end());
    std::set<std::pair<int, int>> expect;
    for (auto [u, v] : g.edges)
      if (kept.count(u) && kept.count(v)) expect.insert({u, v});
    CHECK(kept_orig_edges == expect);
  }
}

TEST_CASE("subgraph on a disconnected graph returns the reached component") {
  // two triangles, no path between them: a walk can never collect > 3 nodes
  Graph g;
  g.num_nodes = 6;
  g.feature_dim = 1;
  g.features = {0, 1, 2, 3, 4, 5};
  g.edges = {{0, 1}, {0, 2}, {1, 2}, {3, 4}, {3, 5}, {4, 5}};
  Rng rng = make_rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    Graph sub = subgraph(g, 0.2, rng);  // target ceil(0.8 * 6) = 5 > component size
    CHECK(sub.num_nodes == 3);
    CHECK(sub.edges.size() == 3);
    validate_graph(sub);
  }
}

TEST_CASE("augmentations are deterministic under a fixed stream") {
  Graph g = tagged_cycle(9);
  for (auto kind : {AugmentKind::edge_drop, AugmentKind::node_drop, AugmentKind::subgraph}) {
    Augmenter aug(AugmentConfig{}, {0.0});
    Rng r1 = make_rng(10, 3);
    Rng r2 = make_rng(10, 3);
    CHECK(same_graph(aug.apply(g, kind, r1), aug.apply(g, kind, r2)));
  }
}

TEST_CASE("random_augment picks each kind at close to uniform frequency") {
  Augmenter aug(AugmentConfig{}, {0.0});
  Rng rng = make_rng(123);
  std::map<AugmentKind, int> counts;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) ++counts[aug.pick_kind(rng)];
  REQUIRE(counts.size() == 4);
  for (const auto& [kind, n] : counts) {
    const double freq = static_cast<double>(n) / draws;
    CHECK(freq > 0.23);
    CHECK(freq < 0.27);
  }
}

TEST_CASE("random_augment output always satisfies graph invariants") {
  Dataset ds = make_synthetic_dataset(10, 6, 12, 21);
  apply_degree_features(ds, 8);
  Augmenter aug(AugmentConfig{}, dataset_mean_feature(ds));
  Rng rng = make_rng(31);
  for (const auto& g : ds.graphs)
    for (int rep = 0; rep < 8; ++rep) {
      Graph out = aug.random_augment(g, rng);
      validate_graph(out);
      CHECK(out.num_nodes >= 1);
      CHECK(out.num_nodes <= g.num_nodes);
      CHECK(out.edges.size() <= g.edges.size());  // no augmentation ever adds an edge
    }
}

TEST_CASE("identity augmenter returns the input bitwise") {
  AugmentConfig cfg;
  cfg.enabled = {AugmentKind::identity};
  Augmenter aug(cfg, {});
  Graph g = tagged_cycle(7);
  Rng rng = make_rng(5);
  CHECK(same_graph(aug.random_augment(g, rng), g));
}
