#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "tgnn/gradcheck.hpp"
#include "tgnn/rng.hpp"
#include "tgnn/rwkernel.hpp"

using namespace tgnn;

namespace {

Graph cycle(int n) {
  Graph g;
  g.num_nodes = n;
  for (int v = 0; v < n; ++v) g.edges.emplace_back(v, (v + 1) % n);
  canonicalize_edges(g.edges);
  return g;
}

Graph random_graph(int n, double edge_prob, Rng& rng) {
  Graph g;
  g.num_nodes = n;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (unit(rng) < edge_prob) g.edges.emplace_back(u, v);
  return g;
}

std::vector<double> random_weighted_adjacency(int n, Rng& rng) {
  std::uniform_real_distribution<double> w(0.0, 1.0);
  std::vector<double> adj(static_cast<size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double x = w(rng) < 0.6 ? w(rng) : 0.0;
      adj[static_cast<size_t>(i) * n + j] = x;
      adj[static_cast<size_t>(j) * n + i] = x;
    }
  return adj;
}

}  // namespace

TEST_CASE("walk counts on reference graphs") {
  // triangle: 3 nodes, 6 length-1 walks, 12 length-2 walks
  Graph c3 = cycle(3);
  auto counts = graph_walk_counts(c3, 2);
  CHECK(counts == std::vector<double>{3, 6, 12});

  Graph isolated;
  isolated.num_nodes = 1;
  CHECK(graph_walk_counts(isolated, 3) == std::vector<double>{1, 0, 0, 0});

  Graph k2;
  k2.num_nodes = 2;
  k2.edges = {{0, 1}};
  CHECK(graph_walk_counts(k2, 2) == std::vector<double>{2, 2, 2});
}

TEST_CASE("dense and edge-list walk counts agree") {
  Rng rng = make_rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    Graph g = random_graph(6, 0.5, rng);
    const auto dense = walk_counts(graph_adjacency_matrix(g), g.num_nodes, 4);
    const auto sparse = graph_walk_counts(g, 4);
    for (int p = 0; p <= 4; ++p) CHECK(dense[p] == Catch::Approx(sparse[p]).epsilon(1e-12));
  }
}

TEST_CASE("C3 x K2 is C6: factorized kernel matches the product construction") {
  Graph c3 = cycle(3);
  std::vector<double> k2 = {0, 1, 1, 0};

  // the product graph has 6 nodes and 6 edges
  const auto kron = kronecker_adjacency(graph_adjacency_matrix(c3), 3, k2, 2);
  int nonzeros = 0;
  for (double v : kron) nonzeros += v != 0.0 ? 1 : 0;
  CHECK(nonzeros / 2 == 6);

  // and its walk counts equal those of an explicit C6 for several lengths
  Graph c6 = cycle(6);
  const auto pc = walk_counts(kron, 6, 4);
  const auto cc = graph_walk_counts(c6, 4);
  for (int p = 0; p <= 4; ++p) CHECK(pc[p] == Catch::Approx(cc[p]).epsilon(1e-12));

  CHECK(kernel_value(c3, k2, 2, 1) == 12.0);
  CHECK(direct_product_oracle(c3, k2, 2, 1) == 12.0);
}

TEST_CASE("p = 0 gives the product of node counts") {
  Graph c3 = cycle(3);
  std::vector<double> adj(25, 0.0);
  CHECK(kernel_value(c3, adj, 5, 0) == 15.0);
  CHECK(direct_product_oracle(c3, adj, 5, 0) == 15.0);
}

TEST_CASE("product with an edgeless graph has no walks") {
  Rng rng = make_rng(37);
  Graph g = random_graph(5, 0.6, rng);
  std::vector<double> single = {0.0};
  for (int p = 1; p <= 3; ++p) CHECK(direct_product_oracle(g, single, 1, p) == 0.0);
}

TEST_CASE("omega weights (1, 0, ..., 0) reduce to the node-count term") {
  Graph c3 = cycle(3);
  std::vector<double> k2 = {0, 1, 1, 0};
  std::vector<double> w = {1.0, 0.0, 0.0, 0.0};
  CHECK(direct_product_oracle(c3, k2, 2, 3, &w) == 6.0);
}

TEST_CASE("factorized kernel equals the direct-product oracle on random pairs") {
  Rng rng = make_rng(43);
  std::uniform_int_distribution<int> nodes(2, 6);
  std::uniform_int_distribution<int> hidden_nodes(2, 5);
  std::uniform_int_distribution<int> steps(0, 4);
  for (int trial = 0; trial < 100; ++trial) {
    Graph g = random_graph(nodes(rng), 0.5, rng);
    const int nh = hidden_nodes(rng);
    const auto adj = random_weighted_adjacency(nh, rng);
    const int p = steps(rng);
    const double fast = kernel_value(g, adj, nh, p);
    const double slow = direct_product_oracle(g, adj, nh, p);
    CHECK(std::abs(fast - slow) <= 1e-9 * std::max({std::abs(fast), std::abs(slow), 1.0}));
  }
}

TEST_CASE("walk counts are monotone under edge addition") {
  Rng rng = make_rng(47);
  for (int trial = 0; trial < 20; ++trial) {
    Graph g = random_graph(6, 0.4, rng);
    // find a non-edge
    std::vector<std::pair<int, int>> candidates;
    for (int u = 0; u < 6; ++u)
      for (int v = u + 1; v < 6; ++v)
        if (!std::binary_search(g.edges.begin(), g.edges.end(), std::make_pair(u, v)))
          candidates.emplace_back(u, v);
    if (candidates.empty()) continue;
    Graph g2 = g;
    g2.edges.push_back(candidates[trial % candidates.size()]);
    canonicalize_edges(g2.edges);
    const auto before = graph_walk_counts(g, 4);
    const auto after = graph_walk_counts(g2, 4);
    for (int p = 1; p <= 4; ++p) CHECK(after[p] >= before[p]);
  }
}

TEST_CASE("scaling the adjacency by 2 scales s_p by 2^p exactly") {
  Rng rng = make_rng(53);
  const auto adj = random_weighted_adjacency(5, rng);
  auto doubled = adj;
  for (auto& v : doubled) v *= 2.0;
  const auto base = walk_counts(adj, 5, 3);
  const auto scaled = walk_counts(doubled, 5, 3);
  for (int p = 0; p <= 3; ++p) CHECK(scaled[p] == std::ldexp(base[p], p));
}

TEST_CASE("kernel features are invariant under input relabeling") {
  Rng rng = make_rng(61);
  KernelParams params = KernelParams::init(3, 4, 3, 5, rng);
  Graph g = random_graph(6, 0.5, rng);

  std::vector<int> perm(6);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  Graph pg;
  pg.num_nodes = 6;
  for (const auto& [u, v] : g.edges) pg.edges.emplace_back(perm[u], perm[v]);
  canonicalize_edges(pg.edges);

  Tensor h1 = kernel_features(g, params);
  Tensor h2 = kernel_features(pg, params);
  for (int i = 0; i < h1.size(); ++i) CHECK(h1.value()[i] == h2.value()[i]);

  Tensor z1 = kernel_forward(g, params);
  Tensor z2 = kernel_forward(pg, params);
  for (int i = 0; i < z1.size(); ++i) CHECK(z1.value()[i] == z2.value()[i]);
}

TEST_CASE("dead hidden weights zero out every positive walk length") {
  Rng rng = make_rng(67);
  KernelParams params = KernelParams::init(2, 4, 3, 5, rng);
  for (auto& hg : params.hidden.graphs)
    for (auto& w : hg.free_weights.value()) w = -std::abs(w);

  Graph g = cycle(5);
  Tensor h = kernel_features(g, params);
  REQUIRE(h.size() == 2 * 4);
  for (int i = 0; i < 2; ++i) {
    CHECK(h.value()[i * 4 + 0] == 5.0 * 4.0);
    for (int p = 1; p <= 3; ++p) CHECK(h.value()[i * 4 + p] == 0.0);
  }
}

TEST_CASE("optional log1p transform compresses the feature scale") {
  Rng rng = make_rng(79);
  KernelParams raw = KernelParams::init(2, 4, 3, 5, rng);
  KernelParams squashed = raw;
  squashed.log1p_features = true;

  Graph g = cycle(6);
  Tensor h = kernel_features(g, raw);
  Tensor hl = kernel_features(g, squashed);
  REQUIRE(h.size() == hl.size());
  for (int i = 0; i < h.size(); ++i) CHECK(hl.value()[i] == std::log(1.0 + h.value()[i]));

  // still differentiable through the transform
  Tensor probe = uniform_tensor(1, 5, -1.0, 1.0, rng, false);
  auto f = [&] { return sum(elementwise_multiply(kernel_forward(g, squashed), probe)); };
  CHECK(finite_diff_check(f, squashed.parameters()) < 1e-4);
}

TEST_CASE("kernel gradients match finite differences") {
  Rng rng = make_rng(71);
  KernelParams params = KernelParams::init(3, 4, 3, 5, rng);
  Graph g = random_graph(6, 0.5, rng);
  Tensor probe = uniform_tensor(1, 5, -1.0, 1.0, rng, false);
  auto f = [&] { return sum(elementwise_multiply(kernel_forward(g, params), probe)); };
  CHECK(finite_diff_check(f, params.parameters()) < 1e-4);
}

TEST_CASE("hidden graph export and DOT round trip") {
  Rng rng = make_rng(73);
  KernelParams params = KernelParams::init(4, 5, 2, 3, rng);

  // init weights are uniform(0.1, 1): threshold above 1 prunes everything
  auto none = hidden_graph_edges(params, 2.0);
  REQUIRE(none.size() == 4);
  for (const auto& edges : none) CHECK(edges.empty());

  // threshold 0 on strictly positive weights keeps the complete graph
  auto all = hidden_graph_edges(params, 0.0);
  for (const auto& edges : all) CHECK(edges.size() == 5 * 4 / 2);

  // DOT text re-parses to the same edge set
  const auto dot = hidden_graph_dot(all[0], 5, "hidden_0");
  std::vector<WeightedEdge> parsed;
  std::istringstream in(dot);
  std::string line;
  while (std::getline(in, line)) {
    const auto sep = line.find(" -- ");
    if (sep == std::string::npos) continue;
    WeightedEdge e;
    e.u = std::stoi(line.substr(0, sep));
    const auto wpos = line.find("[weight=");
    e.v = std::stoi(line.substr(sep + 4, wpos - sep - 4));
    e.weight = std::stod(line.substr(wpos + 8));
    parsed.push_back(e);
  }
  REQUIRE(parsed.size() == all[0].size());
  for (size_t i = 0; i < parsed.size(); ++i) {
    CHECK(parsed[i].u == all[0][i].u);
    CHECK(parsed[i].v == all[0][i].v);
    CHECK(parsed[i].weight == all[0][i].weight);
  }
}
