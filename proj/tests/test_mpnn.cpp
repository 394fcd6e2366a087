#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "tgnn/gradcheck.hpp"
#include "tgnn/mpnn.hpp"
#include "tgnn/rng.hpp"

using namespace tgnn;

namespace {

Graph random_graph(int n, int feature_dim, double edge_prob, Rng& rng) {
  Graph g;
  g.num_nodes = n;
  g.feature_dim = feature_dim;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> feat(-1.0, 1.0);
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (unit(rng) < edge_prob) g.edges.emplace_back(u, v);
  g.features.resize(static_cast<size_t>(n) * feature_dim);
  for (auto& x : g.features) x = feat(rng);
  return g;
}

Graph permute_graph(const Graph& g, const std::vector<int>& perm) {
  Graph out;
  out.num_nodes = g.num_nodes;
  out.feature_dim = g.feature_dim;
  out.label = g.label;
  for (const auto& [u, v] : g.edges) out.edges.emplace_back(perm[u], perm[v]);
  canonicalize_edges(out.edges);
  out.features.resize(g.features.size());
  for (int v = 0; v < g.num_nodes; ++v)
    for (int j = 0; j < g.feature_dim; ++j) out.features[static_cast<size_t>(perm[v]) * g.feature_dim + j] = g.feature(v, j);
  return out;
}

}  // namespace

TEST_CASE("single isolated node equals the COM of its feature") {
  Rng rng = make_rng(3);
  MpnnParams params = MpnnParams::init(2, 4, 1, rng);
  Graph g;
  g.num_nodes = 1;
  g.feature_dim = 2;
  g.features = {0.3, -0.8};

  Tensor z = mpnn_forward(g, params);

  // hand-apply the two-layer perceptron to the raw feature row
  Tensor x(1, 2, g.features);
  Tensor expect = add_rowvec(matmul(relu(add_rowvec(matmul(x, params.layers[0].w1), params.layers[0].b1)),
                                    params.layers[0].w2),
                             params.layers[0].b2);
  REQUIRE(z.cols() == 4);
  for (int j = 0; j < 4; ++j) CHECK(z.value()[j] == expect.value()[j]);
}

TEST_CASE("permutation invariance is exact") {
  Rng rng = make_rng(17);
  MpnnParams params = MpnnParams::init(3, 8, 3, rng);
  for (int trial = 0; trial < 10; ++trial) {
    Graph g = random_graph(7, 3, 0.4, rng);
    std::vector<int> perm(7);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Graph pg = permute_graph(g, perm);
    Tensor z1 = mpnn_forward(g, params);
    Tensor z2 = mpnn_forward(pg, params);
    for (int j = 0; j < z1.size(); ++j) CHECK(z1.value()[j] == z2.value()[j]);
  }
}

TEST_CASE("attention readout: equal positive scores give uniform weights") {
  // states whose first column is constant 0.5, attention picks that column
  Tensor states(4, 2, {0.5, 1.0, 0.5, -2.0, 0.5, 0.3, 0.5, 7.0});
  Tensor t(2, 1, {1.0, 0.0});
  auto res = attention_readout(states, t);
  REQUIRE(res.weights.size() == 4);
  for (double w : res.weights) CHECK(w == 0.25);
  CHECK_FALSE(res.fallback);
}

TEST_CASE("attention readout: non-positive scores are pruned to exactly zero") {
  Tensor states(2, 1, {1.0, -1.0});
  Tensor t(1, 1, {1.0});
  auto res = attention_readout(states, t);
  CHECK(res.weights[0] == 1.0);
  CHECK(res.weights[1] == 0.0);
  CHECK(res.embedding.value()[0] == 1.0);
}

TEST_CASE("attention readout: zero attention vector falls back to mean pooling") {
  Tensor states(3, 2, {1, 2, 3, 4, 5, 6});
  Tensor t(2, 1, {0.0, 0.0});
  auto res = attention_readout(states, t);
  CHECK(res.fallback);
  for (double w : res.weights) CHECK(w == Catch::Approx(1.0 / 3).margin(1e-15));
  CHECK(res.embedding.value()[0] == Catch::Approx(3.0).margin(1e-12));
  CHECK(res.embedding.value()[1] == Catch::Approx(4.0).margin(1e-12));
}

TEST_CASE("readout weights: nonnegative, zero iff pruned, survivors sum to one") {
  Rng rng = make_rng(23);
  MpnnParams params = MpnnParams::init(3, 6, 2, rng);
  for (int trial = 0; trial < 20; ++trial) {
    Graph g = random_graph(6, 3, 0.5, rng);
    Tensor states = mpnn_node_states(g, params);
    auto res = attention_readout(states, params.attention);
    if (res.fallback) continue;
    Tensor scores = matmul(states, params.attention);
    double total = 0.0;
    for (int v = 0; v < 6; ++v) {
      CHECK(res.weights[v] >= 0.0);
      if (scores.value()[v] <= 0.0) CHECK(res.weights[v] == 0.0);
      total += res.weights[v];
    }
    CHECK(std::abs(total - 1.0) < 1e-12);
  }
}

TEST_CASE("gradient of a scalar head matches finite differences") {
  Rng rng = make_rng(41);
  MpnnParams params = MpnnParams::init(3, 5, 2, rng);
  Graph g = random_graph(6, 3, 0.5, rng);

  // freeze the indicator at its forward value so central differences see a
  // locally smooth function
  Tensor states0 = mpnn_node_states(g, params);
  Tensor scores0 = matmul(states0, params.attention);
  std::vector<bool> mask(6);
  for (int v = 0; v < 6; ++v) mask[v] = scores0.value()[v] > 0.0;

  Tensor probe = uniform_tensor(1, 5, -1.0, 1.0, rng, false);
  auto f = [&] { return sum(elementwise_multiply(mpnn_forward(g, params, &mask), probe)); };
  CHECK(finite_diff_check(f, params.parameters()) < 1e-4);
}

TEST_CASE("disjoint union: component states are local, readout shares normalization") {
  Rng rng = make_rng(59);
  MpnnParams params = MpnnParams::init(2, 6, 3, rng);
  Graph a = random_graph(4, 2, 0.6, rng);
  Graph b = random_graph(5, 2, 0.6, rng);

  Graph uni;
  uni.num_nodes = a.num_nodes + b.num_nodes;
  uni.feature_dim = 2;
  uni.edges = a.edges;
  for (const auto& [u, v] : b.edges) uni.edges.emplace_back(u + a.num_nodes, v + a.num_nodes);
  uni.features = a.features;
  uni.features.insert(uni.features.end(), b.features.begin(), b.features.end());

  Tensor sa = mpnn_node_states(a, params);
  Tensor sb = mpnn_node_states(b, params);
  Tensor su = mpnn_node_states(uni, params);

  // changing nothing across components: union states equal part states bitwise
  for (int v = 0; v < a.num_nodes; ++v)
    for (int j = 0; j < 6; ++j) CHECK(su.at(v, j) == sa.at(v, j));
  for (int v = 0; v < b.num_nodes; ++v)
    for (int j = 0; j < 6; ++j) CHECK(su.at(a.num_nodes + v, j) == sb.at(v, j));

  // readout of the union: weighted parts under one shared denominator
  auto res = attention_readout(su, params.attention);
  if (!res.fallback) {
    Tensor scores = matmul(su, params.attention);
    double den = 0.0;
    for (int v = 0; v < uni.num_nodes; ++v)
      if (scores.value()[v] > 0.0) den += std::exp(scores.value()[v]);
    std::vector<double> expect(6, 0.0);
    for (int v = 0; v < uni.num_nodes; ++v)
      if (scores.value()[v] > 0.0)
        for (int j = 0; j < 6; ++j) expect[j] += std::exp(scores.value()[v]) / den * su.at(v, j);
    for (int j = 0; j < 6; ++j) CHECK(res.embedding.value()[j] == Catch::Approx(expect[j]).margin(1e-12));
  }
}

TEST_CASE("feature_dim mismatch is rejected") {
  Rng rng = make_rng(5);
  MpnnParams params = MpnnParams::init(3, 4, 1, rng);
  Graph g;
  g.num_nodes = 1;
  g.feature_dim = 2;
  g.features = {0.0, 0.0};
  CHECK_THROWS_AS(mpnn_forward(g, params), std::invalid_argument);
}
