#pragma once

#include <cmath>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "tgnn/core.hpp"
#include "tgnn/io_util.hpp"
#include "tgnn/rng.hpp"
#include "tgnn/tensor.hpp"

namespace tgnn {

// Graph kernel encoder: N trainable hidden graphs compared to the input by
// per-length random-walk counts. The kernel value for walk length p
// factorizes over the direct product: e^T (A (x) A')^p e = (e^T A^p e) *
// (e^T A'^p e), so each side is counted on its own graph. The resulting
// N x (P+1) feature matrix is flattened through a fully-connected head.

struct HiddenGraph {
  int num_nodes = 0;
  Tensor free_weights;  // 1 x n(n-1)/2, strict upper triangle before symmetrization
};

struct HiddenGraphSet {
  std::vector<HiddenGraph> graphs;
  int count() const { return static_cast<int>(graphs.size()); }
};

// Effective adjacency: symmetric, entrywise nonnegative (relu), zero diagonal.
inline Tensor hidden_adjacency(const HiddenGraph& g) {
  return sym_from_upper(relu(g.free_weights), g.num_nodes);
}

struct KernelParams {
  HiddenGraphSet hidden;
  int walk_length = 3;
  Tensor head_weight;  // N(P+1) x d
  Tensor head_bias;    // 1 x d
  bool log1p_features = false;

  static KernelParams init(int num_hidden, int hidden_nodes, int walk_length, int embed_dim,
                           Rng& rng, bool log1p_features = false) {
    if (num_hidden < 1 || hidden_nodes < 2) throw std::invalid_argument("kernel: bad hidden graph shape");
    if (walk_length < 1) throw std::invalid_argument("kernel: walk_length must be >= 1");
    KernelParams p;
    p.walk_length = walk_length;
    p.log1p_features = log1p_features;
    for (int i = 0; i < num_hidden; ++i) {
      HiddenGraph g;
      g.num_nodes = hidden_nodes;
      // uniform(0.1, 1) keeps every relu gate open at init
      g.free_weights = uniform_tensor(1, hidden_nodes * (hidden_nodes - 1) / 2, 0.1, 1.0, rng, true);
      p.hidden.graphs.push_back(std::move(g));
    }
    p.head_weight = glorot_tensor(num_hidden * (walk_length + 1), embed_dim, rng);
    p.head_bias = Tensor::zeros(1, embed_dim, true);
    return p;
  }

  int feature_width() const { return hidden.count() * (walk_length + 1); }

  std::vector<Tensor> parameters() const {
    std::vector<Tensor> out;
    for (const auto& g : hidden.graphs) out.push_back(g.free_weights);
    out.push_back(head_weight);
    out.push_back(head_bias);
    return out;
  }

  std::vector<std::pair<std::string, Tensor>> named_tensors(const std::string& prefix) const {
    std::vector<std::pair<std::string, Tensor>> out;
    for (size_t i = 0; i < hidden.graphs.size(); ++i)
      out.emplace_back(prefix + ".hidden" + std::to_string(i) + ".free", hidden.graphs[i].free_weights);
    out.emplace_back(prefix + ".head.w", head_weight);
    out.emplace_back(prefix + ".head.b", head_bias);
    return out;
  }
};

// s_0..s_P for a dense nonnegative adjacency: s_0 = n, s_p = e^T A^p e.
// Sums are order-canonical so relabelled inputs give identical values.
inline std::vector<double> walk_counts(const std::vector<double>& adj, int n, int P) {
  if (adj.size() != static_cast<size_t>(n) * n) throw std::invalid_argument("walk_counts: not a square matrix");
  std::vector<double> counts(P + 1, 0.0);
  counts[0] = static_cast<double>(n);
  std::vector<double> v(n, 1.0), next(n), buf;
  for (int p = 1; p <= P; ++p) {
    for (int u = 0; u < n; ++u) {
      buf.clear();
      for (int w = 0; w < n; ++w) {
        const double a = adj[static_cast<size_t>(u) * n + w];
        if (a != 0.0) buf.push_back(a * v[w]);
      }
      next[u] = detail::sorted_sum(buf);
    }
    v = next;
    buf = v;
    counts[p] = detail::sorted_sum(buf);
  }
  return counts;
}

// Same, counted along the edge list of an unweighted graph.
inline std::vector<double> graph_walk_counts(const Graph& g, int P) {
  std::vector<double> counts(P + 1, 0.0);
  counts[0] = static_cast<double>(g.num_nodes);
  const auto nbrs = adjacency_lists(g);
  std::vector<double> v(g.num_nodes, 1.0), next(g.num_nodes), buf;
  for (int p = 1; p <= P; ++p) {
    for (int u = 0; u < g.num_nodes; ++u) {
      buf.clear();
      for (int w : nbrs[u]) buf.push_back(v[w]);
      next[u] = detail::sorted_sum(buf);
    }
    v = next;
    buf = v;
    counts[p] = detail::sorted_sum(buf);
  }
  return counts;
}

inline std::vector<double> graph_adjacency_matrix(const Graph& g) {
  std::vector<double> adj(static_cast<size_t>(g.num_nodes) * g.num_nodes, 0.0);
  for (const auto& [u, v] : g.edges) {
    adj[static_cast<size_t>(u) * g.num_nodes + v] = 1.0;
    adj[static_cast<size_t>(v) * g.num_nodes + u] = 1.0;
  }
  return adj;
}

// Factorized p-step kernel value between a graph and a dense adjacency.
inline double kernel_value(const Graph& g, const std::vector<double>& adj, int n, int p) {
  if (p < 0) throw std::invalid_argument("kernel_value: p must be >= 0");
  if (p == 0) return static_cast<double>(g.num_nodes) * n;
  return graph_walk_counts(g, p)[p] * walk_counts(adj, n, p)[p];
}

// Adjacency of the direct product graph (the Kronecker product for
// unlabeled graphs): rows/cols indexed by (i * nB + j).
inline std::vector<double> kronecker_adjacency(const std::vector<double>& a, int na,
                                               const std::vector<double>& b, int nb) {
  const size_t n = static_cast<size_t>(na) * nb;
  std::vector<double> out(n * n, 0.0);
  for (int i = 0; i < na; ++i)
    for (int k = 0; k < na; ++k) {
      const double aik = a[static_cast<size_t>(i) * na + k];
      if (aik == 0.0) continue;
      for (int j = 0; j < nb; ++j)
        for (int l = 0; l < nb; ++l) {
          const double bjl = b[static_cast<size_t>(j) * nb + l];
          if (bjl == 0.0) continue;
          out[(static_cast<size_t>(i) * nb + j) * n + (static_cast<size_t>(k) * nb + l)] = aik * bjl;
        }
    }
  return out;
}

// Reference path: materializes the product graph and counts walks on it.
// With `weights` it returns the omega-weighted sum over p = 0..P instead of
// the single exact-length count.
inline double direct_product_oracle(const std::vector<double>& adj_a, int na,
                                    const std::vector<double>& adj_b, int nb, int p,
                                    const std::vector<double>* weights = nullptr,
                                    size_t max_product_nodes = 4096) {
  const size_t n = static_cast<size_t>(na) * nb;
  if (n > max_product_nodes) throw std::invalid_argument("direct_product_oracle: product graph too large");
  const auto kron = kronecker_adjacency(adj_a, na, adj_b, nb);
  const auto counts = walk_counts(kron, static_cast<int>(n), p);
  if (!weights) return counts[p];
  if (weights->size() < static_cast<size_t>(p) + 1)
    throw std::invalid_argument("direct_product_oracle: need p + 1 weights");
  double acc = 0.0;
  for (int q = 0; q <= p; ++q) acc += (*weights)[q] * counts[q];
  return acc;
}

inline double direct_product_oracle(const Graph& g, const std::vector<double>& adj_b, int nb, int p,
                                    const std::vector<double>* weights = nullptr,
                                    size_t max_product_nodes = 4096) {
  return direct_product_oracle(graph_adjacency_matrix(g), g.num_nodes, adj_b, nb, p, weights,
                               max_product_nodes);
}

// Flattened H as a 1 x N(P+1) row, differentiable in the hidden graphs.
// H[i][p] = k^(p)(G, G'_i); the input-graph side is a constant walk count.
inline Tensor kernel_features(const Graph& g, const KernelParams& params) {
  if (g.num_nodes < 1) throw std::invalid_argument("kernel: graph has no nodes");
  const int P = params.walk_length;
  const auto s_g = graph_walk_counts(g, P);
  std::vector<Tensor> entries;
  entries.reserve(params.feature_width());
  for (const auto& hg : params.hidden.graphs) {
    Tensor adj = hidden_adjacency(hg);
    auto powers = matrix_power_chain(adj, P);
    Tensor ones_row = Tensor::full(1, hg.num_nodes, 1.0);
    Tensor ones_col = Tensor::full(hg.num_nodes, 1, 1.0);
    entries.push_back(Tensor::scalar(static_cast<double>(g.num_nodes) * hg.num_nodes));
    for (int p = 1; p <= P; ++p) {
      Tensor s_hidden = matmul(matmul(ones_row, powers[p - 1]), ones_col);
      entries.push_back(scale(s_hidden, s_g[p]));
    }
  }
  Tensor h = concat(entries);
  if (params.log1p_features) h = log(add_const(h, 1.0));
  return h;
}

inline Tensor kernel_forward(const Graph& g, const KernelParams& params) {
  return add_rowvec(matmul(kernel_features(g, params), params.head_weight), params.head_bias);
}

struct WeightedEdge {
  int u = 0, v = 0;
  double weight = 0.0;
};

// Edges of each hidden graph whose effective weight exceeds the threshold.
inline std::vector<std::vector<WeightedEdge>> hidden_graph_edges(const KernelParams& params,
                                                                 double threshold) {
  if (threshold < 0.0) throw std::invalid_argument("hidden_graph_edges: threshold must be >= 0");
  std::vector<std::vector<WeightedEdge>> out;
  for (const auto& hg : params.hidden.graphs) {
    std::vector<WeightedEdge> edges;
    const auto adj = hidden_adjacency(hg).value();
    for (int i = 0; i < hg.num_nodes; ++i)
      for (int j = i + 1; j < hg.num_nodes; ++j) {
        const double w = adj[static_cast<size_t>(i) * hg.num_nodes + j];
        if (w > threshold) edges.push_back({i, j, w});
      }
    out.push_back(std::move(edges));
  }
  return out;
}

inline std::string hidden_graph_dot(const std::vector<WeightedEdge>& edges, int num_nodes,
                                    const std::string& name) {
  std::ostringstream os;
  os << "graph " << name << " {\n";
  for (int v = 0; v < num_nodes; ++v) os << "  " << v << ";\n";
  for (const auto& e : edges)
    os << "  " << e.u << " -- " << e.v << " [weight=" << format_double(e.weight) << "];\n";
  os << "}\n";
  return os.str();
}

}  // namespace tgnn
