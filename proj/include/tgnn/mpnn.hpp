#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "tgnn/core.hpp"
#include "tgnn/rng.hpp"
#include "tgnn/tensor.hpp"

namespace tgnn {

// Message passing encoder: K rounds of self-plus-neighbor aggregation, each
// followed by a two-layer perceptron, then an attention readout that prunes
// nodes with non-positive scores.

struct MpnnLayer {
  Tensor w1, b1, w2, b2;
};

struct MpnnParams {
  int input_dim = 0;
  int hidden_dim = 0;
  std::vector<MpnnLayer> layers;
  Tensor attention;  // hidden_dim x 1

  static MpnnParams init(int input_dim, int hidden_dim, int num_layers, Rng& rng) {
    if (num_layers < 1) throw std::invalid_argument("mpnn: need at least one layer");
    MpnnParams p;
    p.input_dim = input_dim;
    p.hidden_dim = hidden_dim;
    for (int k = 0; k < num_layers; ++k) {
      const int in = k == 0 ? input_dim : hidden_dim;
      MpnnLayer layer;
      layer.w1 = glorot_tensor(in, hidden_dim, rng);
      layer.b1 = Tensor::zeros(1, hidden_dim, true);
      layer.w2 = glorot_tensor(hidden_dim, hidden_dim, rng);
      layer.b2 = Tensor::zeros(1, hidden_dim, true);
      p.layers.push_back(std::move(layer));
    }
    const double limit = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
    p.attention = uniform_tensor(hidden_dim, 1, -limit, limit, rng, true);
    return p;
  }

  int num_layers() const { return static_cast<int>(layers.size()); }

  std::vector<Tensor> parameters() const {
    std::vector<Tensor> out;
    for (const auto& l : layers) {
      out.push_back(l.w1);
      out.push_back(l.b1);
      out.push_back(l.w2);
      out.push_back(l.b2);
    }
    out.push_back(attention);
    return out;
  }

  std::vector<std::pair<std::string, Tensor>> named_tensors(const std::string& prefix) const {
    std::vector<std::pair<std::string, Tensor>> out;
    for (size_t k = 0; k < layers.size(); ++k) {
      const std::string base = prefix + ".layer" + std::to_string(k);
      out.emplace_back(base + ".w1", layers[k].w1);
      out.emplace_back(base + ".b1", layers[k].b1);
      out.emplace_back(base + ".w2", layers[k].w2);
      out.emplace_back(base + ".b2", layers[k].b2);
    }
    out.emplace_back(prefix + ".attention", attention);
    return out;
  }
};

// Per-node states after all aggregation rounds, as an n x d matrix.
inline Tensor mpnn_node_states(const Graph& graph, const MpnnParams& params) {
  if (graph.num_nodes < 1) throw std::invalid_argument("mpnn: graph has no nodes");
  if (graph.feature_dim != params.input_dim)
    throw std::invalid_argument("mpnn: feature_dim does not match input_dim");
  const auto nbrs = adjacency_lists(graph);
  Tensor states(graph.num_nodes, graph.feature_dim, graph.features);
  for (const auto& layer : params.layers) {
    Tensor agg = neighbor_sum_self(states, nbrs);
    Tensor hidden = relu(add_rowvec(matmul(agg, layer.w1), layer.b1));
    states = add_rowvec(matmul(hidden, layer.w2), layer.b2);
  }
  return states;
}

struct ReadoutResult {
  Tensor embedding;             // 1 x d
  std::vector<double> weights;  // per-node attention weights at forward values
  bool fallback = false;        // true when every score was non-positive
};

// Attention readout with indicator pruning: nodes scoring t^T h <= 0 get
// weight exactly zero; the rest get exp-proportional weights summing to one.
// If every node is pruned the readout falls back to uniform mean pooling.
// The indicator is a constant during differentiation; `frozen_mask` lets a
// caller pin it explicitly (used by gradient checks).
inline ReadoutResult attention_readout(const Tensor& node_states, const Tensor& t,
                                       const std::vector<bool>* frozen_mask = nullptr) {
  if (t.cols() != 1 || t.rows() != node_states.cols())
    throw std::invalid_argument("attention_readout: attention vector must be d x 1");
  const int n = node_states.rows();
  Tensor scores = matmul(node_states, t);  // n x 1

  std::vector<bool> mask(n);
  if (frozen_mask) {
    if (frozen_mask->size() != static_cast<size_t>(n))
      throw std::invalid_argument("attention_readout: frozen mask size mismatch");
    mask = *frozen_mask;
  } else {
    for (int v = 0; v < n; ++v) mask[v] = scores.value()[v] > 0.0;
  }
  bool any = false;
  double shift = 0.0;
  for (int v = 0; v < n; ++v)
    if (mask[v]) {
      shift = any ? std::max(shift, scores.value()[v]) : scores.value()[v];
      any = true;
    }

  ReadoutResult out;
  if (!any) {
    Tensor uniform = Tensor::full(n, 1, 1.0 / n);
    out.embedding = weighted_row_sum(uniform, node_states);
    out.weights.assign(n, 1.0 / n);
    out.fallback = true;
    return out;
  }

  std::vector<double> mask_vals(n, 0.0);
  for (int v = 0; v < n; ++v) mask_vals[v] = mask[v] ? 1.0 : 0.0;
  Tensor mask_t(n, 1, std::move(mask_vals));
  Tensor expd = exp(add_const(scores, -shift));
  Tensor masked = elementwise_multiply(expd, mask_t);
  Tensor den = csum(masked);
  Tensor weights = divide_by_scalar(masked, den);
  out.embedding = weighted_row_sum(weights, node_states);
  out.weights = weights.value();
  return out;
}

inline Tensor mpnn_forward(const Graph& graph, const MpnnParams& params,
                           const std::vector<bool>* frozen_mask = nullptr) {
  return attention_readout(mpnn_node_states(graph, params), params.attention, frozen_mask).embedding;
}

}  // namespace tgnn
