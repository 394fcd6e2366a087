#pragma once

#include <algorithm>
#include <cstdint>

#include "tgnn/core.hpp"
#include "tgnn/rng.hpp"

namespace tgnn {

// Three structurally distinct families at desk scale: cycles, stars, and
// near-complete graphs (complete minus a random 15% of edges). Graphs carry
// no node features; callers featurize (degree one-hot) like any other
// attribute-less dataset.
inline Dataset make_synthetic_dataset(int per_class = 100, int min_nodes = 6, int max_nodes = 12,
                                      std::uint64_t seed = 1) {
  if (per_class < 1 || min_nodes < 3 || max_nodes < min_nodes)
    throw std::invalid_argument("synthetic: bad size parameters");
  Rng rng = make_rng(seed, 0x535);
  std::uniform_int_distribution<int> size(min_nodes, max_nodes);

  Dataset ds;
  ds.name = "synthetic-3class";
  ds.num_classes = 3;
  for (int label = 0; label < 3; ++label) {
    for (int i = 0; i < per_class; ++i) {
      Graph g;
      g.num_nodes = size(rng);
      g.label = label;
      if (label == 0) {
        for (int v = 0; v < g.num_nodes; ++v) g.edges.emplace_back(v, (v + 1) % g.num_nodes);
      } else if (label == 1) {
        for (int v = 1; v < g.num_nodes; ++v) g.edges.emplace_back(0, v);
      } else {
        for (int u = 0; u < g.num_nodes; ++u)
          for (int v = u + 1; v < g.num_nodes; ++v) g.edges.emplace_back(u, v);
        const int remove = std::max<int>(1, static_cast<int>(g.edges.size()) * 15 / 100);
        std::shuffle(g.edges.begin(), g.edges.end(), rng);
        g.edges.resize(g.edges.size() - remove);
      }
      canonicalize_edges(g.edges);
      ds.graphs.push_back(std::move(g));
    }
  }
  std::shuffle(ds.graphs.begin(), ds.graphs.end(), rng);
  return ds;
}

}  // namespace tgnn
