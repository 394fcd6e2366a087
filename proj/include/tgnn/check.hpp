#pragma once

#include <cmath>
#include <deque>
#include <sstream>
#include <string>
#include <vector>

#include "tgnn/gradcheck.hpp"
#include "tgnn/rng.hpp"
#include "tgnn/rwkernel.hpp"
#include "tgnn/synthetic.hpp"
#include "tgnn/trainer.hpp"

namespace tgnn {

// Self-test suite behind the `check` CLI subcommand and the acceptance
// harness: gradient checks, the kernel-vs-oracle comparison, and the
// distribution/queue invariants, all against their stated tolerances.

namespace detail_check {

inline Tensor rand_t(int r, int c, Rng& rng, double lo = -1.0, double hi = 1.0) {
  return uniform_tensor(r, c, lo, hi, rng, true);
}

inline Tensor rand_avoid_zero(int r, int c, Rng& rng) {
  std::uniform_real_distribution<double> mag(0.1, 1.0);
  std::bernoulli_distribution sign(0.5);
  std::vector<double> v(static_cast<size_t>(r) * c);
  for (auto& x : v) x = sign(rng) ? mag(rng) : -mag(rng);
  return Tensor(r, c, std::move(v), true);
}

inline double probe_op(const std::function<Tensor()>& op, const std::vector<Tensor>& params,
                       Rng& rng) {
  Tensor shape_probe = op();
  Tensor w = uniform_tensor(shape_probe.rows(), shape_probe.cols(), -1.0, 1.0, rng, false);
  return finite_diff_check([&] { return sum(elementwise_multiply(op(), w)); }, params);
}

}  // namespace detail_check

// Finite-difference error over every autodiff primitive, randomized shapes.
inline double max_primitive_gradient_error(int trials, std::uint64_t seed) {
  using namespace detail_check;
  Rng rng = make_rng(seed, 0x96ad);
  double worst = 0.0;
  std::uniform_int_distribution<int> dim(1, 4);
  for (int t = 0; t < trials; ++t) {
    const int m = dim(rng), k = dim(rng), n = dim(rng);
    {
      Tensor a = rand_t(m, k, rng), b = rand_t(k, n, rng);
      worst = std::max(worst, probe_op([&] { return matmul(a, b); }, {a, b}, rng));
    }
    {
      Tensor a = rand_t(m, n, rng), b = rand_t(m, n, rng), r = rand_t(1, n, rng);
      worst = std::max(worst, probe_op([&] { return add(a, b); }, {a, b}, rng));
      worst = std::max(worst, probe_op([&] { return sub(a, b); }, {a, b}, rng));
      worst = std::max(worst, probe_op([&] { return elementwise_multiply(a, b); }, {a, b}, rng));
      worst = std::max(worst, probe_op([&] { return add_rowvec(a, r); }, {a, r}, rng));
    }
    {
      Tensor a = rand_t(m, n, rng), b = rand_avoid_zero(m, n, rng);
      worst = std::max(worst, probe_op([&] { return elementwise_divide(a, b); }, {a, b}, rng));
    }
    {
      Tensor a = rand_avoid_zero(m, n, rng);
      worst = std::max(worst, probe_op([&] { return relu(a); }, {a}, rng));
      worst = std::max(worst, probe_op([&] { return sigmoid(a); }, {a}, rng));
      worst = std::max(worst, probe_op([&] { return softplus(a); }, {a}, rng));
      worst = std::max(worst, probe_op([&] { return tgnn::exp(a); }, {a}, rng));
      worst = std::max(worst, probe_op([&] { return clamp_min(a, -2.0); }, {a}, rng));
      worst = std::max(worst, probe_op([&] { return scale(a, -1.7); }, {a}, rng));
      worst = std::max(worst, probe_op([&] { return add_const(a, 0.3); }, {a}, rng));
      worst = std::max(worst, probe_op([&] { return sum(a); }, {a}, rng));
      worst = std::max(worst, probe_op([&] { return csum(a); }, {a}, rng));
      worst = std::max(worst, probe_op([&] { return mean(a); }, {a}, rng));
      worst = std::max(worst, probe_op([&] { return transpose(a); }, {a}, rng));
      worst = std::max(worst, probe_op([&] { return row_softmax(a); }, {a}, rng));
      worst = std::max(worst, probe_op([&] { return l2_normalize(a); }, {a}, rng));
      worst = std::max(worst, probe_op([&] { return slice_row(a, 0); }, {a}, rng));
    }
    {
      Tensor a = rand_t(m, n, rng, 0.5, 2.0);
      worst = std::max(worst, probe_op([&] { return tgnn::log(a); }, {a}, rng));
    }
    {
      Tensor a = rand_t(m, n, rng);
      Tensor s = rand_avoid_zero(1, 1, rng);
      worst = std::max(worst, probe_op([&] { return divide_by_scalar(a, s); }, {a, s}, rng));
    }
    {
      Tensor p1 = rand_t(1, m, rng), p2 = rand_t(1, n, rng);
      worst = std::max(worst, probe_op([&] { return concat({p1, p2}); }, {p1, p2}, rng));
    }
    {
      Tensor w = rand_t(m, 1, rng), s = rand_t(m, n, rng);
      worst = std::max(worst, probe_op([&] { return weighted_row_sum(w, s); }, {w, s}, rng));
    }
    {
      const int nn = std::max(m, 2) + 1;
      std::vector<std::vector<int>> nbrs(nn);
      for (int v = 0; v + 1 < nn; ++v) {
        nbrs[v].push_back(v + 1);
        nbrs[v + 1].push_back(v);
      }
      Tensor s = rand_t(nn, n, rng);
      worst = std::max(worst, probe_op([&] { return neighbor_sum_self(s, nbrs); }, {s}, rng));
      Tensor u = rand_t(1, nn * (nn - 1) / 2, rng);
      worst = std::max(worst, probe_op([&] { return sym_from_upper(u, nn); }, {u}, rng));
      Tensor sq = rand_t(k, k, rng, -0.8, 0.8);
      worst = std::max(worst, probe_op([&] { return matrix_power_chain(sq, 3).back(); }, {sq}, rng));
    }
  }
  return worst;
}

namespace detail_check {

inline Graph random_graph(int n, int feature_dim, double edge_prob, Rng& rng) {
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

}  // namespace detail_check

// Message passing encoder gradients on a random 6-node graph, indicator mask
// frozen at its forward value.
inline double mpnn_gradient_error(std::uint64_t seed) {
  Rng rng = make_rng(seed, 0x309e);
  MpnnParams params = MpnnParams::init(3, 5, 3, rng);
  Graph g = detail_check::random_graph(6, 3, 0.5, rng);
  Tensor states = mpnn_node_states(g, params);
  Tensor scores = matmul(states, params.attention);
  std::vector<bool> mask(g.num_nodes);
  for (int v = 0; v < g.num_nodes; ++v) mask[v] = scores.value()[v] > 0.0;
  Tensor probe = uniform_tensor(1, 5, -1.0, 1.0, rng, false);
  return finite_diff_check(
      [&] { return sum(elementwise_multiply(mpnn_forward(g, params, &mask), probe)); },
      params.parameters());
}

// Graph kernel encoder gradients (hidden free weights plus head).
inline double kernel_gradient_error(std::uint64_t seed) {
  Rng rng = make_rng(seed, 0x6e31);
  KernelParams params = KernelParams::init(3, 4, 3, 5, rng);
  Graph g = detail_check::random_graph(6, 0, 0.5, rng);
  Tensor probe = uniform_tensor(1, 5, -1.0, 1.0, rng, false);
  return finite_diff_check(
      [&] { return sum(elementwise_multiply(kernel_forward(g, params), probe)); },
      params.parameters());
}

// theta, phi and eta jointly through the total loss on a 2-labeled /
// 2-unlabeled micro-batch against a warm bank.
inline double total_loss_gradient_error(std::uint64_t seed) {
  Dataset ds = make_synthetic_dataset(2, 6, 9, seed);
  apply_degree_features(ds, 8);
  ModelDims dims;
  dims.input_dim = ds.graphs.front().feature_dim;
  dims.num_classes = ds.num_classes;
  dims.embed_dim = 5;
  dims.mpnn_layers = 2;
  dims.hidden_graphs = 3;
  dims.hidden_nodes = 4;
  dims.walk_length = 2;
  TwinModel model = TwinModel::init(Variant::tgnn, dims, seed);
  TrainConfig cfg;
  cfg.seed = seed;
  AugmentConfig ac;
  ac.enabled = {AugmentKind::identity};
  Augmenter augmenter(ac, dataset_mean_feature(ds));

  MemoryBank bank(4);
  Rng rng = make_rng(seed, 0xba7c);
  for (int i = 0; i < 3; ++i) {
    BankEntry e;
    e.graph_id = 100 + i;
    e.z = uniform_tensor(1, dims.embed_dim, -1.0, 1.0, rng, false).value();
    e.w = uniform_tensor(1, dims.embed_dim, 0.1, 1.0, rng, false).value();
    bank.push(std::move(e));
  }
  return finite_diff_check(
      [&] { return forward_losses(model, ds, {0, 1}, {2, 3}, bank, augmenter, cfg, 0, 0).total; },
      model.parameters());
}

// Factorized kernel value vs. the explicit direct-product construction.
inline double kernel_oracle_max_error(int pairs, std::uint64_t seed) {
  Rng rng = make_rng(seed, 0x04ac1e);
  std::uniform_int_distribution<int> nodes(2, 6), hidden_nodes(2, 6), steps(0, 4);
  std::uniform_real_distribution<double> weight(0.0, 1.0);
  double worst = 0.0;
  for (int t = 0; t < pairs; ++t) {
    Graph g = detail_check::random_graph(nodes(rng), 0, 0.5, rng);
    const int nh = hidden_nodes(rng);
    std::vector<double> adj(static_cast<size_t>(nh) * nh, 0.0);
    for (int i = 0; i < nh; ++i)
      for (int j = i + 1; j < nh; ++j) {
        const double w = weight(rng) < 0.6 ? weight(rng) : 0.0;
        adj[static_cast<size_t>(i) * nh + j] = w;
        adj[static_cast<size_t>(j) * nh + i] = w;
      }
    const int p = steps(rng);
    const double fast = kernel_value(g, adj, nh, p);
    const double slow = direct_product_oracle(g, adj, nh, p);
    worst = std::max(worst,
                     std::abs(fast - slow) / std::max({std::abs(fast), std::abs(slow), 1.0}));
  }
  return worst;
}

// C3 x K2 = C6 with 12 single-step walks.
inline bool kernel_oracle_reference_case_ok() {
  Graph c3;
  c3.num_nodes = 3;
  c3.edges = {{0, 1}, {0, 2}, {1, 2}};
  const std::vector<double> k2 = {0, 1, 1, 0};
  return kernel_value(c3, k2, 2, 1) == 12.0 && direct_product_oracle(c3, k2, 2, 1) == 12.0;
}

// Similarity rows sum to one within 1e-12 over random instances.
inline double distribution_sum_max_error(int trials, std::uint64_t seed) {
  Rng rng = make_rng(seed, 0xd157);
  std::uniform_int_distribution<int> mdist(1, 16), ddist(2, 8);
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    const int m = mdist(rng), d = ddist(rng);
    MemoryBank bank(m);
    for (int i = 0; i < m; ++i) {
      BankEntry e;
      e.graph_id = i;
      e.z = uniform_tensor(1, d, -2, 2, rng, false).value();
      e.w = uniform_tensor(1, d, -2, 2, rng, false).value();
      bank.push(std::move(e));
    }
    Tensor z = uniform_tensor(1, d, -2, 2, rng, false);
    for (bool kernel_space : {false, true}) {
      Tensor p = similarity_row(z, anchor_matrix(bank, kernel_space, d), 0.5);
      double total = 0;
      for (double v : p.value()) total += v;
      worst = std::max(worst, std::abs(total - 1.0));
    }
  }
  return worst;
}

// Consistency loss: nonnegative, zero exactly when p = q, symmetric.
inline bool consistency_properties_ok(int trials, std::uint64_t seed, std::string* detail = nullptr) {
  Rng rng = make_rng(seed, 0xc025);
  std::uniform_int_distribution<int> mdist(1, 12);
  for (int t = 0; t < trials; ++t) {
    const int m = mdist(rng);
    auto random_dist = [&] {
      std::uniform_real_distribution<double> u(0.01, 1.0);
      std::vector<double> v(m);
      double tot = 0;
      for (auto& x : v) tot += (x = u(rng));
      for (auto& x : v) x /= tot;
      return v;
    };
    SimilarityDistribution p, q;
    p.probs = random_dist();
    q.probs = random_dist();
    const double pq = consistency_loss(p, q);
    const double qp = consistency_loss(q, p);
    if (pq < 0.0 || pq != qp || consistency_loss(p, p) != 0.0 ||
        (p.probs != q.probs && pq == 0.0)) {
      if (detail) *detail = "violation at trial " + std::to_string(t);
      return false;
    }
  }
  return true;
}

// FIFO behavior across randomized push sequences vs. a reference deque.
inline bool bank_fifo_ok(int pushes, std::uint64_t seed, std::string* detail = nullptr) {
  Rng rng = make_rng(seed, 0xf1f0);
  std::uniform_int_distribution<int> cap_dist(1, 16), len_dist(1, 64);
  int done = 0;
  while (done < pushes) {
    const size_t cap = cap_dist(rng);
    MemoryBank bank(cap);
    std::deque<std::int64_t> reference;
    const int len = len_dist(rng);
    for (int i = 0; i < len; ++i) {
      BankEntry e;
      e.graph_id = done + i;
      bank.push(std::move(e));
      reference.push_back(done + i);
      if (reference.size() > cap) reference.pop_front();
    }
    if (bank.size() != reference.size()) {
      if (detail) *detail = "size mismatch";
      return false;
    }
    for (size_t i = 0; i < reference.size(); ++i)
      if (bank.at(i).graph_id != reference[i]) {
        if (detail) *detail = "order mismatch";
        return false;
      }
    done += len;
  }
  return true;
}

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

// The `check` subcommand's battery. Tolerances mirror the test suites.
inline std::vector<CheckResult> run_self_checks(std::uint64_t seed = 12345) {
  std::vector<CheckResult> results;
  auto push = [&](const std::string& name, bool pass, const std::string& detail) {
    results.push_back({name, pass, detail});
  };

  const double prim = max_primitive_gradient_error(20, seed);
  push("primitive gradients vs finite differences", prim < 1e-4,
       "max rel err " + format_double(prim) + " (tolerance 1e-4)");
  const double mp = mpnn_gradient_error(seed);
  push("message passing encoder gradients", mp < 1e-4,
       "max rel err " + format_double(mp) + " (tolerance 1e-4)");
  const double kg = kernel_gradient_error(seed);
  push("graph kernel encoder gradients", kg < 1e-4,
       "max rel err " + format_double(kg) + " (tolerance 1e-4)");
  const double e2e = total_loss_gradient_error(seed);
  push("end-to-end total loss gradients", e2e < 1e-4,
       "max rel err " + format_double(e2e) + " (tolerance 1e-4)");
  const double oracle = kernel_oracle_max_error(100, seed);
  push("factorized kernel vs direct-product oracle", oracle < 1e-9,
       "max rel err " + format_double(oracle) + " (tolerance 1e-9)");
  push("C3 x K2 reference kernel value", kernel_oracle_reference_case_ok(), "expects 12 at p = 1");
  const double sums = distribution_sum_max_error(1000, seed);
  push("similarity distributions sum to one", sums < 1e-12,
       "max |sum - 1| " + format_double(sums) + " (tolerance 1e-12)");
  std::string detail;
  const bool con = consistency_properties_ok(1000, seed, &detail);
  push("consistency loss properties", con, con ? "nonnegative, symmetric, zero iff equal" : detail);
  const bool fifo = bank_fifo_ok(10000, seed, &detail);
  push("memory bank FIFO", fifo, fifo ? "10000 randomized pushes" : detail);
  return results;
}

}  // namespace tgnn
