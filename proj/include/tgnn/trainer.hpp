#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tgnn/adam.hpp"
#include "tgnn/augment.hpp"
#include "tgnn/bank.hpp"
#include "tgnn/checkpoint.hpp"
#include "tgnn/core.hpp"
#include "tgnn/mpnn.hpp"
#include "tgnn/rng.hpp"
#include "tgnn/rwkernel.hpp"
#include "tgnn/split.hpp"
#include "tgnn/tensor.hpp"

namespace tgnn {

// Joint semi-supervised optimization: a supervised cross-entropy loss on the
// labeled batch plus a consistency loss that matches each unlabeled graph's
// anchor-similarity distributions across the two embedding spaces.

// ---------------------------------------------------------------------------
// similarity distributions

struct SimilarityDistribution {
  std::vector<double> probs;  // over current bank entries, in queue order
  std::int64_t owner = -1;
  enum class Space { message_passing, kernel } space = Space::message_passing;
};

namespace detail_sim {

inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0, na = 0, nb = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;  // zero vectors have cosine 0
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace detail_sim

// probs[m] proportional to exp(cos(embedding, anchor_m) / tau).
inline SimilarityDistribution similarity_distribution(
    const std::vector<double>& embedding, const std::vector<std::vector<double>>& anchors, double tau,
    std::int64_t owner = -1,
    SimilarityDistribution::Space space = SimilarityDistribution::Space::message_passing) {
  if (anchors.empty()) throw std::invalid_argument("similarity: empty anchor set");
  if (!(tau > 0.0)) throw std::invalid_argument("similarity: tau must be positive");
  std::vector<double> scores(anchors.size());
  for (size_t m = 0; m < anchors.size(); ++m) {
    if (anchors[m].size() != embedding.size())
      throw std::invalid_argument("similarity: anchor dimension mismatch");
    scores[m] = detail_sim::cosine(embedding, anchors[m]) / tau;
  }
  const double mx = *std::max_element(scores.begin(), scores.end());
  double den = 0;
  for (double s : scores) den += std::exp(s - mx);
  SimilarityDistribution out;
  out.owner = owner;
  out.space = space;
  out.probs.resize(scores.size());
  for (size_t m = 0; m < scores.size(); ++m) out.probs[m] = std::exp(scores[m] - mx) / den;
  return out;
}

// Constant d x M matrix whose columns are the L2-normalized anchor vectors of
// one embedding space; cos(z, a_m) is then row m of l2_normalize(z) * A.
inline Tensor anchor_matrix(const MemoryBank& bank, bool kernel_space, int dim) {
  const int m = static_cast<int>(bank.size());
  if (m == 0) throw std::invalid_argument("anchor_matrix: empty bank");
  std::vector<double> vals(static_cast<size_t>(dim) * m, 0.0);
  for (int c = 0; c < m; ++c) {
    const auto& vec = kernel_space ? bank.at(c).w : bank.at(c).z;
    if (static_cast<int>(vec.size()) != dim) throw std::invalid_argument("anchor_matrix: dim mismatch");
    double sq = 0;
    for (double v : vec) sq += v * v;
    const double norm = std::sqrt(sq);
    if (norm > 0.0)
      for (int r = 0; r < dim; ++r) vals[static_cast<size_t>(r) * m + c] = vec[r] / norm;
  }
  return Tensor(dim, m, std::move(vals));  // constant: no gradient ever flows in
}

// Differentiable similarity distribution of one embedding against the bank.
inline Tensor similarity_row(const Tensor& embedding, const Tensor& anchor_mat, double tau) {
  return row_softmax(scale(matmul(l2_normalize(embedding), anchor_mat), 1.0 / tau));
}

// ---------------------------------------------------------------------------
// losses

// Symmetric KL divergence 0.5 * (KL(p||q) + KL(q||p)) with probabilities
// clamped at 1e-12 inside the logarithms.
inline Tensor consistency_loss_t(const Tensor& p, const Tensor& q) {
  if (p.cols() != q.cols() || p.rows() != 1 || q.rows() != 1)
    throw std::invalid_argument("consistency_loss: distribution length mismatch");
  Tensor lp = log(clamp_min(p, 1e-12));
  Tensor lq = log(clamp_min(q, 1e-12));
  Tensor kl_pq = sum(elementwise_multiply(p, sub(lp, lq)));
  Tensor kl_qp = sum(elementwise_multiply(q, sub(lq, lp)));
  return scale(add(kl_pq, kl_qp), 0.5);
}

inline double consistency_loss(const SimilarityDistribution& p, const SimilarityDistribution& q) {
  if (p.probs.size() != q.probs.size())
    throw std::invalid_argument("consistency_loss: distribution length mismatch");
  double kl_pq = 0, kl_qp = 0;
  for (size_t m = 0; m < p.probs.size(); ++m) {
    const double lp = std::log(std::max(p.probs[m], 1e-12));
    const double lq = std::log(std::max(q.probs[m], 1e-12));
    kl_pq += p.probs[m] * (lp - lq);
    kl_qp += q.probs[m] * (lq - lp);
  }
  return 0.5 * (kl_pq + kl_qp);
}

// Mean cross entropy of one-vs-all softmax rows, in stable log-sum-exp form.
inline Tensor supervised_loss(const std::vector<Tensor>& logit_rows, const std::vector<int>& labels) {
  if (logit_rows.empty() || logit_rows.size() != labels.size())
    throw std::invalid_argument("supervised_loss: need one label per row");
  Tensor acc;
  for (size_t i = 0; i < logit_rows.size(); ++i) {
    const Tensor& row = logit_rows[i];
    const int classes = row.cols();
    if (labels[i] < 0 || labels[i] >= classes) throw std::invalid_argument("supervised_loss: bad label");
    double shift = row.value()[0];
    for (double v : row.value()) shift = std::max(shift, v);
    Tensor lse = add_const(log(sum(exp(add_const(row, -shift)))), shift);
    std::vector<double> pick(classes, 0.0);
    pick[labels[i]] = 1.0;
    Tensor truth = sum(elementwise_multiply(row, Tensor(1, classes, std::move(pick))));
    Tensor ce = sub(lse, truth);
    acc = i == 0 ? ce : add(acc, ce);
  }
  return scale(acc, 1.0 / static_cast<double>(logit_rows.size()));
}

inline Tensor supervised_loss(const Tensor& logits, const std::vector<int>& labels) {
  std::vector<Tensor> rows;
  rows.reserve(logits.rows());
  for (int i = 0; i < logits.rows(); ++i) rows.push_back(slice_row(logits, i));
  return supervised_loss(rows, labels);
}

// ---------------------------------------------------------------------------
// model

enum class Variant { tgnn, mp_sup, gk_sup, mp_ensemble, gk_ensemble, no_aug };

inline const char* variant_name(Variant v) {
  switch (v) {
    case Variant::tgnn: return "tgnn";
    case Variant::mp_sup: return "mp-sup";
    case Variant::gk_sup: return "gk-sup";
    case Variant::mp_ensemble: return "mp-ensemble";
    case Variant::gk_ensemble: return "gk-ensemble";
    case Variant::no_aug: return "no-aug";
  }
  return "?";
}

inline Variant variant_from_name(const std::string& s) {
  for (Variant v : {Variant::tgnn, Variant::mp_sup, Variant::gk_sup, Variant::mp_ensemble,
                    Variant::gk_ensemble, Variant::no_aug})
    if (s == variant_name(v)) return v;
  throw std::invalid_argument("unknown variant: " + s);
}

struct ClassifierParams {
  Tensor w1, b1, w2, b2;

  static ClassifierParams init(int dim, int num_classes, Rng& rng) {
    ClassifierParams p;
    p.w1 = glorot_tensor(dim, dim, rng);
    p.b1 = Tensor::zeros(1, dim, true);
    p.w2 = glorot_tensor(dim, num_classes, rng);
    p.b2 = Tensor::zeros(1, num_classes, true);
    return p;
  }

  Tensor forward(const Tensor& x) const {
    return add_rowvec(matmul(relu(add_rowvec(matmul(x, w1), b1)), w2), b2);
  }

  std::vector<Tensor> parameters() const { return {w1, b1, w2, b2}; }

  std::vector<std::pair<std::string, Tensor>> named_tensors(const std::string& prefix) const {
    return {{prefix + ".w1", w1}, {prefix + ".b1", b1}, {prefix + ".w2", w2}, {prefix + ".b2", b2}};
  }
};

// One encoder slot: either a message passing module or a graph kernel module.
struct Encoder {
  std::optional<MpnnParams> mpnn;
  std::optional<KernelParams> kernel;

  Tensor forward(const Graph& g) const {
    if (mpnn) return mpnn_forward(g, *mpnn);
    return kernel_forward(g, *kernel);
  }
  bool is_kernel() const { return kernel.has_value(); }

  std::vector<Tensor> parameters() const {
    if (mpnn) return mpnn->parameters();
    return kernel->parameters();
  }
  std::vector<std::pair<std::string, Tensor>> named_tensors(const std::string& prefix) const {
    if (mpnn) return mpnn->named_tensors(prefix);
    return kernel->named_tensors(prefix);
  }
};

struct ModelDims {
  int input_dim = 0;
  int num_classes = 0;
  int embed_dim = 64;
  int mpnn_layers = 3;
  int hidden_graphs = 16;
  int hidden_nodes = 5;
  int walk_length = 3;
  bool kernel_log1p = false;
};

// Twin model: the primary encoder feeds the classifier (and the z space);
// the secondary encoder, when present, provides the w space for the
// consistency loss. The ablation variants differ only in this wiring.
struct TwinModel {
  Variant variant = Variant::tgnn;
  ModelDims dims;
  Encoder primary;
  std::optional<Encoder> secondary;
  ClassifierParams classifier;

  static TwinModel init(Variant variant, const ModelDims& dims, std::uint64_t seed) {
    TwinModel m;
    m.variant = variant;
    m.dims = dims;
    Rng rng1 = make_rng(seed, 0xe1c);
    Rng rng2 = make_rng(seed, 0xe2c);  // different stream: ensembles differ by init
    Rng rngc = make_rng(seed, 0xc1f);

    auto make_mpnn = [&](Rng& rng) {
      Encoder e;
      e.mpnn = MpnnParams::init(dims.input_dim, dims.embed_dim, dims.mpnn_layers, rng);
      return e;
    };
    auto make_kernel = [&](Rng& rng) {
      Encoder e;
      e.kernel = KernelParams::init(dims.hidden_graphs, dims.hidden_nodes, dims.walk_length,
                                    dims.embed_dim, rng, dims.kernel_log1p);
      return e;
    };

    switch (variant) {
      case Variant::tgnn:
      case Variant::no_aug:
        m.primary = make_mpnn(rng1);
        m.secondary = make_kernel(rng2);
        break;
      case Variant::mp_sup:
        m.primary = make_mpnn(rng1);
        break;
      case Variant::gk_sup:
        m.primary = make_kernel(rng1);
        break;
      case Variant::mp_ensemble:
        m.primary = make_mpnn(rng1);
        m.secondary = make_mpnn(rng2);
        break;
      case Variant::gk_ensemble:
        m.primary = make_kernel(rng1);
        m.secondary = make_kernel(rng2);
        break;
    }
    m.classifier = ClassifierParams::init(dims.embed_dim, dims.num_classes, rngc);
    return m;
  }

  Tensor embed_primary(const Graph& g) const { return primary.forward(g); }
  Tensor embed_secondary(const Graph& g) const { return secondary->forward(g); }

  std::vector<Tensor> parameters() const {
    std::vector<Tensor> out = primary.parameters();
    if (secondary) {
      auto s = secondary->parameters();
      out.insert(out.end(), s.begin(), s.end());
    }
    auto c = classifier.parameters();
    out.insert(out.end(), c.begin(), c.end());
    return out;
  }

  std::vector<std::pair<std::string, Tensor>> named_tensors() const {
    auto out = primary.named_tensors("primary");
    if (secondary) {
      auto s = secondary->named_tensors("secondary");
      out.insert(out.end(), s.begin(), s.end());
    }
    auto c = classifier.named_tensors("classifier");
    out.insert(out.end(), c.begin(), c.end());
    return out;
  }

  Checkpoint to_checkpoint() const {
    Checkpoint ckpt;
    ckpt.meta["variant"] = variant_name(variant);
    ckpt.meta["input_dim"] = std::to_string(dims.input_dim);
    ckpt.meta["num_classes"] = std::to_string(dims.num_classes);
    ckpt.meta["embed_dim"] = std::to_string(dims.embed_dim);
    ckpt.meta["mpnn_layers"] = std::to_string(dims.mpnn_layers);
    ckpt.meta["hidden_graphs"] = std::to_string(dims.hidden_graphs);
    ckpt.meta["hidden_nodes"] = std::to_string(dims.hidden_nodes);
    ckpt.meta["walk_length"] = std::to_string(dims.walk_length);
    ckpt.meta["kernel_log1p"] = dims.kernel_log1p ? "1" : "0";
    for (const auto& [name, t] : named_tensors()) ckpt.tensors.emplace_back(name, Tensor(t.rows(), t.cols(), t.value()));
    return ckpt;
  }

  static TwinModel from_checkpoint(const Checkpoint& ckpt, std::uint64_t seed = 0) {
    ModelDims dims;
    dims.input_dim = static_cast<int>(parse_long(ckpt.meta_at("input_dim"), "ckpt input_dim"));
    dims.num_classes = static_cast<int>(parse_long(ckpt.meta_at("num_classes"), "ckpt num_classes"));
    dims.embed_dim = static_cast<int>(parse_long(ckpt.meta_at("embed_dim"), "ckpt embed_dim"));
    dims.mpnn_layers = static_cast<int>(parse_long(ckpt.meta_at("mpnn_layers"), "ckpt mpnn_layers"));
    dims.hidden_graphs = static_cast<int>(parse_long(ckpt.meta_at("hidden_graphs"), "ckpt hidden_graphs"));
    dims.hidden_nodes = static_cast<int>(parse_long(ckpt.meta_at("hidden_nodes"), "ckpt hidden_nodes"));
    dims.walk_length = static_cast<int>(parse_long(ckpt.meta_at("walk_length"), "ckpt walk_length"));
    dims.kernel_log1p = ckpt.meta_at("kernel_log1p") == "1";
    TwinModel m = init(variant_from_name(ckpt.meta_at("variant")), dims, seed);
    restore_named(ckpt, m.named_tensors());
    return m;
  }
};

// ---------------------------------------------------------------------------
// training loop

struct TrainConfig {
  int epochs = 300;
  int batch_size = 64;
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  double tau = 0.5;
  double lambda = 1.0;  // weight of the consistency term in the total loss
  int bank_capacity = 256;
  std::uint64_t seed = 1;
  AugmentConfig augment;
};

struct LossReport {
  double sup_loss = 0.0;
  double con_loss = 0.0;
  double total_loss = 0.0;
  int epoch = 0;
  int step = 0;
};

struct DivergenceError : std::runtime_error {
  LossReport report;
  explicit DivergenceError(LossReport r)
      : std::runtime_error("training diverged: non-finite loss at epoch " + std::to_string(r.epoch) +
                           " step " + std::to_string(r.step)),
        report(r) {}
};

struct StepLosses {
  Tensor sup;
  Tensor total;
  double con_value = 0.0;
  std::vector<BankEntry> pending;  // labeled batch embeddings, detached
};

// Forward pass of one step: augment twice, embed both views, supervised loss
// on the labeled batch, consistency loss of each unlabeled graph against the
// bank. Pure given (epoch, step); train_step adds the update and bank push.
inline StepLosses forward_losses(const TwinModel& model, const Dataset& ds,
                                 const std::vector<int>& labeled_batch,
                                 const std::vector<int>& unlabeled_batch, const MemoryBank& bank,
                                 const Augmenter& augmenter, const TrainConfig& cfg, int epoch,
                                 int step) {
  if (labeled_batch.empty()) throw std::invalid_argument("train_step: empty labeled batch");
  const bool twin = model.secondary.has_value();

  auto view_rng = [&](int graph_id, int view) {
    return make_rng(cfg.seed, 0xa06, static_cast<std::uint64_t>(graph_id), epoch, step, view);
  };

  StepLosses out;
  std::vector<Tensor> logit_rows;
  std::vector<int> labels;
  for (int idx : labeled_batch) {
    const Graph& g = ds.graphs[idx];
    if (!g.label) throw std::invalid_argument("train_step: labeled batch contains unlabeled graph");
    Rng r1 = view_rng(idx, 1);
    Tensor z = model.embed_primary(augmenter.random_augment(g, r1));
    logit_rows.push_back(model.classifier.forward(z));
    labels.push_back(*g.label);
    if (twin) {
      Rng r2 = view_rng(idx, 2);
      Tensor w = model.embed_secondary(augmenter.random_augment(g, r2));
      out.pending.push_back({idx, z.value(), w.value()});
    }
  }
  out.sup = supervised_loss(logit_rows, labels);

  out.total = out.sup;
  const bool consistency_active = twin && cfg.lambda != 0.0 && !bank.empty() && !unlabeled_batch.empty();
  if (consistency_active) {
    Tensor anchors_z = anchor_matrix(bank, false, model.dims.embed_dim);
    Tensor anchors_w = anchor_matrix(bank, true, model.dims.embed_dim);
    Tensor con_acc;
    for (size_t j = 0; j < unlabeled_batch.size(); ++j) {
      const Graph& g = ds.graphs[unlabeled_batch[j]];
      Rng r1 = view_rng(unlabeled_batch[j], 1);
      Rng r2 = view_rng(unlabeled_batch[j], 2);
      Tensor p = similarity_row(model.embed_primary(augmenter.random_augment(g, r1)), anchors_z, cfg.tau);
      Tensor q = similarity_row(model.embed_secondary(augmenter.random_augment(g, r2)), anchors_w, cfg.tau);
      Tensor term = consistency_loss_t(p, q);
      con_acc = j == 0 ? term : add(con_acc, term);
    }
    Tensor con = scale(con_acc, 1.0 / static_cast<double>(unlabeled_batch.size()));
    out.con_value = con.item();
    out.total = add(out.sup, scale(con, cfg.lambda));
  }
  return out;
}

// One optimization step: forward_losses, joint Adam update of every
// parameter, then FIFO-enqueue the labeled batch's detached embeddings.
inline LossReport train_step(TwinModel& model, const Dataset& ds, const std::vector<int>& labeled_batch,
                             const std::vector<int>& unlabeled_batch, MemoryBank& bank,
                             const Augmenter& augmenter, const TrainConfig& cfg,
                             std::vector<Tensor>& params, AdamState& adam, int epoch, int step) {
  StepLosses losses =
      forward_losses(model, ds, labeled_batch, unlabeled_batch, bank, augmenter, cfg, epoch, step);

  LossReport report{losses.sup.item(), losses.con_value, losses.total.item(), epoch, step};
  if (!std::isfinite(report.total_loss)) throw DivergenceError(report);

  backward(losses.total);
  adam_step(params, adam);

  for (auto& entry : losses.pending) bank.push(std::move(entry));
  return report;
}

struct EvalResult {
  double accuracy = 0.0;
  std::vector<long> correct;  // per class
  std::vector<long> total;
};

// Accuracy of argmax classification on clean (unaugmented) graphs.
inline EvalResult evaluate(const TwinModel& model, const Dataset& ds, const std::vector<int>& indices) {
  EvalResult res;
  res.correct.assign(model.dims.num_classes, 0);
  res.total.assign(model.dims.num_classes, 0);
  long hits = 0;
  for (int idx : indices) {
    const Graph& g = ds.graphs[idx];
    if (!g.label) throw std::invalid_argument("evaluate: graph has no label");
    Tensor logits = model.classifier.forward(model.embed_primary(g));
    int best = 0;
    for (int c = 1; c < logits.cols(); ++c)
      if (logits.value()[c] > logits.value()[best]) best = c;
    ++res.total[*g.label];
    if (best == *g.label) {
      ++res.correct[*g.label];
      ++hits;
    }
  }
  res.accuracy = indices.empty() ? 0.0 : static_cast<double>(hits) / indices.size();
  return res;
}

struct EpochStats {
  int epoch = 0;
  double sup_loss = 0.0;
  double con_loss = 0.0;
  double val_acc = 0.0;
};

struct FitResult {
  std::vector<EpochStats> history;
  int best_epoch = -1;
  double best_val_acc = 0.0;
};

// Epochs of train_step over shuffled minibatches. The number of steps per
// epoch follows the unlabeled set (or the labeled set when it is empty);
// labeled batches are resampled with replacement when the labeled split is
// smaller than the batch size. Returns the parameters of the best
// validation epoch (ties broken toward the earlier epoch).
inline FitResult fit(TwinModel& model, const Dataset& ds, const SplitDataset& split,
                     const TrainConfig& cfg, const Augmenter& augmenter, MemoryBank* bank_out = nullptr) {
  if (split.labeled_train.empty()) throw std::invalid_argument("fit: labeled split is empty");
  std::vector<Tensor> params = model.parameters();
  AdamState adam(cfg.learning_rate, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_epsilon);
  MemoryBank bank(cfg.bank_capacity);

  FitResult result;
  std::vector<std::vector<double>> best_values;

  const auto& labeled = split.labeled_train;
  const auto& unlabeled = split.unlabeled_train;
  const int labeled_n = static_cast<int>(labeled.size());
  const bool resample = labeled_n < cfg.batch_size;

  Rng shuffle_rng = make_rng(cfg.seed, 0x5f1e);
  std::vector<int> labeled_order(labeled), unlabeled_order(unlabeled);
  std::shuffle(labeled_order.begin(), labeled_order.end(), shuffle_rng);
  size_t labeled_pos = 0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(unlabeled_order.begin(), unlabeled_order.end(), shuffle_rng);
    const int steps = unlabeled.empty()
                          ? (labeled_n + cfg.batch_size - 1) / cfg.batch_size
                          : (static_cast<int>(unlabeled.size()) + cfg.batch_size - 1) / cfg.batch_size;
    double sup_sum = 0, con_sum = 0;
    for (int step = 0; step < steps; ++step) {
      std::vector<int> lb;
      if (resample) {
        std::uniform_int_distribution<int> pick(0, labeled_n - 1);
        for (int i = 0; i < cfg.batch_size; ++i) lb.push_back(labeled[pick(shuffle_rng)]);
      } else {
        for (int i = 0; i < cfg.batch_size; ++i) {
          if (labeled_pos == labeled_order.size()) {
            std::shuffle(labeled_order.begin(), labeled_order.end(), shuffle_rng);
            labeled_pos = 0;
          }
          lb.push_back(labeled_order[labeled_pos++]);
        }
      }
      std::vector<int> ub;
      if (!unlabeled.empty()) {
        const size_t begin = static_cast<size_t>(step) * cfg.batch_size;
        const size_t end = std::min(unlabeled_order.size(), begin + cfg.batch_size);
        ub.assign(unlabeled_order.begin() + begin, unlabeled_order.begin() + end);
      }
      LossReport r = train_step(model, ds, lb, ub, bank, augmenter, cfg, params, adam, epoch, step);
      sup_sum += r.sup_loss;
      con_sum += r.con_loss;
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.sup_loss = sup_sum / steps;
    stats.con_loss = con_sum / steps;
    stats.val_acc = split.validation.empty() ? 0.0 : evaluate(model, ds, split.validation).accuracy;
    result.history.push_back(stats);

    if (result.best_epoch < 0 || stats.val_acc > result.best_val_acc) {
      result.best_epoch = epoch;
      result.best_val_acc = stats.val_acc;
      best_values.clear();
      for (const auto& p : params) best_values.push_back(p.value());
    }
  }

  if (!best_values.empty())
    for (size_t i = 0; i < params.size(); ++i) params[i].value() = best_values[i];
  if (bank_out) *bank_out = bank;
  return result;
}

}  // namespace tgnn
