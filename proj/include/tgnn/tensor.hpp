#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "tgnn/rng.hpp"

namespace tgnn {

// Dense double-precision matrices on a dynamic reverse-mode tape. Every value
// is a (rows x cols) matrix; scalars are 1x1. The tape is the DAG of nodes
// itself: each operation records its parents and a closure that pushes the
// node's gradient into them. Graphs are rebuilt per training step.

struct TensorNode {
  int rows = 0;
  int cols = 0;
  std::vector<double> value;
  std::vector<double> grad;  // empty until backward touches this node
  bool requires_grad = false;
  bool needs_grad = false;  // true if a requires_grad leaf is reachable
  std::vector<std::shared_ptr<TensorNode>> parents;
  std::function<void(TensorNode&)> backward_fn;

  size_t size() const { return value.size(); }
  std::vector<double>& grad_buf() {
    if (grad.empty()) grad.assign(value.size(), 0.0);
    return grad;
  }
};

using NodePtr = std::shared_ptr<TensorNode>;

class Tensor {
 public:
  Tensor() = default;
  Tensor(int rows, int cols, std::vector<double> value, bool requires_grad = false) {
    if (rows < 0 || cols < 0 || value.size() != static_cast<size_t>(rows) * cols)
      throw std::invalid_argument("tensor: value size does not match shape");
    n_ = std::make_shared<TensorNode>();
    n_->rows = rows;
    n_->cols = cols;
    n_->value = std::move(value);
    n_->requires_grad = requires_grad;
    n_->needs_grad = requires_grad;
  }

  static Tensor zeros(int rows, int cols, bool requires_grad = false) {
    return Tensor(rows, cols, std::vector<double>(static_cast<size_t>(rows) * cols, 0.0), requires_grad);
  }
  static Tensor full(int rows, int cols, double v, bool requires_grad = false) {
    return Tensor(rows, cols, std::vector<double>(static_cast<size_t>(rows) * cols, v), requires_grad);
  }
  static Tensor scalar(double v) { return Tensor(1, 1, {v}); }

  bool defined() const { return n_ != nullptr; }
  int rows() const { return n_->rows; }
  int cols() const { return n_->cols; }
  int size() const { return static_cast<int>(n_->value.size()); }
  bool requires_grad() const { return n_->requires_grad; }
  bool needs_grad() const { return n_->needs_grad; }

  const std::vector<double>& value() const { return n_->value; }
  std::vector<double>& value() { return n_->value; }
  const std::vector<double>& grad() const { return n_->grad; }
  double at(int i, int j) const { return n_->value[static_cast<size_t>(i) * n_->cols + j]; }
  double& at(int i, int j) { return n_->value[static_cast<size_t>(i) * n_->cols + j]; }
  double item() const {
    if (size() != 1) throw std::invalid_argument("tensor: item() on non-scalar");
    return n_->value[0];
  }
  void zero_grad() { n_->grad.clear(); }

  NodePtr node() const { return n_; }

 private:
  NodePtr n_;
};

namespace detail {

inline Tensor make_op(int rows, int cols, std::vector<double> value,
                      std::vector<NodePtr> parents, std::function<void(TensorNode&)> backward_fn) {
  Tensor t(rows, cols, std::move(value));
  TensorNode& n = *t.node();
  for (const auto& p : parents)
    if (p->needs_grad) n.needs_grad = true;
  if (n.needs_grad) {
    n.parents = std::move(parents);
    n.backward_fn = std::move(backward_fn);
  }
  return t;
}

inline void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument(std::string(op) + ": shape mismatch");
}

// Order-canonical summation: sorting the summands makes the result independent
// of the order they were produced in (used where permutation invariance of the
// forward pass must hold bit-for-bit).
inline double sorted_sum(std::vector<double>& buf) {
  for (double x : buf)
    if (x != x) return x;  // don't sort NaNs, just propagate one
  std::sort(buf.begin(), buf.end());
  double s = 0.0;
  for (double x : buf) s += x;
  return s;
}

}  // namespace detail

inline Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matmul: inner dimensions differ");
  const int m = a.rows(), k = a.cols(), n = b.cols();
  std::vector<double> out(static_cast<size_t>(m) * n, 0.0);
  const auto& av = a.value();
  const auto& bv = b.value();
  for (int i = 0; i < m; ++i)
    for (int l = 0; l < k; ++l) {
      const double aik = av[static_cast<size_t>(i) * k + l];
      if (aik == 0.0) continue;
      const double* brow = &bv[static_cast<size_t>(l) * n];
      double* orow = &out[static_cast<size_t>(i) * n];
      for (int j = 0; j < n; ++j) orow[j] += aik * brow[j];
    }
  NodePtr pa = a.node(), pb = b.node();
  return detail::make_op(m, n, std::move(out), {pa, pb}, [pa, pb, m, k, n](TensorNode& self) {
    const auto& g = self.grad;
    if (pa->needs_grad) {
      auto& ga = pa->grad_buf();
      const auto& bv = pb->value;
      for (int i = 0; i < m; ++i)
        for (int l = 0; l < k; ++l) {
          double acc = 0.0;
          const double* grow = &g[static_cast<size_t>(i) * n];
          const double* brow = &bv[static_cast<size_t>(l) * n];
          for (int j = 0; j < n; ++j) acc += grow[j] * brow[j];
          ga[static_cast<size_t>(i) * k + l] += acc;
        }
    }
    if (pb->needs_grad) {
      auto& gb = pb->grad_buf();
      const auto& av = pa->value;
      for (int l = 0; l < k; ++l)
        for (int i = 0; i < m; ++i) {
          const double ail = av[static_cast<size_t>(i) * k + l];
          if (ail == 0.0) continue;
          const double* grow = &g[static_cast<size_t>(i) * n];
          double* brow = &gb[static_cast<size_t>(l) * n];
          for (int j = 0; j < n; ++j) brow[j] += ail * grow[j];
        }
    }
  });
}

inline Tensor add(const Tensor& a, const Tensor& b) {
  detail::require_same_shape(a, b, "add");
  std::vector<double> out(a.value());
  for (int i = 0; i < a.size(); ++i) out[i] += b.value()[i];
  NodePtr pa = a.node(), pb = b.node();
  return detail::make_op(a.rows(), a.cols(), std::move(out), {pa, pb}, [pa, pb](TensorNode& self) {
    if (pa->needs_grad) {
      auto& ga = pa->grad_buf();
      for (size_t i = 0; i < self.grad.size(); ++i) ga[i] += self.grad[i];
    }
    if (pb->needs_grad) {
      auto& gb = pb->grad_buf();
      for (size_t i = 0; i < self.grad.size(); ++i) gb[i] += self.grad[i];
    }
  });
}

inline Tensor sub(const Tensor& a, const Tensor& b) {
  detail::require_same_shape(a, b, "sub");
  std::vector<double> out(a.value());
  for (int i = 0; i < a.size(); ++i) out[i] -= b.value()[i];
  NodePtr pa = a.node(), pb = b.node();
  return detail::make_op(a.rows(), a.cols(), std::move(out), {pa, pb}, [pa, pb](TensorNode& self) {
    if (pa->needs_grad) {
      auto& ga = pa->grad_buf();
      for (size_t i = 0; i < self.grad.size(); ++i) ga[i] += self.grad[i];
    }
    if (pb->needs_grad) {
      auto& gb = pb->grad_buf();
      for (size_t i = 0; i < self.grad.size(); ++i) gb[i] -= self.grad[i];
    }
  });
}

// Broadcast a 1 x n row onto every row of an m x n matrix.
inline Tensor add_rowvec(const Tensor& m, const Tensor& r) {
  if (r.rows() != 1 || r.cols() != m.cols()) throw std::invalid_argument("add_rowvec: shape mismatch");
  std::vector<double> out(m.value());
  const int cols = m.cols();
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < cols; ++j) out[static_cast<size_t>(i) * cols + j] += r.value()[j];
  NodePtr pm = m.node(), pr = r.node();
  return detail::make_op(m.rows(), m.cols(), std::move(out), {pm, pr}, [pm, pr, cols](TensorNode& self) {
    if (pm->needs_grad) {
      auto& gm = pm->grad_buf();
      for (size_t i = 0; i < self.grad.size(); ++i) gm[i] += self.grad[i];
    }
    if (pr->needs_grad) {
      auto& gr = pr->grad_buf();
      const int rows = self.rows;
      for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) gr[j] += self.grad[static_cast<size_t>(i) * cols + j];
    }
  });
}

inline Tensor elementwise_multiply(const Tensor& a, const Tensor& b) {
  detail::require_same_shape(a, b, "elementwise_multiply");
  std::vector<double> out(a.value());
  for (int i = 0; i < a.size(); ++i) out[i] *= b.value()[i];
  NodePtr pa = a.node(), pb = b.node();
  return detail::make_op(a.rows(), a.cols(), std::move(out), {pa, pb}, [pa, pb](TensorNode& self) {
    if (pa->needs_grad) {
      auto& ga = pa->grad_buf();
      for (size_t i = 0; i < self.grad.size(); ++i) ga[i] += self.grad[i] * pb->value[i];
    }
    if (pb->needs_grad) {
      auto& gb = pb->grad_buf();
      for (size_t i = 0; i < self.grad.size(); ++i) gb[i] += self.grad[i] * pa->value[i];
    }
  });
}

inline Tensor elementwise_divide(const Tensor& a, const Tensor& b) {
  detail::require_same_shape(a, b, "elementwise_divide");
  std::vector<double> out(a.value());
  for (int i = 0; i < a.size(); ++i) out[i] /= b.value()[i];
  NodePtr pa = a.node(), pb = b.node();
  return detail::make_op(a.rows(), a.cols(), std::move(out), {pa, pb}, [pa, pb](TensorNode& self) {
    if (pa->needs_grad) {
      auto& ga = pa->grad_buf();
      for (size_t i = 0; i < self.grad.size(); ++i) ga[i] += self.grad[i] / pb->value[i];
    }
    if (pb->needs_grad) {
      auto& gb = pb->grad_buf();
      for (size_t i = 0; i < self.grad.size(); ++i)
        gb[i] -= self.grad[i] * pa->value[i] / (pb->value[i] * pb->value[i]);
    }
  });
}

inline Tensor scale(const Tensor& a, double c) {
  std::vector<double> out(a.value());
  for (auto& v : out) v *= c;
  NodePtr pa = a.node();
  return detail::make_op(a.rows(), a.cols(), std::move(out), {pa}, [pa, c](TensorNode& self) {
    if (!pa->needs_grad) return;
    auto& ga = pa->grad_buf();
    for (size_t i = 0; i < self.grad.size(); ++i) ga[i] += self.grad[i] * c;
  });
}

inline Tensor add_const(const Tensor& a, double c) {
  std::vector<double> out(a.value());
  for (auto& v : out) v += c;
  NodePtr pa = a.node();
  return detail::make_op(a.rows(), a.cols(), std::move(out), {pa}, [pa](TensorNode& self) {
    if (!pa->needs_grad) return;
    auto& ga = pa->grad_buf();
    for (size_t i = 0; i < self.grad.size(); ++i) ga[i] += self.grad[i];
  });
}

inline Tensor relu(const Tensor& a) {
  std::vector<double> out(a.value());
  for (auto& v : out) v = v > 0.0 ? v : (v == v ? 0.0 : v);  // NaN passes through
  NodePtr pa = a.node();
  return detail::make_op(a.rows(), a.cols(), std::move(out), {pa}, [pa](TensorNode& self) {
    if (!pa->needs_grad) return;
    auto& ga = pa->grad_buf();
    for (size_t i = 0; i < self.grad.size(); ++i)
      if (pa->value[i] > 0.0) ga[i] += self.grad[i];
  });
}

inline Tensor sigmoid(const Tensor& a) {
  std::vector<double> out(a.value());
  for (auto& v : out) v = 1.0 / (1.0 + std::exp(-v));
  NodePtr pa = a.node();
  return detail::make_op(a.rows(), a.cols(), std::move(out), {pa}, [pa](TensorNode& self) {
    if (!pa->needs_grad) return;
    auto& ga = pa->grad_buf();
    for (size_t i = 0; i < self.grad.size(); ++i) {
      const double s = self.value[i];
      ga[i] += self.grad[i] * s * (1.0 - s);
    }
  });
}

inline Tensor softplus(const Tensor& a) {
  std::vector<double> out(a.value());
  for (auto& v : out) v = v > 30.0 ? v : std::log1p(std::exp(v));
  NodePtr pa = a.node();
  return detail::make_op(a.rows(), a.cols(), std::move(out), {pa}, [pa](TensorNode& self) {
    if (!pa->needs_grad) return;
    auto& ga = pa->grad_buf();
    for (size_t i = 0; i < self.grad.size(); ++i)
      ga[i] += self.grad[i] / (1.0 + std::exp(-pa->value[i]));
  });
}

inline Tensor exp(const Tensor& a) {
  std::vector<double> out(a.value());
  for (auto& v : out) v = std::exp(v);
  NodePtr pa = a.node();
  return detail::make_op(a.rows(), a.cols(), std::move(out), {pa}, [pa](TensorNode& self) {
    if (!pa->needs_grad) return;
    auto& ga = pa->grad_buf();
    for (size_t i = 0; i < self.grad.size(); ++i) ga[i] += self.grad[i] * self.value[i];
  });
}

// Callers clamp: inputs must be strictly positive.
inline Tensor log(const Tensor& a) {
  std::vector<double> out(a.value());
  for (auto& v : out) v = std::log(v);
  NodePtr pa = a.node();
  return detail::make_op(a.rows(), a.cols(), std::move(out), {pa}, [pa](TensorNode& self) {
    if (!pa->needs_grad) return;
    auto& ga = pa->grad_buf();
    for (size_t i = 0; i < self.grad.size(); ++i) ga[i] += self.grad[i] / pa->value[i];
  });
}

// max(x, c) with subgradient 0 at and below the threshold.
inline Tensor clamp_min(const Tensor& a, double c) {
  std::vector<double> out(a.value());
  for (auto& v : out) v = v > c ? v : (v == v ? c : v);
  NodePtr pa = a.node();
  return detail::make_op(a.rows(), a.cols(), std::move(out), {pa}, [pa, c](TensorNode& self) {
    if (!pa->needs_grad) return;
    auto& ga = pa->grad_buf();
    for (size_t i = 0; i < self.grad.size(); ++i)
      if (pa->value[i] > c) ga[i] += self.grad[i];
  });
}

inline Tensor sum(const Tensor& a) {
  double s = 0.0;
  for (double v : a.value()) s += v;
  NodePtr pa = a.node();
  return detail::make_op(1, 1, {s}, {pa}, [pa](TensorNode& self) {
    if (!pa->needs_grad) return;
    auto& ga = pa->grad_buf();
    for (auto& g : ga) g += self.grad[0];
  });
}

// Sum of all entries with order-canonical accumulation.
inline Tensor csum(const Tensor& a) {
  std::vector<double> buf(a.value());
  const double s = detail::sorted_sum(buf);
  NodePtr pa = a.node();
  return detail::make_op(1, 1, {s}, {pa}, [pa](TensorNode& self) {
    if (!pa->needs_grad) return;
    auto& ga = pa->grad_buf();
    for (auto& g : ga) g += self.grad[0];
  });
}

inline Tensor mean(const Tensor& a) {
  if (a.size() == 0) throw std::invalid_argument("mean: empty tensor");
  double s = 0.0;
  for (double v : a.value()) s += v;
  const double inv = 1.0 / a.size();
  NodePtr pa = a.node();
  return detail::make_op(1, 1, {s * inv}, {pa}, [pa, inv](TensorNode& self) {
    if (!pa->needs_grad) return;
    auto& ga = pa->grad_buf();
    for (auto& g : ga) g += self.grad[0] * inv;
  });
}

// Concatenate 1 x k_i rows into a single 1 x (sum k_i) row.
inline Tensor concat(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat: no parts");
  int total = 0;
  for (const auto& p : parts) {
    if (p.rows() != 1) throw std::invalid_argument("concat: parts must be row vectors");
    total += p.cols();
  }
  std::vector<double> out;
  out.reserve(total);
  std::vector<NodePtr> parents;
  parents.reserve(parts.size());
  for (const auto& p : parts) {
    out.insert(out.end(), p.value().begin(), p.value().end());
    parents.push_back(p.node());
  }
  auto ps = parents;
  return detail::make_op(1, total, std::move(out), std::move(parents), [ps](TensorNode& self) {
    size_t off = 0;
    for (const auto& p : ps) {
      if (p->needs_grad) {
        auto& gp = p->grad_buf();
        for (size_t i = 0; i < p->value.size(); ++i) gp[i] += self.grad[off + i];
      }
      off += p->value.size();
    }
  });
}

inline Tensor slice_row(const Tensor& a, int i) {
  if (i < 0 || i >= a.rows()) throw std::invalid_argument("slice_row: row out of range");
  const int n = a.cols();
  std::vector<double> out(a.value().begin() + static_cast<size_t>(i) * n,
                          a.value().begin() + static_cast<size_t>(i + 1) * n);
  NodePtr pa = a.node();
  return detail::make_op(1, n, std::move(out), {pa}, [pa, i, n](TensorNode& self) {
    if (!pa->needs_grad) return;
    auto& ga = pa->grad_buf();
    for (int j = 0; j < n; ++j) ga[static_cast<size_t>(i) * n + j] += self.grad[j];
  });
}

inline Tensor transpose(const Tensor& a) {
  const int m = a.rows(), n = a.cols();
  std::vector<double> out(static_cast<size_t>(m) * n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) out[static_cast<size_t>(j) * m + i] = a.value()[static_cast<size_t>(i) * n + j];
  NodePtr pa = a.node();
  return detail::make_op(n, m, std::move(out), {pa}, [pa, m, n](TensorNode& self) {
    if (!pa->needs_grad) return;
    auto& ga = pa->grad_buf();
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) ga[static_cast<size_t>(i) * n + j] += self.grad[static_cast<size_t>(j) * m + i];
  });
}

// Numerically stable softmax over each row.
inline Tensor row_softmax(const Tensor& a) {
  const int m = a.rows(), n = a.cols();
  if (n == 0) throw std::invalid_argument("row_softmax: empty rows");
  std::vector<double> out(static_cast<size_t>(m) * n);
  for (int i = 0; i < m; ++i) {
    const double* row = &a.value()[static_cast<size_t>(i) * n];
    double mx = row[0];
    for (int j = 1; j < n; ++j) mx = std::max(mx, row[j]);
    double den = 0.0;
    for (int j = 0; j < n; ++j) den += std::exp(row[j] - mx);
    for (int j = 0; j < n; ++j) out[static_cast<size_t>(i) * n + j] = std::exp(row[j] - mx) / den;
  }
  NodePtr pa = a.node();
  return detail::make_op(m, n, std::move(out), {pa}, [pa, m, n](TensorNode& self) {
    if (!pa->needs_grad) return;
    auto& ga = pa->grad_buf();
    for (int i = 0; i < m; ++i) {
      const double* y = &self.value[static_cast<size_t>(i) * n];
      const double* g = &self.grad[static_cast<size_t>(i) * n];
      double dot = 0.0;
      for (int j = 0; j < n; ++j) dot += y[j] * g[j];
      for (int j = 0; j < n; ++j) ga[static_cast<size_t>(i) * n + j] += y[j] * (g[j] - dot);
    }
  });
}

// x / ||x||_2 over all entries; the zero tensor maps to itself (zero gradient).
inline Tensor l2_normalize(const Tensor& a) {
  double sq = 0.0;
  for (double v : a.value()) sq += v * v;
  const double norm = std::sqrt(sq);
  std::vector<double> out(a.value());
  if (norm > 0.0)
    for (auto& v : out) v /= norm;
  NodePtr pa = a.node();
  return detail::make_op(a.rows(), a.cols(), std::move(out), {pa}, [pa, norm](TensorNode& self) {
    if (!pa->needs_grad || norm == 0.0) return;
    auto& ga = pa->grad_buf();
    double dot = 0.0;
    for (size_t i = 0; i < self.grad.size(); ++i) dot += self.value[i] * self.grad[i];
    for (size_t i = 0; i < self.grad.size(); ++i) ga[i] += (self.grad[i] - self.value[i] * dot) / norm;
  });
}

// y = x / s with a 1x1 scalar tensor divisor.
inline Tensor divide_by_scalar(const Tensor& x, const Tensor& s) {
  if (s.size() != 1) throw std::invalid_argument("divide_by_scalar: divisor must be 1x1");
  const double sv = s.value()[0];
  std::vector<double> out(x.value());
  for (auto& v : out) v /= sv;
  NodePtr px = x.node(), ps = s.node();
  return detail::make_op(x.rows(), x.cols(), std::move(out), {px, ps}, [px, ps, sv](TensorNode& self) {
    if (px->needs_grad) {
      auto& gx = px->grad_buf();
      for (size_t i = 0; i < self.grad.size(); ++i) gx[i] += self.grad[i] / sv;
    }
    if (ps->needs_grad) {
      auto& gs = ps->grad_buf();
      double acc = 0.0;
      for (size_t i = 0; i < self.grad.size(); ++i) acc += self.grad[i] * self.value[i];
      gs[0] -= acc / sv;
    }
  });
}

// out[0][j] = sum_v w[v] * s[v][j], accumulated in canonical order so the
// result does not depend on node numbering.
inline Tensor weighted_row_sum(const Tensor& w, const Tensor& s) {
  if (w.cols() != 1 || w.rows() != s.rows()) throw std::invalid_argument("weighted_row_sum: shape mismatch");
  const int n = s.rows(), d = s.cols();
  std::vector<double> out(d, 0.0);
  std::vector<double> buf(n);
  for (int j = 0; j < d; ++j) {
    for (int v = 0; v < n; ++v) buf[v] = w.value()[v] * s.value()[static_cast<size_t>(v) * d + j];
    out[j] = detail::sorted_sum(buf);
  }
  NodePtr pw = w.node(), ps = s.node();
  return detail::make_op(1, d, std::move(out), {pw, ps}, [pw, ps, n, d](TensorNode& self) {
    if (pw->needs_grad) {
      auto& gw = pw->grad_buf();
      for (int v = 0; v < n; ++v) {
        double acc = 0.0;
        for (int j = 0; j < d; ++j) acc += self.grad[j] * ps->value[static_cast<size_t>(v) * d + j];
        gw[v] += acc;
      }
    }
    if (ps->needs_grad) {
      auto& gs = ps->grad_buf();
      for (int v = 0; v < n; ++v)
        for (int j = 0; j < d; ++j) gs[static_cast<size_t>(v) * d + j] += pw->value[v] * self.grad[j];
    }
  });
}

// out[v] = s[v] + sum_{u in nbrs[v]} s[u], per feature column, canonical order.
// nbrs must describe an undirected structure (u in nbrs[v] iff v in nbrs[u]).
inline Tensor neighbor_sum_self(const Tensor& s, const std::vector<std::vector<int>>& nbrs) {
  const int n = s.rows(), d = s.cols();
  if (nbrs.size() != static_cast<size_t>(n)) throw std::invalid_argument("neighbor_sum_self: list size mismatch");
  std::vector<double> out(static_cast<size_t>(n) * d);
  std::vector<double> buf;
  for (int v = 0; v < n; ++v) {
    for (int j = 0; j < d; ++j) {
      buf.clear();
      buf.push_back(s.value()[static_cast<size_t>(v) * d + j]);
      for (int u : nbrs[v]) buf.push_back(s.value()[static_cast<size_t>(u) * d + j]);
      out[static_cast<size_t>(v) * d + j] = detail::sorted_sum(buf);
    }
  }
  NodePtr ps = s.node();
  auto adj = nbrs;
  return detail::make_op(n, d, std::move(out), {ps}, [ps, adj = std::move(adj), n, d](TensorNode& self) {
    if (!ps->needs_grad) return;
    auto& gs = ps->grad_buf();
    for (int v = 0; v < n; ++v) {
      const double* gr = &self.grad[static_cast<size_t>(v) * d];
      double* self_row = &gs[static_cast<size_t>(v) * d];
      for (int j = 0; j < d; ++j) self_row[j] += gr[j];
      for (int u : adj[v]) {
        double* urow = &gs[static_cast<size_t>(u) * d];
        for (int j = 0; j < d; ++j) urow[j] += gr[j];
      }
    }
  });
}

// Builds a symmetric n x n matrix with zero diagonal from a row of strict
// upper-triangle entries (row-major over i < j).
inline Tensor sym_from_upper(const Tensor& upper, int n) {
  const int m = n * (n - 1) / 2;
  if (upper.rows() != 1 || upper.cols() != m) throw std::invalid_argument("sym_from_upper: wrong entry count");
  std::vector<double> out(static_cast<size_t>(n) * n, 0.0);
  int k = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j, ++k) {
      out[static_cast<size_t>(i) * n + j] = upper.value()[k];
      out[static_cast<size_t>(j) * n + i] = upper.value()[k];
    }
  NodePtr pu = upper.node();
  return detail::make_op(n, n, std::move(out), {pu}, [pu, n](TensorNode& self) {
    if (!pu->needs_grad) return;
    auto& gu = pu->grad_buf();
    int k = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j, ++k)
        gu[k] += self.grad[static_cast<size_t>(i) * n + j] + self.grad[static_cast<size_t>(j) * n + i];
  });
}

// A^1 .. A^p by repeated multiplication; every power stays on the tape.
inline std::vector<Tensor> matrix_power_chain(const Tensor& a, int p) {
  if (a.rows() != a.cols()) throw std::invalid_argument("matrix_power_chain: matrix must be square");
  if (p < 1) throw std::invalid_argument("matrix_power_chain: p must be >= 1");
  std::vector<Tensor> powers;
  powers.reserve(p);
  powers.push_back(a);
  for (int k = 1; k < p; ++k) powers.push_back(matmul(powers.back(), a));
  return powers;
}

// Reverse-mode sweep from a scalar loss. Gradients accumulate additively into
// every needs_grad node reachable from the loss; leaves keep theirs until
// zero_grad (or the optimizer) clears them.
inline void backward(const Tensor& loss) {
  if (loss.size() != 1) throw std::invalid_argument("backward: loss must be scalar");
  if (!loss.node()->needs_grad) return;

  std::vector<TensorNode*> order;
  std::unordered_set<TensorNode*> visited;
  std::vector<std::pair<TensorNode*, size_t>> stack;
  stack.emplace_back(loss.node().get(), 0);
  visited.insert(loss.node().get());
  while (!stack.empty()) {
    auto& [node, idx] = stack.back();
    if (idx < node->parents.size()) {
      TensorNode* p = node->parents[idx++].get();
      if (p->needs_grad && visited.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  loss.node()->grad_buf()[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    TensorNode* n = *it;
    if (n->backward_fn && !n->grad.empty()) n->backward_fn(*n);
  }
}

inline bool all_finite(const Tensor& t) {
  for (double v : t.value())
    if (!std::isfinite(v)) return false;
  return true;
}

inline Tensor uniform_tensor(int rows, int cols, double lo, double hi, Rng& rng, bool requires_grad = true) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> v(static_cast<size_t>(rows) * cols);
  for (auto& x : v) x = dist(rng);
  return Tensor(rows, cols, std::move(v), requires_grad);
}

// Glorot-style uniform init for a fan_in x fan_out weight matrix.
inline Tensor glorot_tensor(int fan_in, int fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / (fan_in + fan_out));
  return uniform_tensor(fan_in, fan_out, -limit, limit, rng, true);
}

}  // namespace tgnn
