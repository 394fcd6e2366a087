#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "tgnn/tensor.hpp"

namespace tgnn {

// Central-difference gradient check. `f` must rebuild the forward graph from
// the current parameter values and return the scalar loss; it must be
// deterministic. Returns the maximum relative error over all entries of all
// parameters, with denominator max(|analytic|, |numeric|, 1e-8).
inline double finite_diff_check(const std::function<Tensor()>& f, std::vector<Tensor> params,
                                double step = 1e-5) {
  for (auto& p : params) p.zero_grad();
  backward(f());
  std::vector<std::vector<double>> analytic;
  analytic.reserve(params.size());
  for (const auto& p : params) {
    if (p.grad().empty())
      analytic.emplace_back(p.size(), 0.0);
    else
      analytic.push_back(p.grad());
  }

  double max_rel = 0.0;
  for (size_t pi = 0; pi < params.size(); ++pi) {
    auto& vals = params[pi].value();
    for (size_t i = 0; i < vals.size(); ++i) {
      const double saved = vals[i];
      vals[i] = saved + step;
      const double fp = f().item();
      vals[i] = saved - step;
      const double fm = f().item();
      vals[i] = saved;
      const double numeric = (fp - fm) / (2.0 * step);
      const double a = analytic[pi][i];
      const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
      max_rel = std::max(max_rel, rel);
    }
  }
  for (auto& p : params) p.zero_grad();
  return max_rel;
}

inline double finite_diff_check(const std::function<Tensor()>& f, Tensor param, double step = 1e-5) {
  return finite_diff_check(f, std::vector<Tensor>{param}, step);
}

}  // namespace tgnn
