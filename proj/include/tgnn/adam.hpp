#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "tgnn/tensor.hpp"

namespace tgnn {

struct AdamState {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  long step = 0;
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;

  explicit AdamState(double lr = 1e-3, double b1 = 0.9, double b2 = 0.999, double eps = 1e-8)
      : learning_rate(lr), beta1(b1), beta2(b2), epsilon(eps) {
    if (!(beta1 > 0.0 && beta1 < 1.0 && beta2 > 0.0 && beta2 < 1.0))
      throw std::invalid_argument("adam: betas must lie in (0, 1)");
    if (!(epsilon > 0.0)) throw std::invalid_argument("adam: epsilon must be positive");
  }
};

// Bias-corrected Adam update, applied in place. Missing gradients count as
// zero. Gradients are cleared afterwards.
inline void adam_step(std::vector<Tensor>& params, AdamState& state) {
  if (state.first_moment.empty()) {
    for (const auto& p : params) {
      state.first_moment.emplace_back(p.size(), 0.0);
      state.second_moment.emplace_back(p.size(), 0.0);
    }
  }
  if (state.first_moment.size() != params.size())
    throw std::invalid_argument("adam: parameter list changed size");
  ++state.step;
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (size_t pi = 0; pi < params.size(); ++pi) {
    auto& vals = params[pi].value();
    auto& m = state.first_moment[pi];
    auto& v = state.second_moment[pi];
    if (m.size() != vals.size()) throw std::invalid_argument("adam: parameter shape changed");
    const auto& grad = params[pi].grad();
    for (size_t i = 0; i < vals.size(); ++i) {
      const double g = grad.empty() ? 0.0 : grad[i];
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g;
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g * g;
      vals[i] -= state.learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + state.epsilon);
    }
    params[pi].zero_grad();
  }
}

}  // namespace tgnn
