#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace lpinn {

struct AdamConfig {
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-7;
};

/// Adam with bias correction folded into the step size, the form used by the
/// Keras optimizer: theta -= lr_t m / (sqrt(v) + eps), lr_t = lr sqrt(1-b2^t)/(1-b1^t).
struct AdamState {
  AdamConfig config;
  std::vector<double> m;
  std::vector<double> v;
  std::size_t step = 0;

  AdamState() = default;
  AdamState(AdamConfig cfg, std::size_t n) : config(cfg), m(n, 0.0), v(n, 0.0) {}
};

inline void adam_step(AdamState& state, std::span<double> params, std::span<const double> grad) {
  if (params.size() != state.m.size() || grad.size() != state.m.size())
    throw std::invalid_argument("Adam state, parameters and gradient differ in length");
  const AdamConfig& c = state.config;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double lr_t = c.lr * std::sqrt(1.0 - std::pow(c.beta2, t)) / (1.0 - std::pow(c.beta1, t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] += (grad[i] - state.m[i]) * (1.0 - c.beta1);
    state.v[i] += (grad[i] * grad[i] - state.v[i]) * (1.0 - c.beta2);
    params[i] -= lr_t * state.m[i] / (std::sqrt(state.v[i]) + c.eps);
  }
}

}  // namespace lpinn
