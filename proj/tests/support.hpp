#pragma once

#include <cmath>
#include <vector>

#include "lpinn/lpinn.hpp"

namespace lpinn::testing {

/// Glorot init plus a uniform perturbation so that biases are nonzero too.
inline NetworkParams random_net(std::vector<std::size_t> layers, std::uint64_t seed, double jitter = 0.1) {
  NetworkParams net = init_network(std::move(layers), seed);
  Xoshiro256ss r(seed ^ 0x9e3779b97f4a7c15ULL);
  for (double& v : net.values) v += jitter * r.uniform(-1.0, 1.0);
  return net;
}

inline double rel_err(double got, double want, double floor = 1e-8) {
  return std::abs(got - want) / std::max(std::abs(want), floor);
}

}  // namespace lpinn::testing
