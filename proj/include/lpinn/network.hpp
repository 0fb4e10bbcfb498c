#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "jet.hpp"
#include "rng.hpp"

namespace lpinn {

/// Fully connected tanh network: tanh on every hidden layer, identity on the
/// output layer. Parameters are stored layer by layer, each layer as its
/// weight matrix in row-major order (rows = outputs) followed by its bias.
struct NetworkParams {
  std::vector<std::size_t> layer_sizes;
  std::vector<double> values;
  std::uint64_t seed = 0;

  std::size_t input_dim() const { return layer_sizes.front(); }
  std::size_t output_dim() const { return layer_sizes.back(); }
  std::size_t num_layers() const { return layer_sizes.size() - 1; }

  /// Offset of layer l's weight block in `values`.
  std::size_t weight_offset(std::size_t l) const {
    std::size_t off = 0;
    for (std::size_t k = 0; k < l; ++k) off += layer_sizes[k + 1] * (layer_sizes[k] + 1);
    return off;
  }
  std::size_t bias_offset(std::size_t l) const {
    return weight_offset(l) + layer_sizes[l + 1] * layer_sizes[l];
  }

  bool operator==(const NetworkParams&) const = default;
};

inline std::size_t parameter_count(std::span<const std::size_t> layer_sizes) {
  std::size_t n = 0;
  for (std::size_t k = 0; k + 1 < layer_sizes.size(); ++k)
    n += layer_sizes[k] * layer_sizes[k + 1] + layer_sizes[k + 1];
  return n;
}

inline void validate_layers(std::span<const std::size_t> layer_sizes) {
  if (layer_sizes.size() < 2) throw std::invalid_argument("network needs at least an input and an output layer");
  for (std::size_t k = 0; k < layer_sizes.size(); ++k)
    if (layer_sizes[k] == 0)
      throw std::invalid_argument("layer " + std::to_string(k) + " has zero width");
}

/// Input width, `depth` hidden layers of `width`, output width.
inline std::vector<std::size_t> mlp_layers(std::size_t input, std::size_t width, std::size_t depth,
                                           std::size_t output) {
  std::vector<std::size_t> sizes{input};
  sizes.insert(sizes.end(), depth, width);
  sizes.push_back(output);
  return sizes;
}

inline double glorot_limit(std::size_t fan_in, std::size_t fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

/// Glorot-uniform weights and zero biases. Draws come from xoshiro256**
/// seeded with `seed`, consumed layer by layer in row-major weight order.
inline NetworkParams init_network(std::vector<std::size_t> layer_sizes, std::uint64_t seed) {
  validate_layers(layer_sizes);
  NetworkParams net;
  net.layer_sizes = std::move(layer_sizes);
  net.seed = seed;
  net.values.assign(parameter_count(net.layer_sizes), 0.0);
  Xoshiro256ss rng(seed);
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    const std::size_t fan_in = net.layer_sizes[l];
    const std::size_t fan_out = net.layer_sizes[l + 1];
    const double limit = glorot_limit(fan_in, fan_out);
    const std::size_t off = net.weight_offset(l);
    for (std::size_t i = 0; i < fan_in * fan_out; ++i) net.values[off + i] = rng.uniform(-limit, limit);
  }
  return net;
}

/// Network output and its input derivatives at one point, evaluated by Jet2
/// propagation. `x` must be given exactly when the network has two inputs.
inline std::vector<Jet2> jet_eval(const NetworkParams& net, double t, std::optional<double> x = std::nullopt) {
  const std::size_t arity = x ? 2 : 1;
  if (net.input_dim() != arity)
    throw std::invalid_argument("network expects " + std::to_string(net.input_dim()) + " inputs, got " +
                                std::to_string(arity));
  std::vector<Jet2> a{Jet2::time_variable(t)};
  if (x) a.push_back(Jet2::space_variable(*x));
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    const std::size_t n_in = net.layer_sizes[l];
    const std::size_t n_out = net.layer_sizes[l + 1];
    const double* w = net.values.data() + net.weight_offset(l);
    const double* b = net.values.data() + net.bias_offset(l);
    const bool hidden = l + 1 < net.num_layers();
    std::vector<Jet2> z(n_out);
    for (std::size_t r = 0; r < n_out; ++r) {
      Jet2 acc = Jet2::constant(b[r]);
      for (std::size_t c = 0; c < n_in; ++c) acc += w[r * n_in + c] * a[c];
      z[r] = hidden ? tanh(acc) : acc;
    }
    a = std::move(z);
  }
  return a;
}

enum class ShiftKind {
  additive,       // U(t,x) - U(0,x) + u0(x)
  time_scaled,    // U(t,x) - U(0,x) + u0(x) * t
};

/// Initial condition as a function of a space jet; for time-only problems the
/// argument is a constant zero jet and only the output component index matters.
using InitialCondition = std::function<Jet2(std::size_t component, const Jet2& x)>;

/// Network with its output shifted so that the initial condition holds by
/// construction.
struct ShiftedAnsatz {
  NetworkParams base;
  InitialCondition u0;
  ShiftKind shift = ShiftKind::additive;
};

inline std::vector<Jet2> shifted_eval(const ShiftedAnsatz& ansatz, double t, std::optional<double> x = std::nullopt) {
  std::vector<Jet2> u = jet_eval(ansatz.base, t, x);
  std::vector<Jet2> u_at0 = jet_eval(ansatz.base, 0.0, x);
  const Jet2 xj = x ? Jet2::space_variable(*x) : Jet2::constant(0.0);
  for (std::size_t k = 0; k < u.size(); ++k) {
    // The t = 0 anchor carries no time dependence.
    Jet2 anchor = u_at0[k];
    anchor.d_t = 0.0;
    u[k] -= anchor;
    Jet2 ic = ansatz.u0(k, xj);
    if (ansatz.shift == ShiftKind::time_scaled) ic = ic * Jet2::time_variable(t);
    u[k] += ic;
  }
  return u;
}

/// Text snapshot: a header line `lpinn-params v1`, then `layers` and `seed`
/// lines, then one parameter per line with 17 significant digits.
inline void write_params(std::ostream& os, const NetworkParams& net) {
  os << "lpinn-params v1\nlayers";
  for (auto s : net.layer_sizes) os << ' ' << s;
  os << "\nseed " << net.seed << '\n';
  os.precision(17);
  for (double v : net.values) os << v << '\n';
}

inline NetworkParams read_params(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "lpinn-params v1") throw std::runtime_error("not an lpinn parameter file");
  NetworkParams net;
  std::string key;
  if (!std::getline(is, line)) throw std::runtime_error("missing layers line");
  {
    std::istringstream ls(line);
    ls >> key;
    if (key != "layers") throw std::runtime_error("expected layers line");
    std::size_t s;
    while (ls >> s) net.layer_sizes.push_back(s);
  }
  if (!(is >> key >> net.seed) || key != "seed") throw std::runtime_error("expected seed line");
  validate_layers(net.layer_sizes);
  net.values.resize(parameter_count(net.layer_sizes));
  for (auto& v : net.values)
    if (!(is >> v)) throw std::runtime_error("parameter file truncated");
  return net;
}

}  // namespace lpinn
