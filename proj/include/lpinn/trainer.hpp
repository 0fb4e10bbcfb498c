#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cmath>
#include <exception>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "adam.hpp"
#include "errors.hpp"
#include "network.hpp"
#include "problems.hpp"
#include "reference.hpp"
#include "tape.hpp"
#include "weighting.hpp"

namespace lpinn {

enum class SchemeKind { uniform, exponential, causal, lyapunov };

inline std::string to_string(SchemeKind k) {
  switch (k) {
    case SchemeKind::uniform: return "uniform";
    case SchemeKind::exponential: return "exponential";
    case SchemeKind::causal: return "causal";
    case SchemeKind::lyapunov: return "lyapunov";
  }
  return "?";
}

inline SchemeKind parse_scheme(const std::string& s) {
  if (s == "uniform") return SchemeKind::uniform;
  if (s == "exponential") return SchemeKind::exponential;
  if (s == "causal") return SchemeKind::causal;
  if (s == "lyapunov") return SchemeKind::lyapunov;
  throw std::invalid_argument("unknown weighting scheme '" + s + "'");
}

struct SchemeConfig {
  SchemeKind kind = SchemeKind::lyapunov;
  double exponential_rate = 10.0;
  std::vector<double> epsilons{0.01, 0.1, 1.0, 10.0, 100.0};
  std::size_t iters_per_epsilon = 2000;
  bool smooth_lambda = false;
  double smoothing_decay = 0.9;
  bool force_zero_lambda = false;  // testing hook: lyapunov with lambda = 0
};

struct TrainConfig {
  SchemeConfig scheme;
  std::size_t iters = 2000;  // ignored by the causal scheme
  AdamConfig adam;
  std::uint64_t seed = 0;
  std::vector<std::size_t> layers;  // empty: the problem's default
  ShiftKind shift = ShiftKind::additive;
  std::size_t snapshot_every = 10;
  double divergence_threshold = 1e12;

  std::size_t total_iterations() const {
    return scheme.kind == SchemeKind::causal ? scheme.iters_per_epsilon * scheme.epsilons.size() : iters;
  }
};

/// Heavy per-iteration data, recorded every `snapshot_every` iterations.
struct Snapshot {
  std::size_t iteration = 0;
  double final_error = 0.0;
  std::vector<double> rho;
  std::vector<double> lambda;
  std::vector<double> cumulative;
  std::vector<double> lambda_ideal;  // Lorenz only
};

struct RunRecord {
  std::vector<double> times;
  std::vector<double> loss;  // loss[k] at the parameters before update k
  std::vector<Snapshot> snapshots;
  NetworkParams final_params;
  std::uint64_t seed = 0;
  double wall_seconds = 0.0;
};

// Problem-specific training context: collocation plus reference data for
// the final-time error.
struct LorenzContext {
  using Problem = LorenzProblem;
  LorenzCollocation colloc;
  Matrix reference;  // 3 x n_t on the time grid
  LorenzContext(const LorenzProblem& p, ShiftKind shift) : colloc(p, shift) {
    const auto times = p.time_grid().points();
    const auto traj = solve_lorenz_reference(p, times);
    reference.resize(3, static_cast<Eigen::Index>(traj.size()));
    for (std::size_t i = 0; i < traj.size(); ++i)
      for (int k = 0; k < 3; ++k) reference(k, static_cast<Eigen::Index>(i)) = traj[i][k];
  }
  double final_error(const CollocationEval& e) const {
    const Eigen::Index last = reference.cols() - 1;
    double s = 0.0;
    for (int k = 0; k < 3; ++k) s += std::pow(e.final_state[k] - reference(k, last), 2);
    return std::sqrt(s);
  }
  std::vector<double> ideal_lambda(const CollocationEval& e) const { return colloc.ideal_lambda(e, reference); }
};

struct BurgersContext {
  using Problem = BurgersProblem;
  BurgersProblem problem;
  BurgersCollocation colloc;
  std::vector<double> reference;  // analytic u(T, x_j)
  BurgersContext(const BurgersProblem& p, ShiftKind shift) : problem(p), colloc(p, shift) {
    const auto rule = gauss_hermite(50);
    for (double x : colloc.space_points()) reference.push_back(burgers_analytic(p.T, x, p.nu, rule));
  }
  double final_error(const CollocationEval& e) const {
    std::vector<double> d(reference.size());
    for (std::size_t j = 0; j < d.size(); ++j) d[j] = e.final_state[j] - reference[j];
    return problem.field_norm(d);
  }
  std::vector<double> ideal_lambda(const CollocationEval&) const { return {}; }
};

inline LorenzContext make_context(const LorenzProblem& p, ShiftKind s) { return {p, s}; }
inline BurgersContext make_context(const BurgersProblem& p, ShiftKind s) { return {p, s}; }

/// Time weights for the current iterate. `smoothed` carries the running
/// average of lambda across iterations when smoothing is enabled.
inline WeightProfile scheme_weights(const SchemeConfig& cfg, const UniformGrid& grid, const CollocationEval& e,
                                    std::size_t iteration, std::vector<double>& lambda_used,
                                    std::optional<std::vector<double>>& smoothed) {
  lambda_used = e.lambda;
  if (cfg.force_zero_lambda) std::fill(lambda_used.begin(), lambda_used.end(), 0.0);
  if (cfg.smooth_lambda) {
    if (smoothed)
      for (std::size_t i = 0; i < lambda_used.size(); ++i)
        (*smoothed)[i] = cfg.smoothing_decay * (*smoothed)[i] + (1.0 - cfg.smoothing_decay) * lambda_used[i];
    else
      smoothed = lambda_used;
    lambda_used = *smoothed;
  }
  switch (cfg.kind) {
    case SchemeKind::uniform: return uniform_weights(grid);
    case SchemeKind::exponential: return exponential_weights(grid, cfg.exponential_rate);
    case SchemeKind::causal: {
      const std::size_t level = std::min(iteration / std::max<std::size_t>(cfg.iters_per_epsilon, 1),
                                         cfg.epsilons.size() - 1);
      return causal_weights(grid, e.residual_sq, cfg.epsilons[level]);
    }
    case SchemeKind::lyapunov: return lyapunov_weights(make_trace(grid, lambda_used));
  }
  throw std::logic_error("unhandled scheme");
}

/// Discrete weighted loss at the current parameters.
template <class Context>
double assemble_loss(const Context& ctx, const NetworkParams& net, std::span<const double> rho) {
  GradTape tape(net);
  const auto e = ctx.colloc.evaluate(tape);
  return ctx.colloc.seed_loss(tape, e, rho);
}

/// Weighted loss and its parameter gradient; rho is held constant.
template <class Context>
LossGradient assemble_loss_gradient(const Context& ctx, const NetworkParams& net, std::span<const double> rho) {
  return loss_gradient(net, [&](GradTape& tape) {
    const auto e = ctx.colloc.evaluate(tape);
    return ctx.colloc.seed_loss(tape, e, rho);
  });
}

/// Full-batch Adam training with weights recomputed from the current network
/// at every iteration.
template <class Problem>
RunRecord train(const Problem& problem, const TrainConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  const auto ctx = make_context(problem, cfg.shift);
  const UniformGrid grid = ctx.colloc.time_grid();
  if (cfg.scheme.kind == SchemeKind::causal && cfg.scheme.epsilons.empty())
    throw std::invalid_argument("causal scheme needs at least one epsilon");

  RunRecord rec;
  rec.seed = cfg.seed;
  rec.times = grid.points();
  NetworkParams net = init_network(cfg.layers.empty() ? Problem::default_layers() : cfg.layers, cfg.seed);
  AdamState adam(cfg.adam, net.values.size());
  std::optional<std::vector<double>> smoothed;
  std::vector<double> lambda_used;
  const std::size_t total = cfg.total_iterations();
  const std::size_t every = std::max<std::size_t>(cfg.snapshot_every, 1);

  for (std::size_t k = 0;; ++k) {
    GradTape tape(net);
    const CollocationEval e = ctx.colloc.evaluate(tape);
    const WeightProfile w = scheme_weights(cfg.scheme, grid, e, k, lambda_used, smoothed);
    const double loss = ctx.colloc.seed_loss(tape, e, w.rho);
    if (!std::isfinite(loss) || loss > cfg.divergence_threshold) {
      rec.final_params = net;
      char msg[96];
      std::snprintf(msg, sizeof msg, "loss %.6g outside the admissible range", loss);
      throw DivergenceError(msg, k);
    }
    rec.loss.push_back(loss);
    if (k % every == 0 || k == total) {
      Snapshot s;
      s.iteration = k;
      s.final_error = ctx.final_error(e);
      s.rho = w.rho;
      s.lambda = lambda_used;
      s.cumulative = cumulative_trapezoid(grid, lambda_used);
      s.lambda_ideal = ctx.ideal_lambda(e);
      rec.snapshots.push_back(std::move(s));
    }
    if (k == total) break;
    const auto grad = tape.gradient();
    adam_step(adam, net.values, grad);
  }
  rec.final_params = std::move(net);
  rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

/// Distance between the shifted candidate and the reference at t = T.
inline double final_time_error(const LorenzProblem& p, const ShiftedAnsatz& a) {
  const auto ref = solve_lorenz_reference(p, std::vector<double>{p.T});
  const auto u = shifted_eval(a, p.T);
  double s = 0.0;
  for (int k = 0; k < 3; ++k) s += std::pow(u[k].value - ref[0][k], 2);
  return std::sqrt(s);
}

inline double final_time_error(const BurgersProblem& p, const ShiftedAnsatz& a) {
  const auto rule = gauss_hermite(50);
  std::vector<double> d;
  for (double x : p.space_points()) d.push_back(shifted_eval(a, p.T, x)[0].value - burgers_analytic(p.T, x, p.nu, rule));
  return p.field_norm(d);
}

/// Linear-interpolation quantile of unsorted data, q in [0, 1].
inline double quantile(std::vector<double> v, double q) {
  if (v.empty()) throw std::invalid_argument("quantile of empty data");
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

struct QuantileBands {
  std::vector<double> lower;   // 2.5 %
  std::vector<double> median;
  std::vector<double> upper;   // 97.5 %
};

inline QuantileBands quantile_bands(const std::vector<std::vector<double>>& histories) {
  QuantileBands b;
  if (histories.empty()) return b;
  std::size_t n = histories.front().size();
  for (const auto& h : histories) n = std::min(n, h.size());
  std::vector<double> col(histories.size());
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t r = 0; r < histories.size(); ++r) col[r] = histories[r][k];
    b.lower.push_back(quantile(col, 0.025));
    b.median.push_back(quantile(col, 0.5));
    b.upper.push_back(quantile(col, 0.975));
  }
  return b;
}

struct SweepResult {
  std::vector<RunRecord> runs;
  QuantileBands loss;
  QuantileBands final_error;  // per snapshot
};

/// Independent runs with seeds base, base + 1, ...; each run owns its state,
/// results are stored by seed index.
template <class Problem>
SweepResult seed_sweep(const Problem& problem, TrainConfig cfg, std::size_t n_seeds, unsigned workers = 0) {
  if (n_seeds == 0) throw std::invalid_argument("sweep needs at least one seed");
  SweepResult out;
  out.runs.resize(n_seeds);
  std::vector<std::exception_ptr> errors(n_seeds);
  const std::uint64_t base = cfg.seed;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < n_seeds;) {
      TrainConfig c = cfg;
      c.seed = base + i;
      try {
        out.runs[i] = train(problem, c);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n_seeds));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::vector<std::vector<double>> losses, errs;
  for (const auto& r : out.runs) {
    losses.push_back(r.loss);
    std::vector<double> fe;
    for (const auto& s : r.snapshots) fe.push_back(s.final_error);
    errs.push_back(std::move(fe));
  }
  out.loss = quantile_bands(losses);
  out.final_error = quantile_bands(errs);
  return out;
}

}  // namespace lpinn
