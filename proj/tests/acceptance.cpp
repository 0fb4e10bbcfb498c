// Acceptance checks, one PASS/FAIL line per criterion.
// Usage: lpinn_acceptance [criterion ...]   (no arguments runs all ten)

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "lpinn/lpinn.hpp"

using namespace lpinn;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }

double reference_norm(const LorenzProblem& p) {
  const auto ref = solve_lorenz_reference(p, std::vector<double>{p.T})[0];
  return std::sqrt(ref[0] * ref[0] + ref[1] * ref[1] + ref[2] * ref[2]);
}

// 1. Finite-difference reference against the Cole-Hopf quadrature solution.
Outcome reference_cross_validation() {
  const BurgersProblem p;
  const auto fd = solve_burgers_fd(p, {401, 700});
  const double d = fd_analytic_discrepancy(p, fd, gauss_hermite(50), 100, 100);
  return {d <= 1e-4, "max |FD - analytic| = " + num(d) + " (limit 1e-4)"};
}

// 2. Rayleigh-quotient estimator on G(u) = A u + xi + alpha u.
Outcome estimator_exactness() {
  Xoshiro256ss r(2024);
  const auto grid = UniformGrid::on(0.0, 1.0, 41);
  double worst = 0.0;
  std::size_t cases = 0;
  for (std::size_t d = 2; d <= 5; ++d) {
    for (double alpha : {-3.0, 0.0, 2.0}) {
      for (int rep = 0; rep < 3; ++rep) {
        LinearTestOperator op;
        op.antisym.assign(d * d, 0.0);
        for (std::size_t i = 0; i < d; ++i)
          for (std::size_t j = i + 1; j < d; ++j) {
            const double a = r.uniform(-5, 5);
            op.antisym[i * d + j] = a;
            op.antisym[j * d + i] = -a;
          }
        op.drift.resize(d);
        for (double& x : op.drift) x = r.uniform(-5, 5);
        op.alpha = alpha;
        std::vector<double> ic(d);
        for (double& x : ic) x = r.uniform(-2, 2);
        NetworkParams net = init_network({1, 12, 12, d}, r.next());
        for (double& v : net.values) v += r.uniform(-0.5, 0.5);
        const ShiftedAnsatz a{net, [ic](std::size_t k, const Jet2&) { return Jet2::constant(ic[k]); }};
        for (double l : estimate_lambda(op, a, grid).lambda_est)
          worst = std::max(worst, std::abs(l - alpha) / std::max(1.0, std::abs(alpha)));
        ++cases;
      }
    }
  }
  return {worst < 1e-12, std::to_string(cases) + " operators, worst relative error " + num(worst) + " (limit 1e-12)"};
}

// 3. Brute force over the probability simplex p_i = q_i rho_i at step 1e-3.
Outcome optimal_weights() {
  struct Case {
    std::size_t n;
    std::vector<double> lambda;
  };
  const std::vector<Case> cases{{2, {1.0, 1.0}},          {3, {1.0, 1.0, 1.0}},     {3, {-2.0, -2.0, -2.0}},
                                {3, {4.0, -4.0, -4.0}},   {4, {2.5, 2.5, 2.5, 2.5}}, {4, {3.0, 3.0, -2.0, -2.0}},
                                {4, {-1.0, 5.0, 5.0, 0.0}}};
  const int steps = 1000;
  double worst_arg = 0.0, worst_val = 0.0;
  for (const auto& c : cases) {
    const auto grid = UniformGrid::on(0.0, 1.0, c.n);
    const auto trace = make_trace(grid, c.lambda);
    const auto q = trapezoid_weights(grid);
    const auto Lam = integrating_factor(trace);
    std::vector<double> coef(c.n);
    double s = 0.0;
    for (std::size_t i = 0; i < c.n; ++i) {
      coef[i] = q[i] * q[i] * Lam[i] * Lam[i];
      s += q[i] * Lam[i];
    }
    double best = 1e300;
    std::vector<int> arg(c.n), idx(c.n);
    // Enumerate compositions of `steps` into n positive parts.
    std::function<void(std::size_t, int)> walk = [&](std::size_t k, int left) {
      if (k + 1 == c.n) {
        idx[k] = left;
        double v = 0.0;
        for (std::size_t i = 0; i < c.n; ++i) v += coef[i] * steps / idx[i];
        if (v < best) best = v, arg = idx;
        return;
      }
      for (int m = 1; m <= left - static_cast<int>(c.n - k - 1); ++m) {
        idx[k] = m;
        walk(k + 1, left - m);
      }
    };
    walk(0, steps);
    for (std::size_t i = 0; i < c.n; ++i)
      worst_arg = std::max(worst_arg, std::abs(arg[i] / double(steps) - q[i] * Lam[i] / s) * steps);
    const auto opt = lyapunov_weights(trace, Normalization::integral_one);
    worst_val = std::max(worst_val, std::abs(worst_case_error(opt, trace) - s * s) / (s * s));
    if (best < s * s * (1 - 1e-12)) return {false, "simplex search beat the optimum"};
  }
  const bool pass = worst_arg <= 1.0 && worst_val <= 1e-9;
  return {pass, std::to_string(cases.size()) + " profiles, argmin off by " + num(worst_arg) +
                    " grid steps (limit 1), optimum value relative error " + num(worst_val) + " (limit 1e-9)"};
}

// 4. Final error of e' = lambda e + w against the integrating-factor bound;
// the oracle integrates the error equation with classical RK4.
Outcome propagated_bound() {
  Xoshiro256ss r(77);
  const double T = 1.0;
  const std::size_t n = 200001;
  const auto grid = UniformGrid::on(0.0, T, n);
  double worst_excess = -1e300, worst_gap = 0.0;
  for (double lambda : {-2.0, 0.0, 2.0}) {
    const auto trace = make_trace(grid, std::vector<double>(n, lambda));
    for (int rep = 0; rep < 20; ++rep) {
      for (bool single_sign : {false, true}) {
        double amp[3][3], freq[3][3], phase[3][3], dir[3];
        for (int k = 0; k < 3; ++k) {
          dir[k] = r.uniform(-1, 1);
          for (int m = 0; m < 3; ++m) {
            amp[k][m] = r.uniform(-1, 1);
            freq[k][m] = r.uniform(0.5, 8);
            phase[k][m] = r.uniform(0, 2 * std::numbers::pi);
          }
        }
        auto w = [&](double t) {
          std::array<double, 3> v{};
          if (single_sign) {
            double s = 0.2;
            for (int m = 0; m < 3; ++m) s += std::pow(amp[0][m] * std::sin(freq[0][m] * t + phase[0][m]), 2);
            for (int k = 0; k < 3; ++k) v[k] = s * dir[k];
          } else {
            for (int k = 0; k < 3; ++k)
              for (int m = 0; m < 3; ++m) v[k] += amp[k][m] * std::sin(freq[k][m] * t + phase[k][m]);
          }
          return v;
        };
        std::array<double, 3> e{};
        const double h = grid.step();
        for (std::size_t i = 0; i + 1 < n; ++i) {
          const double t = grid[i];
          auto f = [&](double tt, const std::array<double, 3>& y) {
            const auto wv = w(tt);
            return std::array<double, 3>{lambda * y[0] + wv[0], lambda * y[1] + wv[1], lambda * y[2] + wv[2]};
          };
          auto add = [](const std::array<double, 3>& a, const std::array<double, 3>& b, double c) {
            return std::array<double, 3>{a[0] + c * b[0], a[1] + c * b[1], a[2] + c * b[2]};
          };
          const auto k1 = f(t, e), k2 = f(t + h / 2, add(e, k1, h / 2)), k3 = f(t + h / 2, add(e, k2, h / 2)),
                     k4 = f(t + h, add(e, k3, h));
          for (int k = 0; k < 3; ++k) e[k] += h / 6 * (k1[k] + 2 * k2[k] + 2 * k3[k] + k4[k]);
        }
        std::vector<double> norms(n);
        for (std::size_t i = 0; i < n; ++i) {
          const auto v = w(grid[i]);
          norms[i] = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
        }
        const double bound = propagated_error_bound(trace, norms);
        const double err = std::sqrt(e[0] * e[0] + e[1] * e[1] + e[2] * e[2]);
        worst_excess = std::max(worst_excess, err - bound);
        if (single_sign) worst_gap = std::max(worst_gap, std::abs(err - bound));
      }
    }
  }
  const bool pass = worst_excess <= 1e-8 && worst_gap <= 1e-6;
  return {pass, "120 profiles, max(|e(T)| - bound) = " + num(worst_excess) +
                    " (limit 1e-8), single-sign max gap " + num(worst_gap) + " (limit 1e-6)"};
}

// 5. Loss gradients against central differences: a component passes when
// |g - fd| <= 1e-5 |fd| + 1e-8.
struct GradientCheck {
  double tolerance_ratio = 0.0;  // max |g - fd| / (1e-5 |fd| + 1e-8), pass <= 1
  double relative = 0.0;         // max |g - fd| / |fd| over |fd| >= 1e-3
};

template <class Problem>
GradientCheck gradient_error(const Problem& p, std::vector<std::size_t> layers, std::uint64_t seed) {
  const auto ctx = make_context(p, ShiftKind::additive);
  NetworkParams net = init_network(std::move(layers), seed);
  Xoshiro256ss r(seed + 1000);
  for (double& v : net.values) v += r.uniform(-0.1, 0.1);
  std::vector<double> rho(p.time_grid().size);
  for (double& v : rho) v = r.uniform(0.5, 2.0);
  const auto lg = assemble_loss_gradient(ctx, net, rho);
  GradientCheck out;
  const double h = 1e-4;  // fourth-order central stencil
  for (std::size_t i = 0; i < net.values.size(); ++i) {
    auto at = [&](double d) {
      NetworkParams q = net;
      q.values[i] += d;
      return assemble_loss(ctx, q, rho);
    };
    const double fd = (8 * (at(h) - at(-h)) - (at(2 * h) - at(-2 * h))) / (12 * h);
    const double diff = std::abs(lg.gradient[i] - fd);
    out.tolerance_ratio = std::max(out.tolerance_ratio, diff / (1e-5 * std::abs(fd) + 1e-8));
    if (std::abs(fd) >= 1e-3) out.relative = std::max(out.relative, diff / std::abs(fd));
  }
  return out;
}

Outcome gradient_correctness() {
  LorenzProblem lp;
  lp.n_t = 32;
  BurgersProblem bp;
  bp.n_t = 8;
  bp.n_x = 6;
  const std::vector<std::size_t> ll{1, 8, 8, 3}, bl{2, 8, 8, 1};
  GradientCheck wl, wb;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto l = gradient_error(lp, ll, seed), b = gradient_error(bp, bl, seed);
    wl = {std::max(wl.tolerance_ratio, l.tolerance_ratio), std::max(wl.relative, l.relative)};
    wb = {std::max(wb.tolerance_ratio, b.tolerance_ratio), std::max(wb.relative, b.relative)};
  }
  return {wl.tolerance_ratio <= 1.0 && wb.tolerance_ratio <= 1.0,
          "Lorenz (" + std::to_string(parameter_count(ll)) + " params) worst relative " + num(wl.relative) +
              ", Burgers (" + std::to_string(parameter_count(bl)) + " params) worst relative " + num(wb.relative) +
              ", worst error / (1e-5 |fd| + 1e-8) = " + num(std::max(wl.tolerance_ratio, wb.tolerance_ratio)) +
              " (limit 1, 5 seeds)"};
}

// 6. Lorenz with Lyapunov weights over ten seeds.
Outcome lorenz_headline() {
  const LorenzProblem p;
  TrainConfig c;
  c.scheme.kind = SchemeKind::lyapunov;
  c.iters = 2000;
  c.snapshot_every = 100;
  const auto s = seed_sweep(p, c, 10);
  std::vector<double> drops, errs;
  double slowest = 0.0;
  for (const auto& r : s.runs) {
    drops.push_back(std::log10(r.loss.front() / r.loss.back()));
    errs.push_back(r.snapshots.back().final_error);
    slowest = std::max(slowest, r.wall_seconds);
  }
  const double norm = reference_norm(p);
  const double drop = median(drops), rel = median(errs) / norm;
  // Median loss over consecutive 200-iteration windows, for the record.
  std::size_t rises = 0;
  double prev = 1e300;
  for (std::size_t w = 0; w + 200 <= s.loss.median.size(); w += 200) {
    std::vector<double> win(s.loss.median.begin() + w, s.loss.median.begin() + w + 200);
    const double m = median(win);
    if (m > prev) ++rises;
    prev = m;
  }
  return {drop >= 3.0 && rel < 0.1, "median loss drop " + num(drop) + " decades (need >= 3), median final error " +
                                        num(rel * 100) + "% of |u(T)| (need < 10%), windowed median rises " +
                                        std::to_string(rises) + ", slowest run " + num(slowest) + " s"};
}

// 7. Uniform weights on Lorenz for 30000 iterations.
Outcome uniform_failure() {
  const LorenzProblem p;
  TrainConfig c;
  c.scheme.kind = SchemeKind::uniform;
  c.iters = 30000;
  c.snapshot_every = 1000;
  const auto s = seed_sweep(p, c, 10);
  const double norm = reference_norm(p);
  int failing = 0;
  std::vector<double> rel;
  for (const auto& r : s.runs) {
    rel.push_back(r.snapshots.back().final_error / norm);
    if (rel.back() > 0.5) ++failing;
  }
  return {failing >= 8, std::to_string(failing) + "/10 seeds above 50% of |u(T)| (need >= 8), median " +
                            num(median(rel) * 100) + "%"};
}

// 8. Lyapunov with the rate forced to zero against uniform weights.
Outcome consistency_degeneration() {
  TrainConfig lyap;
  lyap.scheme.kind = SchemeKind::lyapunov;
  lyap.scheme.force_zero_lambda = true;
  lyap.seed = 3;
  TrainConfig uni = lyap;
  uni.scheme.kind = SchemeKind::uniform;
  uni.scheme.force_zero_lambda = false;
  const auto a = train(LorenzProblem{}, lyap), b = train(LorenzProblem{}, uni);
  BurgersProblem bp;
  lyap.iters = uni.iters = 200;
  const auto c = train(bp, lyap), d = train(bp, uni);
  const bool same = a.loss == b.loss && a.final_params == b.final_params && c.loss == d.loss &&
                    c.final_params == d.final_params;
  return {same, same ? "Lorenz 2000 and Burgers 200 iterations bitwise identical" : "trajectories differ"};
}

// 9. Parameter counts of the two networks.
Outcome parameter_counts() {
  const auto l = init_network(LorenzProblem::default_layers(), 0).values.size();
  const auto b = init_network(BurgersProblem::default_layers(), 0).values.size();
  return {l == 1783 && b == 3021, "Lorenz " + std::to_string(l) + " (1783), Burgers " + std::to_string(b) + " (3021)"};
}

// 10. Burgers Lyapunov weights after training.
Outcome burgers_weight_shape() {
  const BurgersProblem p;
  TrainConfig c;
  c.scheme.kind = SchemeKind::lyapunov;
  c.iters = 3000;
  c.snapshot_every = 500;
  const auto r = train(p, c);
  const auto& rho = r.snapshots.back().rho;
  const std::size_t n = rho.size(), w = std::max<std::size_t>(1, n / 10);
  auto mean = [&](std::size_t from) {
    double s = 0.0;
    for (std::size_t i = from; i < from + w; ++i) s += rho[i];
    return s / static_cast<double>(w);
  };
  const double late = mean(n - w), middle = mean(n / 2 - w / 2);
  return {late > middle, "mean weight last 10% " + num(late) + " vs middle 10% " + num(middle)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, Outcome (*)()>> criteria{
      {"reference cross-validation", reference_cross_validation},
      {"estimator exactness", estimator_exactness},
      {"optimal weights (simplex search)", optimal_weights},
      {"propagated error bound", propagated_bound},
      {"gradient correctness", gradient_correctness},
      {"Lorenz with Lyapunov weights", lorenz_headline},
      {"uniform weights fail on Lorenz", uniform_failure},
      {"zero-rate Lyapunov equals uniform", consistency_degeneration},
      {"parameter counts", parameter_counts},
      {"Burgers weight shape", burgers_weight_shape},
  };
  std::vector<std::size_t> selected;
  for (int i = 1; i < argc; ++i) {
    const int k = std::atoi(argv[i]);
    if (k < 1 || k > static_cast<int>(criteria.size())) {
      std::fprintf(stderr, "unknown criterion '%s'\n", argv[i]);
      return 2;
    }
    selected.push_back(static_cast<std::size_t>(k));
  }
  if (selected.empty())
    for (std::size_t k = 1; k <= criteria.size(); ++k) selected.push_back(k);

  int failed = 0;
  for (std::size_t k : selected) {
    const auto& [name, run] = criteria[k - 1];
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("criterion %zu: %s  %s: %s\n", k, o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
