#pragma once

#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "errors.hpp"
#include "grid.hpp"
#include "problems.hpp"

namespace lpinn {

// ---------------------------------------------------------------------------
// Lorenz: adaptive Dormand-Prince 5(4) with dense output
// ---------------------------------------------------------------------------

struct OdeTolerances {
  double rtol = 1e-10;
  double atol = 1e-12;
};

/// Reference trajectory at `eval_times` (ascending, within [0, T]).
inline std::vector<Vec3> solve_lorenz_reference(const LorenzProblem& p, std::span<const double> eval_times,
                                                OdeTolerances tol = {}) {
  namespace ode = boost::numeric::odeint;
  using State = std::array<double, 3>;
  if (eval_times.empty()) return {};
  for (std::size_t i = 0; i < eval_times.size(); ++i) {
    if (eval_times[i] < 0.0 || eval_times[i] > p.T * (1 + 1e-14))
      throw std::invalid_argument("evaluation time outside [0, T]");
    if (i > 0 && eval_times[i] < eval_times[i - 1]) throw std::invalid_argument("evaluation times must ascend");
  }
  auto rhs = [&p](const State& s, State& ds, double) { ds = p.rhs(s); };
  State s = p.u0;
  std::vector<Vec3> out;
  out.reserve(eval_times.size());
  std::vector<double> times(eval_times.begin(), eval_times.end());
  // integrate_times needs the start time first.
  const bool prepend = times.front() > 0.0;
  if (prepend) times.insert(times.begin(), 0.0);
  auto stepper = ode::make_dense_output(tol.atol, tol.rtol, ode::runge_kutta_dopri5<State>());
  try {
    ode::integrate_times(stepper, rhs, s, times.begin(), times.end(), std::min(1e-4, times.back()),
                         [&out](const State& x, double) { out.push_back(x); }, ode::max_step_checker(100000));
  } catch (const std::exception& ex) {
    throw std::runtime_error(std::string("Lorenz reference integration failed: ") + ex.what());
  }
  if (prepend) out.erase(out.begin());
  return out;
}

// ---------------------------------------------------------------------------
// Burgers: split-step finite differences
// ---------------------------------------------------------------------------

/// Tridiagonal system of one Crank-Nicolson substep of u_t = nu u_xx over
/// `substep`, interior rows only: -a, 1 + 2a, -a with a = nu substep / (2 dx^2).
struct CrankNicolsonSystem {
  double a;
  double lower() const { return -a; }
  double diag() const { return 1.0 + 2.0 * a; }
  double upper() const { return -a; }
};

/// Advances the diffusion part by dt/2 with Crank-Nicolson; end values stay 0.
inline std::vector<double> cn_half_step(std::span<const double> v, double dt, double nu, double dx) {
  const std::size_t n = v.size();
  std::vector<double> out(n, 0.0);
  if (n < 3) return out;
  const CrankNicolsonSystem sys{nu * (0.5 * dt) / (2.0 * dx * dx)};
  const std::size_t m = n - 2;  // interior unknowns
  std::vector<double> rhs(m), c(m);
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t j = k + 1;
    rhs[k] = sys.a * v[j - 1] + (1.0 - 2.0 * sys.a) * v[j] + sys.a * v[j + 1];
  }
  // Thomas algorithm; the matrix is strictly diagonally dominant.
  double denom = sys.diag();
  c[0] = sys.upper() / denom;
  rhs[0] /= denom;
  for (std::size_t k = 1; k < m; ++k) {
    denom = sys.diag() - sys.lower() * c[k - 1];
    if (denom == 0.0) throw std::logic_error("singular Crank-Nicolson system");
    c[k] = sys.upper() / denom;
    rhs[k] = (rhs[k] - sys.lower() * rhs[k - 1]) / denom;
  }
  for (std::size_t k = m - 1; k-- > 0;) rhs[k] -= c[k] * rhs[k + 1];
  std::copy(rhs.begin(), rhs.end(), out.begin() + 1);
  return out;
}

/// One Lax-Friedrichs step of u_t + (u^2/2)_x = 0; end values set to 0.
inline std::vector<double> lax_friedrichs_step(std::span<const double> v, double dt, double dx) {
  const std::size_t n = v.size();
  double vmax = 0.0;
  for (double x : v) vmax = std::max(vmax, std::abs(x));
  if (!(vmax * dt / dx < 1.0))
    throw std::runtime_error("Lax-Friedrichs stability violated: max|u| dt/dx = " + std::to_string(vmax * dt / dx));
  std::vector<double> out(n, 0.0);
  const double c = dt / (2.0 * dx);
  for (std::size_t j = 1; j + 1 < n; ++j)
    out[j] = 0.5 * (v[j + 1] + v[j - 1]) - c * (0.5 * v[j + 1] * v[j + 1] - 0.5 * v[j - 1] * v[j - 1]);
  return out;
}

struct FdConfig {
  std::size_t nx = 401;  // points including both ends
  std::size_t nt = 700;  // time steps
};

/// Space-time field on the finite-difference grid with bilinear lookup.
struct BurgersField {
  UniformGrid t_grid;
  UniformGrid x_grid;
  std::vector<double> values;  // row-major, rows = time levels

  double at(std::size_t it, std::size_t ix) const { return values[it * x_grid.size + ix]; }
  std::span<const double> row(std::size_t it) const { return {values.data() + it * x_grid.size, x_grid.size}; }

  double interpolate(double t, double x) const {
    auto locate = [](const UniformGrid& g, double v, std::size_t& k, double& frac) {
      const double s = (v - g.start) / g.step();
      const double clamped = std::clamp(s, 0.0, static_cast<double>(g.size - 1));
      k = std::min(static_cast<std::size_t>(clamped), g.size - 2);
      frac = clamped - static_cast<double>(k);
    };
    std::size_t it, ix;
    double ft, fx;
    locate(t_grid, t, it, ft);
    locate(x_grid, x, ix, fx);
    const double a = (1 - fx) * at(it, ix) + fx * at(it, ix + 1);
    const double b = (1 - fx) * at(it + 1, ix) + fx * at(it + 1, ix + 1);
    return (1 - ft) * a + ft * b;
  }
};

/// Strang splitting per step: CN over dt/2, Lax-Friedrichs over dt, CN over dt/2.
inline BurgersField solve_burgers_fd(const BurgersProblem& p, FdConfig cfg = {}) {
  if (cfg.nx < 3 || cfg.nt < 1) throw std::invalid_argument("finite-difference grid too small");
  BurgersField f{UniformGrid::on(0.0, p.T, cfg.nt + 1), UniformGrid::on(p.x_lo, p.x_hi, cfg.nx), {}};
  const double dt = f.t_grid.step();
  const double dx = f.x_grid.step();
  f.values.resize((cfg.nt + 1) * cfg.nx);
  std::vector<double> v(cfg.nx);
  for (std::size_t j = 0; j < cfg.nx; ++j) v[j] = BurgersProblem::initial(f.x_grid[j]);
  v.front() = v.back() = 0.0;
  std::copy(v.begin(), v.end(), f.values.begin());
  for (std::size_t n = 1; n <= cfg.nt; ++n) {
    v = cn_half_step(v, dt, p.nu, dx);
    v = lax_friedrichs_step(v, dt, dx);
    v = cn_half_step(v, dt, p.nu, dx);
    std::copy(v.begin(), v.end(), f.values.begin() + static_cast<std::ptrdiff_t>(n * cfg.nx));
  }
  return f;
}

// ---------------------------------------------------------------------------
// Burgers: Cole-Hopf formula with Gauss-Hermite quadrature
// ---------------------------------------------------------------------------

/// Nodes and weights for int e^{-x^2} f(x) dx, ascending nodes.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Hermite rule of the given order, by Newton iteration on the
/// orthonormal Hermite recurrence.
inline QuadratureRule gauss_hermite(std::size_t order) {
  if (order == 0) throw std::invalid_argument("quadrature order must be positive");
  const std::size_t n = order;
  const double pim4 = std::pow(std::numbers::pi, -0.25);
  QuadratureRule r{std::vector<double>(n), std::vector<double>(n)};
  const std::size_t m = (n + 1) / 2;
  double z = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double nd = static_cast<double>(n);
    if (i == 0)
      z = std::sqrt(2.0 * nd + 1.0) - 1.85575 * std::pow(2.0 * nd + 1.0, -0.16667);
    else if (i == 1)
      z -= 1.14 * std::pow(nd, 0.426) / z;
    else if (i == 2)
      z = 1.86 * z - 0.86 * r.nodes[n - 1];
    else if (i == 3)
      z = 1.91 * z - 0.91 * r.nodes[n - 2];
    else
      z = 2.0 * z - r.nodes[n - i + 1];
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = pim4, p2 = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        const double jd = static_cast<double>(j);
        p1 = z * std::sqrt(2.0 / (jd + 1.0)) * p2 - std::sqrt(jd / (jd + 1.0)) * p3;
      }
      pp = std::sqrt(2.0 * nd) * p2;
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= 1e-15 * std::max(1.0, std::abs(z))) break;
    }
    // Stored descending for the initial guesses above, flipped below.
    r.nodes[n - 1 - i] = z;
    r.nodes[i] = -z;
    r.weights[i] = r.weights[n - 1 - i] = 2.0 / (pp * pp);
  }
  // Newton guesses above index nodes from the top; restore ascending order.
  std::vector<std::pair<double, double>> nw(n);
  for (std::size_t i = 0; i < n; ++i) nw[i] = {r.nodes[i], r.weights[i]};
  std::sort(nw.begin(), nw.end());
  for (std::size_t i = 0; i < n; ++i) std::tie(r.nodes[i], r.weights[i]) = nw[i];
  return r;
}

/// Below this time the solution is taken from its first-order Taylor expansion.
inline constexpr double kTaylorTime = 1e-10;

/// Cole-Hopf solution for u0(x) = -sin(pi x) on the whole line (which is
/// 2-periodic and odd, hence zero at x = +-1).
inline double burgers_analytic(double t, double x, double nu, const QuadratureRule& rule) {
  constexpr double pi = std::numbers::pi;
  if (t < kTaylorTime) {
    const double u0 = -std::sin(pi * x);
    const double du0 = -pi * std::cos(pi * x);
    const double ddu0 = pi * pi * std::sin(pi * x);
    return u0 + t * (nu * ddu0 - u0 * du0);
  }
  const double scale = std::sqrt(4.0 * nu * t);
  const std::size_t n = rule.nodes.size();
  std::vector<double> logz(n);
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < n; ++k) {
    const double y = x - scale * rule.nodes[k];
    logz[k] = -std::cos(pi * y) / (2.0 * pi * nu);
    top = std::max(top, logz[k]);
  }
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double y = x - scale * rule.nodes[k];
    const double zeta = rule.weights[k] * std::exp(logz[k] - top);
    num += -std::sin(pi * y) * zeta;
    den += zeta;
  }
  const double u = num / den;
  if (!std::isfinite(u)) throw std::runtime_error("non-finite Cole-Hopf quadrature");
  return u;
}

/// Max |FD - analytic| over an n_t x n_x probe of [0, T] x [lo, hi].
inline double fd_analytic_discrepancy(const BurgersProblem& p, const BurgersField& fd, const QuadratureRule& rule,
                                      std::size_t n_t = 100, std::size_t n_x = 100) {
  const auto tg = UniformGrid::on(0.0, p.T, n_t);
  const auto xg = UniformGrid::on(p.x_lo, p.x_hi, n_x);
  double worst = 0.0;
  for (std::size_t i = 0; i < n_t; ++i)
    for (std::size_t j = 0; j < n_x; ++j)
      worst = std::max(worst, std::abs(fd.interpolate(tg[i], xg[j]) - burgers_analytic(tg[i], xg[j], p.nu, rule)));
  return worst;
}

}  // namespace lpinn
