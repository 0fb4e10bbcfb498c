#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "errors.hpp"
#include "grid.hpp"
#include "network.hpp"
#include "tape.hpp"
#include "weighting.hpp"

namespace lpinn {

using Vec3 = std::array<double, 3>;

// ---------------------------------------------------------------------------
// Lorenz system
// ---------------------------------------------------------------------------

struct LorenzProblem {
  double sigma = 10.0;
  double rho = 28.0;
  double beta = 8.0 / 3.0;
  double T = 0.5;
  Vec3 u0{1.0, 1.0, 1.0};
  std::size_t n_t = 256;

  static constexpr std::size_t kDim = 3;

  void validate() const {
    if (!(sigma > 0 && rho > 0 && beta > 0)) throw std::invalid_argument("Lorenz parameters must be positive");
    if (!(T > 0)) throw std::invalid_argument("time horizon must be positive");
    if (n_t < 2) throw std::invalid_argument("time grid needs at least two points");
  }

  UniformGrid time_grid() const { return UniformGrid::on(0.0, T, n_t); }
  static std::vector<std::size_t> default_layers() { return mlp_layers(1, 20, 5, 3); }

  Vec3 rhs(const Vec3& s) const {
    return {sigma * (s[1] - s[0]), s[0] * (rho - s[2]) - s[1], s[0] * s[1] - beta * s[2]};
  }

  /// Row-major Jacobian of rhs.
  std::array<double, 9> jacobian(const Vec3& s) const {
    return {-sigma, sigma, 0.0, rho - s[2], -1.0, -s[0], s[1], s[0], -beta};
  }

  ShiftedAnsatz ansatz(NetworkParams net, ShiftKind shift = ShiftKind::additive) const {
    const Vec3 ic = u0;
    return {std::move(net), [ic](std::size_t k, const Jet2&) { return Jet2::constant(ic[k]); }, shift};
  }

  OperatorSlice slice(const ShiftedAnsatz& a, double t) const {
    const auto jets = shifted_eval(a, t);
    const Vec3 u{jets[0].value, jets[1].value, jets[2].value};
    const Vec3 g = rhs(u);
    const Vec3 g0 = rhs({0.0, 0.0, 0.0});
    return {{u.begin(), u.end()}, {g[0] - g0[0], g[1] - g0[1], g[2] - g0[2]}, {1.0, 1.0, 1.0}};
  }
};

/// w(t) = dU/dt - f(U) for the shifted candidate.
inline Vec3 lorenz_residual(const LorenzProblem& p, const ShiftedAnsatz& a, double t) {
  const auto jets = shifted_eval(a, t);
  const Vec3 f = p.rhs({jets[0].value, jets[1].value, jets[2].value});
  return {jets[0].d_t - f[0], jets[1].d_t - f[1], jets[2].d_t - f[2]};
}

inline double residual_norm(const LorenzProblem& p, const ShiftedAnsatz& a, double t) {
  const Vec3 w = lorenz_residual(p, a, t);
  return std::sqrt(w[0] * w[0] + w[1] * w[1] + w[2] * w[2]);
}

// ---------------------------------------------------------------------------
// Viscous Burgers equation on [-1, 1] with zero boundary values
// ---------------------------------------------------------------------------

struct BurgersProblem {
  double nu = 0.01 / std::numbers::pi;
  double T = 1.0;
  double x_lo = -1.0;
  double x_hi = 1.0;
  std::size_t n_t = 50;
  std::size_t n_x = 25;

  void validate() const {
    if (!(nu > 0)) throw std::invalid_argument("viscosity must be positive");
    if (!(T > 0)) throw std::invalid_argument("time horizon must be positive");
    if (!(x_hi > x_lo)) throw std::invalid_argument("empty space interval");
    if (n_t < 2 || n_x < 1) throw std::invalid_argument("collocation grid too small");
  }

  UniformGrid time_grid() const { return UniformGrid::on(0.0, T, n_t); }
  static std::vector<std::size_t> default_layers() { return mlp_layers(2, 20, 8, 1); }

  /// Interior collocation abscissae: cell centres of n_x equal cells.
  double space_step() const { return (x_hi - x_lo) / static_cast<double>(n_x); }
  std::vector<double> space_points() const {
    std::vector<double> x(n_x);
    for (std::size_t j = 0; j < n_x; ++j) x[j] = x_lo + (static_cast<double>(j) + 0.5) * space_step();
    return x;
  }

  static Jet2 initial(const Jet2& x) { return -sin(std::numbers::pi * x); }
  static double initial(double x) { return -std::sin(std::numbers::pi * x); }

  ShiftedAnsatz ansatz(NetworkParams net, ShiftKind shift = ShiftKind::additive) const {
    return {std::move(net), [](std::size_t, const Jet2& x) { return initial(x); }, shift};
  }

  /// Discrete L2 norm over the interior abscissae (midpoint weights).
  double field_norm(std::span<const double> f) const {
    double s = 0.0;
    for (double v : f) s += v * v;
    return std::sqrt(space_step() * s);
  }

  OperatorSlice slice(const ShiftedAnsatz& a, double t) const {
    const auto xs = space_points();
    OperatorSlice s;
    for (double x : xs) {
      const Jet2 u = shifted_eval(a, t, x)[0];
      s.u.push_back(u.value);
      s.g_diff.push_back(-u.value * u.d_x + nu * u.d_xx);
    }
    s.quad.assign(xs.size(), space_step());
    return s;
  }
};

/// w = u_t + u u_x - nu u_xx for the shifted candidate.
inline double burgers_residual(const BurgersProblem& p, const ShiftedAnsatz& a, double t, double x) {
  const Jet2 u = shifted_eval(a, t, x)[0];
  return u.d_t + u.value * u.d_x - p.nu * u.d_xx;
}

inline double residual_norm(const BurgersProblem& p, const ShiftedAnsatz& a, double t) {
  std::vector<double> w;
  for (double x : p.space_points()) w.push_back(burgers_residual(p, a, t, x));
  return p.field_norm(w);
}

// ---------------------------------------------------------------------------
// Batched collocation: one forward pass gives residuals, growth-rate
// estimates and the final state; seed_loss then plants loss adjoints.
// ---------------------------------------------------------------------------

/// Per-iteration quantities shared by every weighting scheme.
struct CollocationEval {
  std::vector<std::size_t> batch_ids;
  Matrix state;                       // shifted candidate, dim x points
  Matrix residual;                    // equation error, dim x points
  Matrix state_dx;                    // Burgers only: space derivative of the candidate
  std::vector<double> residual_sq;    // |w(t_i, .)|^2 per time
  std::vector<double> lambda;         // growth-rate estimate per time
  std::vector<double> final_state;    // candidate at t = T
  Matrix boundary;                    // Burgers only: values at x = lo, hi (2 x n_t)
};

class LorenzCollocation {
 public:
  explicit LorenzCollocation(const LorenzProblem& p, ShiftKind shift = ShiftKind::additive)
      : p_(p), shift_(shift), grid_(p.time_grid()), quad_(trapezoid_weights(grid_)) {
    p.validate();
    inputs_.resize(1, static_cast<Eigen::Index>(grid_.size));
    for (std::size_t i = 0; i < grid_.size; ++i) inputs_(0, static_cast<Eigen::Index>(i)) = grid_[i];
  }

  const UniformGrid& time_grid() const { return grid_; }

  CollocationEval evaluate(GradTape& tape) const {
    CollocationEval e;
    const std::size_t id = tape.record(inputs_, kTime);
    e.batch_ids = {id};
    const JetBatch& out = tape.output(id);
    const Eigen::Index n = out.value.cols();
    e.state.resize(3, n);
    e.residual.resize(3, n);
    e.residual_sq.resize(static_cast<std::size_t>(n));
    e.lambda.resize(static_cast<std::size_t>(n));
    const Vec3 g0 = p_.rhs({0.0, 0.0, 0.0});
    const bool scaled = shift_ == ShiftKind::time_scaled;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double m = scaled ? grid_[static_cast<std::size_t>(i)] : 1.0;
      Vec3 u;
      for (int k = 0; k < 3; ++k) u[k] = out.value(k, i) - out.value(k, 0) + m * p_.u0[k];
      const Vec3 f = p_.rhs(u);
      double sq = 0.0;
      Vec3 gd;
      for (int k = 0; k < 3; ++k) {
        e.state(k, i) = u[k];
        const double w = out.d_t(k, i) + (scaled ? p_.u0[k] : 0.0) - f[k];
        e.residual(k, i) = w;
        sq += w * w;
        gd[k] = f[k] - g0[k];
      }
      if (!std::isfinite(sq)) throw NonFiniteError("non-finite Lorenz residual", static_cast<std::size_t>(i));
      e.residual_sq[i] = sq;
      e.lambda[i] = rayleigh_lambda(gd, u, std::array<double, 3>{1.0, 1.0, 1.0});
    }
    e.final_state = {e.state(0, n - 1), e.state(1, n - 1), e.state(2, n - 1)};
    return e;
  }

  /// Trapezoid-in-time loss sum_i q_i rho_i |w_i|^2; seeds the tape adjoints.
  double seed_loss(GradTape& tape, const CollocationEval& e, std::span<const double> rho) const {
    JetBatch& adj = tape.adjoint(e.batch_ids[0]);
    const Eigen::Index n = e.state.cols();
    double loss = 0.0;
    Eigen::Vector3d anchor = Eigen::Vector3d::Zero();
    for (Eigen::Index i = 0; i < n; ++i) {
      const double c = quad_[i] * rho[i];
      loss += c * e.residual_sq[i];
      const Vec3 u{e.state(0, i), e.state(1, i), e.state(2, i)};
      const auto J = p_.jacobian(u);
      Eigen::Vector3d g;
      for (int k = 0; k < 3; ++k) g[k] = 2.0 * c * e.residual(k, i);
      for (int k = 0; k < 3; ++k) {
        adj.d_t(k, i) += g[k];
        // d w / d U = -J, so the state adjoint is -J^T g.
        const double ubar = -(J[0 * 3 + k] * g[0] + J[1 * 3 + k] * g[1] + J[2 * 3 + k] * g[2]);
        adj.value(k, i) += ubar;
        anchor[k] -= ubar;
      }
    }
    for (int k = 0; k < 3; ++k) adj.value(k, 0) += anchor[k];
    return loss;
  }

  /// Exact-solution Rayleigh quotient with a reference trajectory substituted
  /// for zero; reference is 3 x n_t.
  std::vector<double> ideal_lambda(const CollocationEval& e, const Matrix& reference) const {
    std::vector<double> out(static_cast<std::size_t>(e.state.cols()));
    for (Eigen::Index i = 0; i < e.state.cols(); ++i) {
      const Vec3 u{e.state(0, i), e.state(1, i), e.state(2, i)};
      const Vec3 r{reference(0, i), reference(1, i), reference(2, i)};
      const Vec3 fu = p_.rhs(u), fr = p_.rhs(r);
      const std::array<double, 3> gd{fu[0] - fr[0], fu[1] - fr[1], fu[2] - fr[2]};
      const std::array<double, 3> d{u[0] - r[0], u[1] - r[1], u[2] - r[2]};
      out[i] = rayleigh_lambda(gd, d, std::array<double, 3>{1.0, 1.0, 1.0});
    }
    return out;
  }

 private:
  LorenzProblem p_;
  ShiftKind shift_;
  UniformGrid grid_;
  std::vector<double> quad_;
  Matrix inputs_;
};

class BurgersCollocation {
 public:
  explicit BurgersCollocation(const BurgersProblem& p, ShiftKind shift = ShiftKind::additive)
      : p_(p), shift_(shift), grid_(p.time_grid()), quad_(trapezoid_weights(grid_)), xs_(p.space_points()) {
    p.validate();
    const auto nt = static_cast<Eigen::Index>(grid_.size);
    const auto nx = static_cast<Eigen::Index>(xs_.size());
    interior_.resize(2, nt * nx);
    boundary_.resize(2, 2 * nt);
    for (Eigen::Index i = 0; i < nt; ++i) {
      for (Eigen::Index j = 0; j < nx; ++j) {
        interior_(0, i * nx + j) = grid_[static_cast<std::size_t>(i)];
        interior_(1, i * nx + j) = xs_[static_cast<std::size_t>(j)];
      }
      boundary_(0, 2 * i) = boundary_(0, 2 * i + 1) = grid_[static_cast<std::size_t>(i)];
      boundary_(1, 2 * i) = p.x_lo;
      boundary_(1, 2 * i + 1) = p.x_hi;
    }
    for (double x : xs_) {
      const Jet2 ic = BurgersProblem::initial(Jet2::space_variable(x));
      ic_.push_back(ic);
    }
    ic_boundary_ = {BurgersProblem::initial(p.x_lo), BurgersProblem::initial(p.x_hi)};
  }

  const UniformGrid& time_grid() const { return grid_; }
  const std::vector<double>& space_points() const { return xs_; }

  CollocationEval evaluate(GradTape& tape) const {
    CollocationEval e;
    const std::size_t in_id = tape.record(interior_, kTime | kSpace | kSpaceSecond);
    const std::size_t bd_id = tape.record(boundary_, kValueOnly);
    e.batch_ids = {in_id, bd_id};
    const JetBatch& out = tape.output(in_id);
    const JetBatch& bd = tape.output(bd_id);
    const std::size_t nt = grid_.size, nx = xs_.size();
    const double h = p_.space_step();
    e.state.resize(1, static_cast<Eigen::Index>(nt * nx));
    e.residual.resize(1, static_cast<Eigen::Index>(nt * nx));
    e.state_dx.resize(1, static_cast<Eigen::Index>(nt * nx));
    e.residual_sq.assign(nt, 0.0);
    e.lambda.assign(nt, 0.0);
    const bool scaled = shift_ == ShiftKind::time_scaled;
    for (std::size_t i = 0; i < nt; ++i) {
      const double m = scaled ? grid_[i] : 1.0;
      double num = 0.0, den = 0.0, sq = 0.0;
      for (std::size_t j = 0; j < nx; ++j) {
        const auto c = static_cast<Eigen::Index>(i * nx + j);
        const auto c0 = static_cast<Eigen::Index>(j);
        const double u = out.value(0, c) - out.value(0, c0) + m * ic_[j].value;
        const double ux = out.d_x(0, c) - out.d_x(0, c0) + m * ic_[j].d_x;
        const double uxx = out.d_xx(0, c) - out.d_xx(0, c0) + m * ic_[j].d_xx;
        const double ut = out.d_t(0, c) + (scaled ? ic_[j].value : 0.0);
        const double w = ut + u * ux - p_.nu * uxx;
        if (!std::isfinite(w)) throw NonFiniteError("non-finite Burgers residual", static_cast<std::size_t>(c));
        e.state(0, c) = u;
        e.residual(0, c) = w;
        e.state_dx(0, c) = ux;
        sq += w * w;
        num += (-u * ux + p_.nu * uxx) * u;
        den += u * u;
      }
      e.residual_sq[i] = h * sq;
      e.lambda[i] = h * den < kLambdaDenominatorFloor ? 0.0 : num / den;
    }
    e.boundary.resize(2, static_cast<Eigen::Index>(nt));
    for (std::size_t i = 0; i < nt; ++i) {
      const double m = scaled ? grid_[i] : 1.0;
      for (int side = 0; side < 2; ++side)
        e.boundary(side, static_cast<Eigen::Index>(i)) =
            bd.value(0, static_cast<Eigen::Index>(2 * i + side)) - bd.value(0, side) + m * ic_boundary_[side];
    }
    e.final_state.resize(nx);
    for (std::size_t j = 0; j < nx; ++j) e.final_state[j] = e.state(0, static_cast<Eigen::Index>((nt - 1) * nx + j));
    return e;
  }

  /// sum_i q_i rho_i |w(t_i)|^2 + dt sum_i rho_i (u(t_i,lo)^2 + u(t_i,hi)^2).
  double seed_loss(GradTape& tape, const CollocationEval& e, std::span<const double> rho) const {
    JetBatch& adj = tape.adjoint(e.batch_ids[0]);
    JetBatch& badj = tape.adjoint(e.batch_ids[1]);
    const std::size_t nt = grid_.size, nx = xs_.size();
    const double h = p_.space_step();
    const double dt = grid_.step();
    double loss = 0.0;
    for (std::size_t i = 0; i < nt; ++i) {
      const double c = quad_[i] * rho[i];
      loss += c * e.residual_sq[i];
      for (std::size_t j = 0; j < nx; ++j) {
        const auto col = static_cast<Eigen::Index>(i * nx + j);
        const auto c0 = static_cast<Eigen::Index>(j);
        const double g = 2.0 * c * h * e.residual(0, col);
        const double ubar = g * e.state_dx(0, col);
        const double uxbar = g * e.state(0, col);
        const double uxxbar = -p_.nu * g;
        adj.d_t(0, col) += g;
        adj.value(0, col) += ubar;
        adj.d_x(0, col) += uxbar;
        adj.d_xx(0, col) += uxxbar;
        adj.value(0, c0) -= ubar;
        adj.d_x(0, c0) -= uxbar;
        adj.d_xx(0, c0) -= uxxbar;
      }
      for (int side = 0; side < 2; ++side) {
        const double b = e.boundary(side, static_cast<Eigen::Index>(i));
        loss += dt * rho[i] * b * b;
        const double bbar = 2.0 * dt * rho[i] * b;
        badj.value(0, static_cast<Eigen::Index>(2 * i + side)) += bbar;
        badj.value(0, side) -= bbar;
      }
    }
    return loss;
  }

 private:
  BurgersProblem p_;
  ShiftKind shift_;
  UniformGrid grid_;
  std::vector<double> quad_;
  std::vector<double> xs_;
  std::vector<Jet2> ic_;
  std::array<double, 2> ic_boundary_{};
  Matrix interior_, boundary_;
};

}  // namespace lpinn
