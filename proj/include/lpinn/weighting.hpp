#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "errors.hpp"
#include "grid.hpp"
#include "network.hpp"

namespace lpinn {

enum class Normalization { mean_one, integral_one, max_one };

/// Nonnegative time weights, one per grid point.
struct WeightProfile {
  UniformGrid grid;
  std::vector<double> rho;
  Normalization normalization = Normalization::mean_one;
};

/// Rescales nonnegative weights in place so that `norm` holds.
inline void normalize(const UniformGrid& grid, std::vector<double>& rho, Normalization norm) {
  if (rho.empty()) throw std::invalid_argument("empty weight profile");
  double scale = 0.0;
  switch (norm) {
    case Normalization::mean_one:
      scale = std::accumulate(rho.begin(), rho.end(), 0.0) / static_cast<double>(rho.size());
      break;
    case Normalization::integral_one:
      scale = trapezoid(grid, rho);
      break;
    case Normalization::max_one:
      scale = *std::max_element(rho.begin(), rho.end());
      break;
  }
  if (!(scale > 0.0) || !std::isfinite(scale)) throw std::invalid_argument("weights cannot be normalized");
  for (double& r : rho) r /= scale;
}

/// rho_i = exp(e_i - max e), normalized. Shifting by the maximum keeps the
/// largest weight at exactly one before normalization.
inline WeightProfile weights_from_log(const UniformGrid& grid, std::span<const double> log_rho, Normalization norm) {
  const double top = *std::max_element(log_rho.begin(), log_rho.end());
  WeightProfile w{grid, std::vector<double>(log_rho.size()), norm};
  for (std::size_t i = 0; i < log_rho.size(); ++i) w.rho[i] = std::exp(log_rho[i] - top);
  normalize(grid, w.rho, norm);
  return w;
}

inline WeightProfile uniform_weights(const UniformGrid& grid, Normalization norm = Normalization::mean_one) {
  if (grid.size == 0) throw std::invalid_argument("empty grid");
  WeightProfile w{grid, std::vector<double>(grid.size, 1.0), norm};
  normalize(grid, w.rho, norm);
  return w;
}

/// rho(t) proportional to exp(-lambda t).
inline WeightProfile exponential_weights(const UniformGrid& grid, double lambda,
                                         Normalization norm = Normalization::mean_one) {
  if (!std::isfinite(lambda)) throw std::invalid_argument("exponential rate must be finite");
  if (grid.size == 0) throw std::invalid_argument("empty grid");
  std::vector<double> e(grid.size);
  for (std::size_t i = 0; i < grid.size; ++i) e[i] = -lambda * grid[i];
  return weights_from_log(grid, e, norm);
}

/// Causal weights rho_i = exp(-epsilon * int_0^{t_i} |w|^2), with the running
/// integral taken by the trapezoid rule over the squared residual norms.
/// Normalized to max one, so rho_0 = 1.
inline WeightProfile causal_weights(const UniformGrid& grid, std::span<const double> residual_norms_sq,
                                    double epsilon) {
  if (epsilon < 0.0) throw std::invalid_argument("causal epsilon must be nonnegative");
  if (residual_norms_sq.size() != grid.size) throw std::invalid_argument("residual count does not match grid");
  for (std::size_t i = 0; i < residual_norms_sq.size(); ++i)
    if (!(residual_norms_sq[i] >= 0.0)) throw NonFiniteError("residual norm must be a nonnegative number", i);
  const auto cum = cumulative_trapezoid(grid, residual_norms_sq);
  WeightProfile w{grid, std::vector<double>(grid.size), Normalization::max_one};
  for (std::size_t i = 0; i < grid.size; ++i) w.rho[i] = std::exp(-epsilon * cum[i]);
  return w;
}

/// Local growth-rate estimates and their running integral.
struct LyapunovTrace {
  UniformGrid grid;
  std::vector<double> lambda_est;
  std::vector<double> cumulative;
};

inline LyapunovTrace make_trace(const UniformGrid& grid, std::vector<double> lambda_est) {
  if (lambda_est.size() != grid.size) throw std::invalid_argument("lambda count does not match grid");
  auto cum = cumulative_trapezoid(grid, lambda_est);
  return {grid, std::move(lambda_est), std::move(cum)};
}

/// rho(t) proportional to exp(-int_0^t lambda).
inline WeightProfile lyapunov_weights(const LyapunovTrace& trace, Normalization norm = Normalization::mean_one) {
  std::vector<double> e(trace.cumulative.size());
  for (std::size_t i = 0; i < e.size(); ++i) e[i] = -trace.cumulative[i];
  return weights_from_log(trace.grid, e, norm);
}

/// Squared norms below this are treated as a zero candidate.
inline constexpr double kLambdaDenominatorFloor = 1e-8;

/// Rayleigh quotient <G(u) - G(0), u> / <u, u> under the inner product with
/// quadrature weights `quad`. Returns 0 when <u, u> is below the floor.
inline double rayleigh_lambda(std::span<const double> g_diff, std::span<const double> u,
                              std::span<const double> quad) {
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    num += quad[k] * g_diff[k] * u[k];
    den += quad[k] * u[k] * u[k];
  }
  if (den < kLambdaDenominatorFloor) return 0.0;
  return num / den;
}

/// The pieces of the estimator at one time: the candidate state u(t, .), the
/// operator increment G(u) - G(0) and the inner-product weights.
struct OperatorSlice {
  std::vector<double> u;
  std::vector<double> g_diff;
  std::vector<double> quad;
};

/// Anything that can produce an OperatorSlice for a candidate at time t.
template <class Op>
concept SliceOperator = requires(const Op& op, const ShiftedAnsatz& a, double t) {
  { op.slice(a, t) } -> std::same_as<OperatorSlice>;
};

/// Online growth-rate estimate at every grid time, replacing the unknown
/// exact solution by zero in the Rayleigh quotient.
template <SliceOperator Op>
LyapunovTrace estimate_lambda(const Op& op, const ShiftedAnsatz& ansatz, const UniformGrid& grid) {
  std::vector<double> lambda(grid.size);
  for (std::size_t i = 0; i < grid.size; ++i) {
    const OperatorSlice s = op.slice(ansatz, grid[i]);
    for (std::size_t k = 0; k < s.u.size(); ++k)
      if (!std::isfinite(s.u[k]) || !std::isfinite(s.g_diff[k])) throw NonFiniteError("non-finite network output", i);
    lambda[i] = rayleigh_lambda(s.g_diff, s.u, s.quad);
  }
  return make_trace(grid, std::move(lambda));
}

/// G(u) = A u + xi + alpha u with A antisymmetric. For this family the
/// estimator returns alpha exactly, whatever the candidate.
struct LinearTestOperator {
  std::vector<double> antisym;  // row-major dim x dim
  std::vector<double> drift;
  double alpha = 0.0;

  std::size_t dim() const { return drift.size(); }

  std::vector<double> apply(std::span<const double> u) const {
    const std::size_t d = dim();
    std::vector<double> g(d);
    for (std::size_t r = 0; r < d; ++r) {
      double acc = drift[r] + alpha * u[r];
      for (std::size_t c = 0; c < d; ++c) acc += antisym[r * d + c] * u[c];
      g[r] = acc;
    }
    return g;
  }

  OperatorSlice slice(const ShiftedAnsatz& a, double t) const {
    const auto jets = shifted_eval(a, t);
    OperatorSlice s;
    s.u.resize(dim());
    for (std::size_t k = 0; k < dim(); ++k) s.u[k] = jets[k].value;
    const auto gu = apply(s.u);
    const std::vector<double> zero(dim(), 0.0);
    const auto g0 = apply(zero);
    s.g_diff.resize(dim());
    for (std::size_t k = 0; k < dim(); ++k) s.g_diff[k] = gu[k] - g0[k];
    s.quad.assign(dim(), 1.0);
    return s;
  }
};

/// Integrating factor exp(-int_0^t lambda) on the trace grid.
inline std::vector<double> integrating_factor(const LyapunovTrace& trace) {
  std::vector<double> f(trace.cumulative.size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::exp(-trace.cumulative[i]);
  return f;
}

/// Worst-case final error attainable under weights rho, up to the budget
/// constant: sum_i q_i Lambda_i^2 / rho_i with trapezoid weights q. Minimized
/// over integral-one rho by rho proportional to Lambda, where it equals
/// (sum_i q_i Lambda_i)^2.
inline double worst_case_error(const WeightProfile& rho, const LyapunovTrace& trace) {
  const auto q = trapezoid_weights(rho.grid);
  const auto factor = integrating_factor(trace);
  double s = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double lam2 = factor[i] * factor[i];
    if (lam2 > 0.0 && !(rho.rho[i] > 0.0))
      throw std::domain_error("zero weight at grid index " + std::to_string(i));
    s += q[i] * lam2 / rho.rho[i];
  }
  return s;
}

/// int_0^T exp(int_t^T lambda) |w(t)| dt by the trapezoid rule: the bound on
/// the final error produced by an equation error of norm |w(t)|.
inline double propagated_error_bound(const LyapunovTrace& trace, std::span<const double> residual_norms) {
  const auto q = trapezoid_weights(trace.grid);
  const double total = trace.cumulative.back();
  double s = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) s += q[i] * std::exp(total - trace.cumulative[i]) * residual_norms[i];
  return s;
}

}  // namespace lpinn
