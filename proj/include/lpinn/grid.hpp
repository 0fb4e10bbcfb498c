#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace lpinn {

/// Uniform grid over [start, start + length] including both endpoints.
struct UniformGrid {
  double start = 0.0;
  double length = 1.0;
  std::size_t size = 2;

  static UniformGrid on(double lo, double hi, std::size_t n) { return {lo, hi - lo, n}; }

  double step() const { return size > 1 ? length / static_cast<double>(size - 1) : 0.0; }
  double operator[](std::size_t i) const {
    return i + 1 == size ? start + length : start + static_cast<double>(i) * step();
  }
  std::vector<double> points() const {
    std::vector<double> p(size);
    for (std::size_t i = 0; i < size; ++i) p[i] = (*this)[i];
    return p;
  }
};

/// Composite trapezoid quadrature weights on a uniform grid.
inline std::vector<double> trapezoid_weights(const UniformGrid& g) {
  if (g.size < 2) throw std::invalid_argument("trapezoid rule needs at least two points");
  std::vector<double> w(g.size, g.step());
  w.front() *= 0.5;
  w.back() *= 0.5;
  return w;
}

inline double trapezoid(const UniformGrid& g, std::span<const double> f) {
  const auto w = trapezoid_weights(g);
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += w[i] * f[i];
  return s;
}

/// Running trapezoid integral from the first grid point; result[0] = 0.
inline std::vector<double> cumulative_trapezoid(const UniformGrid& g, std::span<const double> f) {
  std::vector<double> c(f.size(), 0.0);
  const double h = g.step();
  for (std::size_t i = 1; i < f.size(); ++i) c[i] = c[i - 1] + 0.5 * h * (f[i - 1] + f[i]);
  return c;
}

}  // namespace lpinn
