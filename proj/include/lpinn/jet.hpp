#pragma once

#include <cmath>

namespace lpinn {

/// Value of a scalar field together with its first time derivative and its
/// first and second space derivatives. Arithmetic follows the exact chain and
/// product rules, so composing Jet2 values reproduces the derivatives of the
/// composed function to rounding.
struct Jet2 {
  double value = 0.0;
  double d_t = 0.0;
  double d_x = 0.0;
  double d_xx = 0.0;

  static constexpr Jet2 constant(double c) { return {c, 0.0, 0.0, 0.0}; }
  static constexpr Jet2 time_variable(double t) { return {t, 1.0, 0.0, 0.0}; }
  static constexpr Jet2 space_variable(double x) { return {x, 0.0, 1.0, 0.0}; }

  Jet2& operator+=(const Jet2& o) {
    value += o.value;
    d_t += o.d_t;
    d_x += o.d_x;
    d_xx += o.d_xx;
    return *this;
  }
  Jet2& operator-=(const Jet2& o) {
    value -= o.value;
    d_t -= o.d_t;
    d_x -= o.d_x;
    d_xx -= o.d_xx;
    return *this;
  }
  Jet2& operator*=(double c) {
    value *= c;
    d_t *= c;
    d_x *= c;
    d_xx *= c;
    return *this;
  }
};

inline Jet2 operator+(Jet2 a, const Jet2& b) { return a += b; }
inline Jet2 operator-(Jet2 a, const Jet2& b) { return a -= b; }
inline Jet2 operator-(Jet2 a) { return a *= -1.0; }
inline Jet2 operator*(Jet2 a, double c) { return a *= c; }
inline Jet2 operator*(double c, Jet2 a) { return a *= c; }
inline Jet2 operator+(Jet2 a, double c) {
  a.value += c;
  return a;
}

inline Jet2 operator*(const Jet2& a, const Jet2& b) {
  return {a.value * b.value,
          a.d_t * b.value + a.value * b.d_t,
          a.d_x * b.value + a.value * b.d_x,
          a.d_xx * b.value + 2.0 * a.d_x * b.d_x + a.value * b.d_xx};
}

// Scalar chain rule: f(a) with f' and f'' evaluated at a.value.
inline Jet2 chain(const Jet2& a, double f, double df, double ddf) {
  return {f, df * a.d_t, df * a.d_x, df * a.d_xx + ddf * a.d_x * a.d_x};
}

inline Jet2 tanh(const Jet2& a) {
  const double h = std::tanh(a.value);
  const double s = 1.0 - h * h;
  return chain(a, h, s, -2.0 * h * s);
}

inline Jet2 sin(const Jet2& a) {
  const double sv = std::sin(a.value);
  return chain(a, sv, std::cos(a.value), -sv);
}

inline Jet2 cos(const Jet2& a) {
  const double cv = std::cos(a.value);
  return chain(a, cv, -std::sin(a.value), -cv);
}

inline Jet2 exp(const Jet2& a) {
  const double e = std::exp(a.value);
  return chain(a, e, e, e);
}

inline Jet2 square(const Jet2& a) { return a * a; }

}  // namespace lpinn
