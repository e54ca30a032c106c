#pragma once

#include <array>
#include <cmath>
#include <type_traits>

namespace elastid {

// Forward-mode dual number with N tangent slots. Nesting the type,
// Dual<Dual<double, N>, N>, propagates exact second derivatives.
template <class T, int N>
struct Dual {
  T v{};
  std::array<T, N> d{};

  constexpr Dual() = default;
  constexpr Dual(const T& value) : v(value) {}
  template <class S, std::enable_if_t<std::is_arithmetic_v<S> && !std::is_same_v<S, T>, int> = 0>
  constexpr Dual(S value) : v(static_cast<double>(value)) {}

  Dual& operator+=(const Dual& o) {
    v += o.v;
    for (int i = 0; i < N; ++i) d[i] += o.d[i];
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    v -= o.v;
    for (int i = 0; i < N; ++i) d[i] -= o.d[i];
    return *this;
  }
};

// value() collapses any Dual nesting down to the underlying double.
inline double value(double x) { return x; }
template <class T, int N>
double value(const Dual<T, N>& x) {
  return value(x.v);
}

template <class T, int N>
Dual<T, N> operator+(const Dual<T, N>& a, const Dual<T, N>& b) {
  Dual<T, N> r(a);
  r += b;
  return r;
}
template <class T, int N>
Dual<T, N> operator-(const Dual<T, N>& a, const Dual<T, N>& b) {
  Dual<T, N> r(a);
  r -= b;
  return r;
}
template <class T, int N>
Dual<T, N> operator-(const Dual<T, N>& a) {
  Dual<T, N> r;
  r.v = -a.v;
  for (int i = 0; i < N; ++i) r.d[i] = -a.d[i];
  return r;
}
template <class T, int N>
Dual<T, N> operator*(const Dual<T, N>& a, const Dual<T, N>& b) {
  Dual<T, N> r;
  r.v = a.v * b.v;
  for (int i = 0; i < N; ++i) r.d[i] = a.d[i] * b.v + a.v * b.d[i];
  return r;
}
template <class T, int N>
Dual<T, N> operator/(const Dual<T, N>& a, const Dual<T, N>& b) {
  Dual<T, N> r;
  r.v = a.v / b.v;
  const T inv_b2 = T(1.0) / (b.v * b.v);
  for (int i = 0; i < N; ++i) r.d[i] = (a.d[i] * b.v - a.v * b.d[i]) * inv_b2;
  return r;
}

template <class T, int N>
Dual<T, N> operator+(const Dual<T, N>& a, double b) {
  Dual<T, N> r(a);
  r.v += T(b);
  return r;
}
template <class T, int N>
Dual<T, N> operator+(double a, const Dual<T, N>& b) {
  return b + a;
}
template <class T, int N>
Dual<T, N> operator-(const Dual<T, N>& a, double b) {
  Dual<T, N> r(a);
  r.v -= T(b);
  return r;
}
template <class T, int N>
Dual<T, N> operator-(double a, const Dual<T, N>& b) {
  return -b + a;
}
template <class T, int N>
Dual<T, N> operator*(const Dual<T, N>& a, double b) {
  Dual<T, N> r;
  r.v = a.v * T(b);
  for (int i = 0; i < N; ++i) r.d[i] = a.d[i] * T(b);
  return r;
}
template <class T, int N>
Dual<T, N> operator*(double a, const Dual<T, N>& b) {
  return b * a;
}
template <class T, int N>
Dual<T, N> operator/(const Dual<T, N>& a, double b) {
  return a * (1.0 / b);
}
template <class T, int N>
Dual<T, N> operator/(double a, const Dual<T, N>& b) {
  return Dual<T, N>(T(a)) / b;
}

template <class T, int N>
bool operator<(const Dual<T, N>& a, double b) {
  return value(a) < b;
}
template <class T, int N>
bool operator>(const Dual<T, N>& a, double b) {
  return value(a) > b;
}
template <class T, int N>
bool operator<=(const Dual<T, N>& a, double b) {
  return value(a) <= b;
}
template <class T, int N>
bool operator>=(const Dual<T, N>& a, double b) {
  return value(a) >= b;
}
template <class T, int N>
bool operator<(const Dual<T, N>& a, const Dual<T, N>& b) {
  return value(a) < value(b);
}
template <class T, int N>
bool operator>(const Dual<T, N>& a, const Dual<T, N>& b) {
  return value(a) > value(b);
}

using std::cosh;
using std::exp;
using std::log;
using std::sinh;
using std::sqrt;
using std::tan;

template <class T, int N>
Dual<T, N> chain(const Dual<T, N>& x, const T& f, const T& dfdx) {
  Dual<T, N> r;
  r.v = f;
  for (int i = 0; i < N; ++i) r.d[i] = dfdx * x.d[i];
  return r;
}

template <class T, int N>
Dual<T, N> sqrt(const Dual<T, N>& x) {
  const T s = sqrt(x.v);
  return chain(x, s, T(0.5) / s);
}
template <class T, int N>
Dual<T, N> log(const Dual<T, N>& x) {
  return chain(x, log(x.v), T(1.0) / x.v);
}
template <class T, int N>
Dual<T, N> exp(const Dual<T, N>& x) {
  const T e = exp(x.v);
  return chain(x, e, e);
}
template <class T, int N>
Dual<T, N> tan(const Dual<T, N>& x) {
  const T t = tan(x.v);
  return chain(x, t, T(1.0) + t * t);
}
template <class T, int N>
Dual<T, N> sinh(const Dual<T, N>& x) {
  return chain(x, sinh(x.v), cosh(x.v));
}
template <class T, int N>
Dual<T, N> cosh(const Dual<T, N>& x) {
  return chain(x, cosh(x.v), sinh(x.v));
}

// Integer powers by repeated multiplication: exact (with exact tangents) at
// base 0, unlike exp(p*log x).
inline double ipow(double x, int n) {
  double r = 1.0;
  for (int k = 0; k < n; ++k) r *= x;
  return r;
}
template <class T, int N>
Dual<T, N> ipow(const Dual<T, N>& x, int n) {
  Dual<T, N> r(T(1.0));
  for (int k = 0; k < n; ++k) r = r * x;
  return r;
}

// Real power for strictly positive base.
template <class T, int N>
Dual<T, N> pow_real(const Dual<T, N>& x, double p) {
  return exp(p * log(x));
}
inline double pow_real(double x, double p) { return std::pow(x, p); }

}  // namespace elastid
