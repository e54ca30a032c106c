#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <optional>
#include <string>

#include "elastid/deformation.hpp"
#include "elastid/dual.hpp"
#include "elastid/errors.hpp"

namespace elastid {

enum class FeatureKind { MooneyRivlin, Volumetric, LogI2, ArrudaBoyce, Ogden, Fiber4, Fiber6 };

struct FeatureDescriptor {
  FeatureKind kind;
  int p1 = 0;  // MooneyRivlin: It1 exponent; Fiber: power; Ogden: alpha index
  int p2 = 0;  // MooneyRivlin: It2 exponent
};

namespace detail {

// lambda1^alpha + lambda2^alpha for the isochoric in-plane stretches, written
// in terms of m = S/2 and h = m^2 - J^(2/3) (a quarter of the discriminant).
// Near the equibiaxial family h -> 0 the square-root form loses its
// derivative; an even power series in h/m^2 takes over there. The series is
// the analytic continuation, so tiny negative h from round-off is fine.
template <class T>
T stretch_power_sum(const T& m, const T& h, double beta) {
  const double x_val = value(h) / (value(m) * value(m));
  if (std::abs(x_val) < 1e-4) {
    const double c2 = beta * (beta - 1.0) / 2.0;
    const double c4 = c2 * (beta - 2.0) * (beta - 3.0) / 12.0;
    const double c6 = c4 * (beta - 4.0) * (beta - 5.0) / 30.0;
    const T x = h / (m * m);
    return 2.0 * pow_real(m, beta) * (1.0 + x * (c2 + x * (c4 + x * c6)));
  }
  if (x_val < 0.0)
    throw KinematicsError("ogden feature: invalid plane-strain invariant pair");
  const T u = sqrt(h);
  return pow_real(m + u, beta) + pow_real(m - u, beta);
}

}  // namespace detail

// Pade-type approximation of the inverse Langevin function on (-1, 1).
template <class T>
T inverse_langevin(const T& x) {
  const double xv = value(x);
  if (std::abs(xv) >= 1.0) throw KinematicsError("inverse_langevin: |x| >= 1");
  if (std::abs(xv) < 0.841) return 1.31 * tan(1.59 * x) + 0.91 * x;
  const double sign = xv > 0.0 ? 1.0 : -1.0;
  return 1.0 / (sign - x);
}

// Eight-chain energy term as a function of It1 alone; nonnegative and zero at
// It1 = 3 when `offset` is the recomputed one.
template <class T>
T arruda_boyce(const T& It1, double chain_segments, double offset) {
  const double sqrtN = std::sqrt(chain_segments);
  const T lam = sqrt(It1 / 3.0);
  if (value(lam) / sqrtN >= 1.0)
    throw KinematicsError("arruda_boyce: chain limit reached (lambda >= sqrt(N))");
  const T beta = inverse_langevin(lam * (1.0 / sqrtN));
  return 10.0 * sqrtN * (beta * lam + sqrtN * log(beta / sinh(beta))) - offset;
}

inline double recompute_ab_offset(double chain_segments) {
  return arruda_boyce(3.0, chain_segments, 0.0);
}

// The 26-entry strain-energy feature library. Ordering: 14 Mooney-Rivlin
// terms (degrees 1..4, It1 exponent descending within each degree), the
// volumetric term, log(It2/3), the eight-chain term, three Ogden terms, then
// the two fiber families with powers 2..4.
struct FeatureLibrary {
  static constexpr int n_features = 26;

  std::array<double, 3> ogden_alphas{1.3, 5.0, 2.0};
  double chain_segments = 28.0;
  double ab_offset;
  std::array<bool, n_features> suppressed{};

  FeatureLibrary() : ab_offset(recompute_ab_offset(28.0)) {}

  // The paper-rounded offset (use_rounded) leaves the eight-chain entry ~2e-3
  // off zero at the reference; the recomputed offset is exact there.
  void set_ab_offset_rounded(bool use_rounded) {
    ab_offset = use_rounded ? 15.16 : recompute_ab_offset(chain_segments);
  }

  static const std::array<FeatureDescriptor, n_features>& descriptors() {
    static const std::array<FeatureDescriptor, n_features> d = [] {
      std::array<FeatureDescriptor, n_features> a{};
      int k = 0;
      for (int degree = 1; degree <= 4; ++degree)
        for (int i = degree; i >= 0; --i) a[k++] = {FeatureKind::MooneyRivlin, i, degree - i};
      a[k++] = {FeatureKind::Volumetric};
      a[k++] = {FeatureKind::LogI2};
      a[k++] = {FeatureKind::ArrudaBoyce};
      for (int i = 0; i < 3; ++i) a[k++] = {FeatureKind::Ogden, i};
      for (int p = 2; p <= 4; ++p) a[k++] = {FeatureKind::Fiber4, p};
      for (int p = 2; p <= 4; ++p) a[k++] = {FeatureKind::Fiber6, p};
      return a;
    }();
    return d;
  }

  static std::string feature_name(int k) {
    static const std::array<std::string, n_features> names = {
        "It1-3",           "It2-3",           "(It1-3)^2",        "(It1-3)(It2-3)",
        "(It2-3)^2",       "(It1-3)^3",       "(It1-3)^2(It2-3)", "(It1-3)(It2-3)^2",
        "(It2-3)^3",       "(It1-3)^4",       "(It1-3)^3(It2-3)", "(It1-3)^2(It2-3)^2",
        "(It1-3)(It2-3)^3", "(It2-3)^4",      "(J-1)^2",          "log(It2/3)",
        "arruda_boyce",    "ogden_1.3",       "ogden_5",          "ogden_2",
        "(Jt4-1)^2",       "(Jt4-1)^3",       "(Jt4-1)^4",        "(Jt6-1)^2",
        "(Jt6-1)^3",       "(Jt6-1)^4"};
    return names.at(k);
  }

  bool any_fiber_active() const {
    for (int k = 20; k < 26; ++k)
      if (!suppressed[k]) return true;
    return false;
  }

  template <class T>
  std::array<T, n_features> evaluate_invariants(const Invariants<T>& inv) const {
    if (any_fiber_active() && !inv.has_fibers)
      throw ConfigError("feature evaluation: fiber invariants missing with anisotropic features active");
    std::array<T, n_features> q{};
    const T X = inv.It1 - 3.0;
    const T Y = inv.It2 - 3.0;
    int k = 0;
    for (int degree = 1; degree <= 4; ++degree)
      for (int i = degree; i >= 0; --i, ++k)
        if (!suppressed[k]) q[k] = ipow(X, i) * ipow(Y, degree - i);
    if (!suppressed[14]) q[14] = ipow(inv.J - 1.0, 2);
    if (!suppressed[15]) q[15] = log(inv.It2 / T(3.0));
    if (!suppressed[16]) q[16] = arruda_boyce(inv.It1, chain_segments, ab_offset);
    const T Jm23 = pow_real(inv.J, -2.0 / 3.0);
    const T m = 0.5 * (inv.It1 - Jm23);
    const T h = m * m - pow_real(inv.J, 2.0 / 3.0);
    for (int i = 0; i < 3; ++i)
      if (!suppressed[17 + i]) {
        const double alpha = ogden_alphas[i];
        q[17 + i] = (2.0 / alpha) *
                    (detail::stretch_power_sum(m, h, alpha / 2.0) + pow_real(inv.J, -alpha / 3.0));
      }
    for (int p = 2; p <= 4; ++p) {
      if (!suppressed[18 + p]) q[18 + p] = ipow(inv.Jt4 - 1.0, p);
      if (!suppressed[21 + p]) q[21 + p] = ipow(inv.Jt6 - 1.0, p);
    }
    return q;
  }
};

struct FeatureVector {
  std::array<double, FeatureLibrary::n_features> values{};
};

struct FeatureGradient {
  std::array<Eigen::Matrix3d, FeatureLibrary::n_features> dQdF{};
};

inline FeatureVector evaluate(const FeatureLibrary& lib, const DeformationState& state) {
  return {lib.evaluate_invariants(state.inv)};
}

// dQ_k/dF_ij at a plane-strain point, via one nine-tangent dual sweep.
inline FeatureGradient gradient(const FeatureLibrary& lib, const Eigen::Matrix3d& F,
                                const std::optional<FiberPair>& fibers = std::nullopt) {
  using D9 = Dual<double, 9>;
  Mat3<D9> Fd;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      Fd[i][j] = D9(F(i, j));
      Fd[i][j].d[3 * i + j] = 1.0;
    }
  const auto q = lib.evaluate_invariants(invariants_3x3(Fd, fibers));
  FeatureGradient g;
  for (int k = 0; k < FeatureLibrary::n_features; ++k)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) g.dQdF[k](i, j) = q[k].d[3 * i + j];
  return g;
}

// In-plane 2x2 gradient block, used by assembly (shape-gradient contractions
// only ever touch in-plane components). Four tangents instead of nine.
inline std::array<Eigen::Matrix2d, FeatureLibrary::n_features> gradient_inplane(
    const FeatureLibrary& lib, const Eigen::Matrix2d& F2,
    const std::optional<FiberPair>& fibers = std::nullopt) {
  using D4 = Dual<double, 4>;
  Mat2<D4> Fd;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      Fd[i][j] = D4(F2(i, j));
      Fd[i][j].d[2 * i + j] = 1.0;
    }
  const auto q = lib.evaluate_invariants(invariants_plane(Fd, fibers));
  std::array<Eigen::Matrix2d, FeatureLibrary::n_features> g;
  for (int k = 0; k < FeatureLibrary::n_features; ++k)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) g[k](i, j) = q[k].d[2 * i + j];
  return g;
}

}  // namespace elastid
