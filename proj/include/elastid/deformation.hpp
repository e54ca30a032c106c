#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <optional>
#include <string>

#include "elastid/dual.hpp"
#include "elastid/errors.hpp"
#include "elastid/mesh.hpp"
#include "elastid/snapshot.hpp"

namespace elastid {

// Plain nested arrays instead of Eigen for the templated tensor paths, so the
// scalar type can be a (possibly nested) Dual without NumTraits plumbing.
template <class T>
using Mat2 = std::array<std::array<T, 2>, 2>;
template <class T>
using Mat3 = std::array<std::array<T, 3>, 3>;

struct FiberPair {
  Eigen::Vector3d a1, a2;

  FiberPair(const Eigen::Vector3d& a1_, const Eigen::Vector3d& a2_) : a1(a1_), a2(a2_) {
    for (const auto* a : {&a1, &a2}) {
      if (std::abs(a->norm() - 1.0) > 1e-12) throw ConfigError("fiber direction must be a unit vector");
      if (a->z() != 0.0) throw ConfigError("fiber direction must be in-plane");
    }
  }

  // Symmetric pair at +/- angle from the x1 axis.
  static FiberPair at_angle_deg(double deg) {
    const double rad = deg * 3.14159265358979323846 / 180.0;
    return FiberPair({std::cos(rad), std::sin(rad), 0.0}, {std::cos(rad), -std::sin(rad), 0.0});
  }
};

// Isotropic invariants of C = F^T F, their isochoric (tilde) counterparts, and
// the fiber invariants when directions are given. J is det F directly.
template <class T>
struct Invariants {
  T I1{}, I2{}, I3{}, J{};
  T It1{}, It2{};
  bool has_fibers = false;
  T J4{}, J6{}, Jt4{}, Jt6{};
};

template <class T>
Invariants<T> invariants_3x3(const Mat3<T>& F, const std::optional<FiberPair>& fibers = std::nullopt) {
  Mat3<T> C{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      T acc(0.0);
      for (int k = 0; k < 3; ++k) acc += F[k][i] * F[k][j];
      C[i][j] = acc;
    }
  Invariants<T> inv;
  inv.I1 = C[0][0] + C[1][1] + C[2][2];
  T tr_C2(0.0);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) tr_C2 += C[i][j] * C[i][j];
  inv.I2 = 0.5 * (inv.I1 * inv.I1 - tr_C2);
  inv.J = F[0][0] * (F[1][1] * F[2][2] - F[1][2] * F[2][1]) -
          F[0][1] * (F[1][0] * F[2][2] - F[1][2] * F[2][0]) +
          F[0][2] * (F[1][0] * F[2][1] - F[1][1] * F[2][0]);
  if (!(inv.J > 0.0)) throw KinematicsError("invariants: det F <= 0");
  inv.I3 = inv.J * inv.J;
  const T Jm23 = pow_real(inv.J, -2.0 / 3.0);
  inv.It1 = Jm23 * inv.I1;
  inv.It2 = Jm23 * Jm23 * inv.I2;
  if (fibers) {
    inv.has_fibers = true;
    auto quad = [&](const Eigen::Vector3d& a) {
      T acc(0.0);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) acc += a[i] * C[i][j] * a[j];
      return acc;
    };
    inv.J4 = quad(fibers->a1);
    inv.J6 = quad(fibers->a2);
    inv.Jt4 = Jm23 * inv.J4;
    inv.Jt6 = Jm23 * inv.J6;
  }
  return inv;
}

// Plane-strain fast path: F given as its in-plane 2x2 block (F33 = 1, no
// out-of-plane shear). Identical results to invariants_3x3 on the embedding.
template <class T>
Invariants<T> invariants_plane(const Mat2<T>& F, const std::optional<FiberPair>& fibers = std::nullopt) {
  Mat2<T> C{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) C[i][j] = F[0][i] * F[0][j] + F[1][i] * F[1][j];
  Invariants<T> inv;
  const T t = C[0][0] + C[1][1];
  inv.I1 = t + 1.0;
  const T tr_C2 = C[0][0] * C[0][0] + C[1][1] * C[1][1] + 2.0 * C[0][1] * C[0][1] + 1.0;
  inv.I2 = 0.5 * (inv.I1 * inv.I1 - tr_C2);
  inv.J = F[0][0] * F[1][1] - F[0][1] * F[1][0];
  if (!(inv.J > 0.0)) throw KinematicsError("invariants: det F <= 0");
  inv.I3 = inv.J * inv.J;
  const T Jm23 = pow_real(inv.J, -2.0 / 3.0);
  inv.It1 = Jm23 * inv.I1;
  inv.It2 = Jm23 * Jm23 * inv.I2;
  if (fibers) {
    inv.has_fibers = true;
    auto quad = [&](const Eigen::Vector3d& a) {
      return a[0] * (C[0][0] * a[0] + C[0][1] * a[1]) + a[1] * (C[1][0] * a[0] + C[1][1] * a[1]);
    };
    inv.J4 = quad(fibers->a1);
    inv.J6 = quad(fibers->a2);
    inv.Jt4 = Jm23 * inv.J4;
    inv.Jt6 = Jm23 * inv.J6;
  }
  return inv;
}

struct DeformationState {
  Eigen::Matrix3d F;
  Invariants<double> inv;
};

inline Mat3<double> to_mat3(const Eigen::Matrix3d& F) {
  Mat3<double> m;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m[i][j] = F(i, j);
  return m;
}

inline DeformationState make_state(const Eigen::Matrix3d& F,
                                   const std::optional<FiberPair>& fibers = std::nullopt) {
  return {F, invariants_3x3(to_mat3(F), fibers)};
}

// Element deformation gradient of a linear triangle: F = I + sum_a u^a (grad N^a)^T,
// embedded as plane strain.
inline Eigen::Matrix3d deformation_gradient(const Mesh& mesh, const Snapshot& snap, int element_index) {
  if (element_index < 0 || element_index >= mesh.element_count())
    throw KinematicsError("deformation_gradient: element index out of range");
  const auto& el = mesh.elements[element_index];
  const auto& g = mesh.shape_gradients[element_index];
  Eigen::Matrix2d F2 = Eigen::Matrix2d::Identity();
  for (int a = 0; a < 3; ++a) {
    const Eigen::Vector2d& u = snap.displacements[el[a]];
    F2(0, 0) += u.x() * g(a, 0);
    F2(0, 1) += u.x() * g(a, 1);
    F2(1, 0) += u.y() * g(a, 0);
    F2(1, 1) += u.y() * g(a, 1);
  }
  if (!(F2.determinant() > 0.0))
    throw KinematicsError("deformation_gradient: det F <= 0 in element " + std::to_string(element_index));
  Eigen::Matrix3d F = Eigen::Matrix3d::Identity();
  F.topLeftCorner<2, 2>() = F2;
  return F;
}

// Isochoric principal stretches from the plane-strain invariant pair. The
// squared in-plane tilde stretches solve y^2 - S y + J^(2/3) = 0 with
// S = It1 - J^(-2/3); slightly negative discriminants (>= -1e-10) are clamped.
inline std::array<double, 3> principal_stretches(double It1, double J) {
  if (!(J > 0.0)) throw KinematicsError("principal_stretches: J <= 0");
  const double Jm23 = std::pow(J, -2.0 / 3.0);
  const double S = It1 - Jm23;
  double disc = S * S - 4.0 * std::pow(J, 2.0 / 3.0);
  if (disc < 0.0) {
    if (disc < -1e-10)
      throw KinematicsError("principal_stretches: invalid plane-strain invariant pair (discriminant " +
                            std::to_string(disc) + ")");
    disc = 0.0;
  }
  const double r = std::sqrt(disc);
  return {std::sqrt(0.5 * (S + r)), std::sqrt(0.5 * (S - r)), std::cbrt(1.0 / J)};
}

}  // namespace elastid
