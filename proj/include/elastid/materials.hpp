#pragma once

#include <Eigen/Dense>
#include <array>
#include <optional>
#include <string>
#include <vector>

#include "elastid/deformation.hpp"
#include "elastid/errors.hpp"
#include "elastid/features.hpp"

namespace elastid {

// Ground-truth material used for synthetic data generation. Most benchmarks
// are sparse coefficient vectors over the feature library; the anisotropic
// exponential model is evaluated in closed form (its energy is deliberately
// not representable in the library).
struct BenchmarkMaterial {
  std::string name;
  std::array<double, FeatureLibrary::n_features> theta_true{};
  bool closed_form = false;
  double k1 = 0.0, k2 = 0.0;  // closed-form exponential constants
  std::optional<FiberPair> fibers;

  // Library used when evaluating this material's energy: fiber entries are
  // suppressed for isotropic materials so no directions are required.
  FeatureLibrary eval_lib;
};

inline const std::vector<std::string>& benchmark_names() {
  static const std::vector<std::string> names = {"NeoHookean",  "Isihara", "GentThomas",
                                                 "HainesWilson", "ArrudaBoyce", "Ogden1",
                                                 "Ogden3",      "Holzapfel"};
  return names;
}

inline BenchmarkMaterial benchmark_material(const std::string& name) {
  BenchmarkMaterial m;
  m.name = name;
  auto& t = m.theta_true;
  if (name == "NeoHookean") {
    t[0] = 0.5;
    t[14] = 1.5;
  } else if (name == "Isihara") {
    t[0] = 0.5;
    t[1] = 1.0;
    t[2] = 1.0;
    t[14] = 1.5;
  } else if (name == "GentThomas") {
    t[0] = 0.5;
    t[2] = 1.0;
    t[15] = 1.0;
    t[14] = 1.5;
  } else if (name == "HainesWilson") {
    t[0] = 0.5;
    t[1] = 1.0;
    t[3] = 0.7;
    t[2] = 0.2;
    t[14] = 1.5;
  } else if (name == "ArrudaBoyce") {
    t[16] = 0.25;
    t[14] = 1.5;
  } else if (name == "Ogden1") {
    t[17] = 0.65;
    t[14] = 1.5;
  } else if (name == "Ogden3") {
    t[17] = 0.4;
    t[18] = 0.0012;
    t[19] = 0.1;
    t[14] = 1.5;
  } else if (name == "Holzapfel") {
    t[0] = 0.5;
    t[14] = 1.0;
    m.closed_form = true;
    m.k1 = 0.9;
    m.k2 = 0.8;
    m.fibers = FiberPair::at_angle_deg(30.0);
  } else {
    throw ConfigError("unknown benchmark material '" + name + "'");
  }
  // Only the features the model actually uses are evaluated; a suppressed
  // zero-coefficient feature contributes nothing to the energy, and skipping
  // it keeps the explicit integrator affordable.
  if (!m.closed_form)
    for (int k = 0; k < FeatureLibrary::n_features; ++k)
      if (m.theta_true[k] == 0.0) m.eval_lib.suppressed[k] = true;
  if (!m.fibers)
    for (int k = 20; k < FeatureLibrary::n_features; ++k) m.eval_lib.suppressed[k] = true;
  return m;
}

// Strain energy density of the ground-truth model at a given state.
template <class T>
T material_energy(const BenchmarkMaterial& mat, const Invariants<T>& inv) {
  if (mat.closed_form) {
    if (!inv.has_fibers) throw ConfigError("closed-form material requires fiber invariants");
    const T e4 = exp(mat.k2 * ipow(inv.Jt4 - 1.0, 2));
    const T e6 = exp(mat.k2 * ipow(inv.Jt6 - 1.0, 2));
    return 0.5 * (inv.It1 - 3.0) + ipow(inv.J - 1.0, 2) + mat.k1 / (2.0 * mat.k2) * (e4 + e6 - 2.0);
  }
  const auto q = mat.eval_lib.evaluate_invariants(inv);
  T w(0.0);
  for (int k = 0; k < FeatureLibrary::n_features; ++k)
    if (mat.theta_true[k] != 0.0) w += mat.theta_true[k] * q[k];
  return w;
}

inline double material_energy_at(const BenchmarkMaterial& mat, const Eigen::Matrix3d& F) {
  return material_energy(mat, invariants_3x3(to_mat3(F), mat.fibers));
}

// First Piola stress (in-plane block) at a plane-strain state.
inline Eigen::Matrix2d material_stress(const BenchmarkMaterial& mat, const Eigen::Matrix2d& F2) {
  using D4 = Dual<double, 4>;
  Mat2<D4> Fd;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      Fd[i][j] = D4(F2(i, j));
      Fd[i][j].d[2 * i + j] = 1.0;
    }
  const D4 w = material_energy(mat, invariants_plane(Fd, mat.fibers));
  Eigen::Matrix2d P;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) P(i, j) = w.d[2 * i + j];
  return P;
}

// Stress and consistent tangent in one nested-dual sweep. Tangent layout:
// A(2i+j, 2k+l) = d^2 W / dF_ij dF_kl.
struct StressTangent {
  Eigen::Matrix2d P;
  Eigen::Matrix4d A;
};

inline StressTangent material_stress_tangent(const BenchmarkMaterial& mat, const Eigen::Matrix2d& F2) {
  using D1 = Dual<double, 4>;
  using D2 = Dual<D1, 4>;
  Mat2<D2> Fd;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const int s = 2 * i + j;
      Fd[i][j] = D2(D1(F2(i, j)));
      Fd[i][j].v.d[s] = 1.0;
      Fd[i][j].d[s] = D1(1.0);
    }
  const D2 w = material_energy(mat, invariants_plane(Fd, mat.fibers));
  StressTangent st;
  for (int s = 0; s < 4; ++s) {
    st.P(s / 2, s % 2) = w.d[s].v;
    for (int r = 0; r < 4; ++r) st.A(s, r) = w.d[s].d[r];
  }
  return st;
}

}  // namespace elastid
