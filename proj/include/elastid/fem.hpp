#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cmath>
#include <vector>

#include "elastid/errors.hpp"
#include "elastid/materials.hpp"
#include "elastid/mesh.hpp"

namespace elastid {

// Loading protocol for the virtual experiment. Quasi-static runs visit the
// accumulated displacement parameters in phi_steps; dynamic runs ramp the
// boundary at constant rate phi_rate with explicit steps of size dt.
struct LoadingProgram {
  enum class Mode { QuasiStatic, Dynamic };
  Mode mode = Mode::QuasiStatic;
  std::vector<double> phi_steps;  // quasi-static only
  double phi_rate = 0.1;          // dynamic only
  double dt = 2e-4;
  long total_steps = 50000;
  int n_snapshots = 5;
  double density = 1.0;
  Eigen::Vector2d initial_velocity = Eigen::Vector2d::Zero();  // free DOFs, dynamic only
};

inline LoadingProgram default_quasistatic(int n_steps = 5, double phi_increment = 0.1) {
  LoadingProgram p;
  p.mode = LoadingProgram::Mode::QuasiStatic;
  for (int l = 1; l <= n_steps; ++l) p.phi_steps.push_back(phi_increment * l);
  p.n_snapshots = n_steps;
  return p;
}

inline LoadingProgram default_dynamic() {
  LoadingProgram p;
  p.mode = LoadingProgram::Mode::Dynamic;
  return p;
}

// Snapshot step indices for a dynamic run: n_snapshots equispaced interior
// steps; the first and last step are never used (acceleration reconstruction
// needs both neighbors).
inline std::vector<long> dynamic_snapshot_steps(const LoadingProgram& p) {
  std::vector<long> steps;
  for (int k = 1; k <= p.n_snapshots; ++k)
    steps.push_back(std::lround(static_cast<double>(k) * p.total_steps / (p.n_snapshots + 1)));
  return steps;
}

// Boundary program of the asymmetric biaxial test: the constrained part of
// the plate follows the affine field u = (phi/2 x1, phi x2).
inline double prescribed_displacement(const Eigen::Vector2d& X, int comp, double phi) {
  return comp == 0 ? 0.5 * phi * X.x() : phi * X.y();
}

// Internal nodal forces f_a = sum_e A_e P(F_e) grad(N_a) for the one-point
// quadrature triangle mesh. Fills all DOFs (free and fixed).
inline void internal_forces(const Mesh& mesh, const BenchmarkMaterial& mat,
                            const std::vector<Eigen::Vector2d>& u, std::vector<Eigen::Vector2d>& f) {
  f.assign(mesh.nodes.size(), Eigen::Vector2d::Zero());
  for (int e = 0; e < mesh.element_count(); ++e) {
    const auto& el = mesh.elements[e];
    const auto& g = mesh.shape_gradients[e];
    Eigen::Matrix2d F2 = Eigen::Matrix2d::Identity();
    for (int a = 0; a < 3; ++a) {
      F2(0, 0) += u[el[a]].x() * g(a, 0);
      F2(0, 1) += u[el[a]].x() * g(a, 1);
      F2(1, 0) += u[el[a]].y() * g(a, 0);
      F2(1, 1) += u[el[a]].y() * g(a, 1);
    }
    if (!(F2.determinant() > 0.0))
      throw KinematicsError("internal forces: inverted element " + std::to_string(e));
    const Eigen::Matrix2d P = material_stress(mat, F2);
    for (int a = 0; a < 3; ++a) f[el[a]] += mesh.areas[e] * (P * g.row(a).transpose());
  }
}

// Consistent tangent triplets on the free-DOF block. free_pos maps a global
// DOF to its compact free index, or -1.
inline void tangent_triplets(const Mesh& mesh, const BenchmarkMaterial& mat,
                             const std::vector<Eigen::Vector2d>& u, const std::vector<int>& free_pos,
                             std::vector<Eigen::Triplet<double>>& out) {
  out.clear();
  for (int e = 0; e < mesh.element_count(); ++e) {
    const auto& el = mesh.elements[e];
    const auto& g = mesh.shape_gradients[e];
    Eigen::Matrix2d F2 = Eigen::Matrix2d::Identity();
    for (int a = 0; a < 3; ++a) {
      F2(0, 0) += u[el[a]].x() * g(a, 0);
      F2(0, 1) += u[el[a]].x() * g(a, 1);
      F2(1, 0) += u[el[a]].y() * g(a, 0);
      F2(1, 1) += u[el[a]].y() * g(a, 1);
    }
    const StressTangent st = material_stress_tangent(mat, F2);
    for (int a = 0; a < 3; ++a)
      for (int i = 0; i < 2; ++i) {
        const int row = free_pos[dof_of(el[a], i)];
        if (row < 0) continue;
        for (int b = 0; b < 3; ++b)
          for (int k = 0; k < 2; ++k) {
            const int col = free_pos[dof_of(el[b], k)];
            if (col < 0) continue;
            double kab = 0.0;
            for (int j = 0; j < 2; ++j)
              for (int l = 0; l < 2; ++l) kab += st.A(2 * i + j, 2 * k + l) * g(a, j) * g(b, l);
            out.emplace_back(row, col, mesh.areas[e] * kab);
          }
      }
  }
}

inline std::vector<int> free_position_map(const Mesh& mesh) {
  std::vector<int> pos(mesh.dof_count(), -1);
  int k = 0;
  for (int d : mesh.dofs.free_dofs) pos[d] = k++;
  return pos;
}

// Row-sum (equivalently, one-point quadrature) lumped nodal masses.
inline std::vector<double> lumped_masses(const Mesh& mesh, double density) {
  std::vector<double> m(mesh.nodes.size(), 0.0);
  for (int e = 0; e < mesh.element_count(); ++e)
    for (int a : mesh.elements[e]) m[a] += density * mesh.areas[e] / 3.0;
  return m;
}

// Total strain energy of a displacement state.
inline double total_strain_energy(const Mesh& mesh, const BenchmarkMaterial& mat,
                                  const std::vector<Eigen::Vector2d>& u) {
  double w = 0.0;
  for (int e = 0; e < mesh.element_count(); ++e) {
    const auto& el = mesh.elements[e];
    const auto& g = mesh.shape_gradients[e];
    Mat2<double> F2{{{1.0, 0.0}, {0.0, 1.0}}};
    for (int a = 0; a < 3; ++a) {
      F2[0][0] += u[el[a]].x() * g(a, 0);
      F2[0][1] += u[el[a]].x() * g(a, 1);
      F2[1][0] += u[el[a]].y() * g(a, 0);
      F2[1][1] += u[el[a]].y() * g(a, 1);
    }
    w += mesh.areas[e] * material_energy(mat, invariants_plane(F2, mat.fibers));
  }
  return w;
}

inline std::vector<double> group_reactions(const Mesh& mesh, const std::vector<Eigen::Vector2d>& f) {
  std::vector<double> r;
  for (const auto& grp : mesh.dofs.groups) {
    double s = 0.0;
    for (int d : grp.dofs) s += f[d / 2](d % 2);
    r.push_back(s);
  }
  return r;
}

}  // namespace elastid
