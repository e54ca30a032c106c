#pragma once

#include <Eigen/Sparse>
#include <cmath>
#include <string>
#include <vector>

#include "elastid/fem.hpp"
#include "elastid/snapshot.hpp"

namespace elastid {

struct NewtonOptions {
  int max_iterations = 50;
  int max_halvings = 10;
  int max_increment_shrinks = 12;
  double relative_tolerance = 1e-9;
  double absolute_floor = 1e-14;
};

// Displacement-controlled quasi-static solve: at each load step the
// constrained DOFs are set to the affine boundary program at phi and Newton
// iteration drives the free-DOF internal forces to zero. A load increment
// that Newton cannot equilibrate from the previous state (stiff fiber terms
// make the cold start at the first program step genuinely non-convergent) is
// halved and retried; intermediate equilibria are discarded, so one snapshot
// is recorded per program step and the success path is unchanged.
inline std::vector<Snapshot> solve_quasistatic(const Mesh& mesh, const BenchmarkMaterial& mat,
                                               const LoadingProgram& program,
                                               const NewtonOptions& opt = {}) {
  if (program.mode != LoadingProgram::Mode::QuasiStatic)
    throw ConfigError("solve_quasistatic: program mode is not quasi-static");
  const std::vector<int> free_pos = free_position_map(mesh);
  const int n_free = static_cast<int>(mesh.dofs.free_dofs.size());

  std::vector<Eigen::Vector2d> u(mesh.nodes.size(), Eigen::Vector2d::Zero());
  std::vector<Eigen::Vector2d> f;
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::SparseMatrix<double> K(n_free, n_free);
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  bool analyzed = false;

  auto free_residual = [&](Eigen::VectorXd& r) {
    internal_forces(mesh, mat, u, f);
    for (int i = 0; i < n_free; ++i) {
      const int d = mesh.dofs.free_dofs[i];
      r[i] = f[d / 2](d % 2);
    }
  };

  // Newton at one load level starting from the current iterate. Returns false
  // when the increment is too large to equilibrate; the caller then restores
  // the iterate and shortens the increment. Throws only for non-finite or
  // structurally singular systems that no shorter increment can cure.
  auto equilibrate = [&](double phi) -> bool {
    for (int d : mesh.dofs.fixed_dofs)
      u[d / 2](d % 2) = prescribed_displacement(mesh.nodes[d / 2], d % 2, phi);

    Eigen::VectorXd r(n_free), r_trial(n_free);
    try {
      free_residual(r);
    } catch (const KinematicsError&) {
      return false;  // the boundary jump alone inverted an element
    }
    const double r0 = std::max(r.norm(), opt.absolute_floor);
    bool converged = r.norm() <= opt.absolute_floor;
    for (int it = 0; it < opt.max_iterations && !converged; ++it) {
      tangent_triplets(mesh, mat, u, free_pos, trip);
      K.setFromTriplets(trip.begin(), trip.end());
      if (!analyzed) {
        lu.analyzePattern(K);
        analyzed = true;
      }
      lu.factorize(K);
      if (lu.info() != Eigen::Success) return false;
      const Eigen::VectorXd d = lu.solve(-r);

      const std::vector<Eigen::Vector2d> u_saved = u;
      double alpha = 1.0;
      bool accepted = false;
      for (int h = 0; h <= opt.max_halvings; ++h, alpha *= 0.5) {
        u = u_saved;
        for (int i = 0; i < n_free; ++i) {
          const int dof = mesh.dofs.free_dofs[i];
          u[dof / 2](dof % 2) += alpha * d[i];
        }
        try {
          free_residual(r_trial);
        } catch (const KinematicsError&) {
          continue;  // inverted element: shorten the step
        }
        if (r_trial.norm() < r.norm() * (1.0 - 1e-4 * alpha) + opt.absolute_floor) {
          accepted = true;
          break;
        }
      }
      if (!accepted) return false;
      r.swap(r_trial);
      converged = r.norm() <= std::max(opt.relative_tolerance * r0, opt.absolute_floor);
    }
    return converged;
  };

  std::vector<Snapshot> out;
  double phi_done = 0.0;
  for (std::size_t step = 0; step < program.phi_steps.size(); ++step) {
    const double phi = program.phi_steps[step];
    double increment = phi - phi_done;
    int shrinks = 0;
    while (std::abs(phi_done - phi) > 1e-12 * std::max(1.0, std::abs(phi))) {
      const double target =
          increment < std::abs(phi - phi_done) ? phi_done + std::copysign(increment, phi - phi_done)
                                               : phi;
      const std::vector<Eigen::Vector2d> u_checkpoint = u;
      if (equilibrate(target)) {
        phi_done = target;
        increment *= 2.0;
      } else {
        u = u_checkpoint;
        if (++shrinks > opt.max_increment_shrinks)
          throw SolverError("quasi-static: load step " + std::to_string(step + 1) +
                            " failed to converge after increment halving");
        increment *= 0.5;
      }
    }

    Snapshot snap;
    snap.time_index = static_cast<int>(step + 1);
    snap.displacements = u;
    internal_forces(mesh, mat, u, f);
    snap.reactions = group_reactions(mesh, f);
    out.push_back(std::move(snap));
  }
  return out;
}

}  // namespace elastid
