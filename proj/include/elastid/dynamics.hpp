#pragma once

#include <Eigen/Eigenvalues>
#include <cmath>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "elastid/fem.hpp"
#include "elastid/snapshot.hpp"

namespace elastid {

// Second-order central difference on three consecutive frames.
inline std::vector<Eigen::Vector2d> compute_accelerations(const std::vector<Eigen::Vector2d>& prev,
                                                          const std::vector<Eigen::Vector2d>& cur,
                                                          const std::vector<Eigen::Vector2d>& next,
                                                          double dt) {
  if (prev.size() != cur.size() || next.size() != cur.size() || cur.empty())
    throw ConfigError("compute_accelerations: need three equally sized frames");
  if (!(dt > 0.0)) throw ConfigError("compute_accelerations: dt must be positive");
  std::vector<Eigen::Vector2d> acc(cur.size());
  for (std::size_t n = 0; n < cur.size(); ++n) acc[n] = (next[n] - 2.0 * cur[n] + prev[n]) / (dt * dt);
  return acc;
}

struct DynamicAudit {
  double external_work = 0.0;
  double kinetic_energy = 0.0;
  double strain_energy_change = 0.0;
  double cfl_estimate = 0.0;  // stable-step estimate; 0 if not computed
};

namespace detail {

// Stable-step estimate from the small-strain wave speed and the smallest
// element height: dt_crit ~ h_min / c with c^2 = (max tangent eigenvalue)/rho.
inline double cfl_step_estimate(const Mesh& mesh, const BenchmarkMaterial& mat, double density) {
  const StressTangent st = material_stress_tangent(mat, Eigen::Matrix2d::Identity());
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(0.5 * (st.A + st.A.transpose()));
  const double stiff = es.eigenvalues().cwiseAbs().maxCoeff();
  if (!(stiff > 0.0)) return 0.0;
  const double c = std::sqrt(stiff / density);
  double h_min = std::numeric_limits<double>::max();
  for (int e = 0; e < mesh.element_count(); ++e) {
    const auto& el = mesh.elements[e];
    double longest = 0.0;
    for (int a = 0; a < 3; ++a)
      longest = std::max(longest, (mesh.nodes[el[a]] - mesh.nodes[el[(a + 1) % 3]]).norm());
    h_min = std::min(h_min, 2.0 * mesh.areas[e] / longest);
  }
  return h_min / c;
}

}  // namespace detail

// Explicit central-difference integration with lumped mass. Constrained DOFs
// follow the affine boundary program at constant rate from t = 0; free DOFs
// start at rest. Snapshots carry displacements, reconstructed accelerations
// and group reactions (internal force plus inertia over the group DOFs).
inline std::vector<Snapshot> solve_dynamic(const Mesh& mesh, const BenchmarkMaterial& mat,
                                           const LoadingProgram& program, DynamicAudit* audit = nullptr) {
  if (program.mode != LoadingProgram::Mode::Dynamic)
    throw ConfigError("solve_dynamic: program mode is not dynamic");
  const double dt = program.dt;
  const long L = program.total_steps;
  const std::vector<double> mass = lumped_masses(mesh, program.density);
  const std::size_t nn = mesh.nodes.size();

  const double dt_crit = detail::cfl_step_estimate(mesh, mat, program.density);
  if (dt_crit > 0.0 && dt > dt_crit)
    std::cerr << "warning: explicit step " << dt << " exceeds stability estimate " << dt_crit << "\n";

  // Constrained-DOF ramp rates; free DOFs are marked by NaN-free zero rate
  // plus the free mask.
  std::vector<char> is_fixed(2 * nn, 0);
  for (int d : mesh.dofs.fixed_dofs) is_fixed[d] = 1;
  std::vector<Eigen::Vector2d> rate(nn, Eigen::Vector2d::Zero());
  for (int d : mesh.dofs.fixed_dofs)
    rate[d / 2](d % 2) = prescribed_displacement(mesh.nodes[d / 2], d % 2, program.phi_rate);

  for (double ma : mass)
    if (!(ma > 0.0)) throw ConfigError("solve_dynamic: node with zero lumped mass (unused node?)");

  // Backward start u(-dt) = -dt v0: constrained DOFs move at the ramp rate
  // from t = 0, free DOFs at the program's initial velocity.
  std::vector<Eigen::Vector2d> u_prev(nn), u_cur(nn, Eigen::Vector2d::Zero()), u_next(nn), f;
  for (std::size_t a = 0; a < nn; ++a)
    for (int c = 0; c < 2; ++c)
      u_prev[a](c) = -dt * (is_fixed[dof_of(static_cast<int>(a), c)] ? rate[a](c)
                                                                     : program.initial_velocity(c));

  const std::vector<long> snap_steps = dynamic_snapshot_steps(program);
  if (!snap_steps.empty() && (snap_steps.front() < 1 || snap_steps.back() + 1 >= L))
    throw ConfigError("solve_dynamic: snapshot steps need interior neighbors (total_steps too small)");
  std::map<long, std::vector<Eigen::Vector2d>> frames;  // step -> stored displacement field
  auto wants_frame = [&](long n) {
    for (long s : snap_steps)
      if (n >= s - 1 && n <= s + 1) return true;
    return false;
  };

  std::map<long, Snapshot> partial;           // reactions filled in-loop
  std::vector<double> f_fixed_prev;           // for trapezoidal external work
  double w_ext = 0.0;
  const double se0 = total_strain_energy(mesh, mat, u_cur);
  double ke_last = 0.0, se_last = 0.0, w_ext_last = 0.0;

  for (long n = 0; n < L; ++n) {
    internal_forces(mesh, mat, u_cur, f);

    // External work on the driven boundary, trapezoidal in the step.
    std::vector<double> f_fixed;
    f_fixed.reserve(mesh.dofs.fixed_dofs.size());
    for (int d : mesh.dofs.fixed_dofs) f_fixed.push_back(f[d / 2](d % 2));
    if (n > 0) {
      double wstep = 0.0;
      for (std::size_t i = 0; i < f_fixed.size(); ++i) {
        const int d = mesh.dofs.fixed_dofs[i];
        wstep += 0.5 * (f_fixed_prev[i] + f_fixed[i]) * rate[d / 2](d % 2) * dt;
      }
      w_ext += wstep;
    }
    f_fixed_prev.swap(f_fixed);

    for (std::size_t a = 0; a < nn; ++a) {
      const double inv_m = 1.0 / mass[a];
      for (int c = 0; c < 2; ++c) {
        const int d = dof_of(static_cast<int>(a), c);
        if (is_fixed[d])
          u_next[a](c) = rate[a](c) * dt * (n + 1);
        else
          u_next[a](c) = 2.0 * u_cur[a](c) - u_prev[a](c) - dt * dt * inv_m * f[a](c);
      }
    }

    if (wants_frame(n)) frames[n] = u_cur;
    for (long s : snap_steps)
      if (n == s) {
        Snapshot snap;
        snap.time_index = static_cast<int>(s);
        snap.reactions = group_reactions(mesh, f);  // inertia added after reconstruction
        partial[s] = std::move(snap);
        double ke = 0.0;
        for (std::size_t a = 0; a < nn; ++a)
          ke += 0.5 * mass[a] * ((u_next[a] - u_prev[a]) / (2.0 * dt)).squaredNorm();
        ke_last = ke;
        se_last = total_strain_energy(mesh, mat, u_cur) - se0;
        w_ext_last = w_ext;
      }

    if (n % 200 == 0 || n + 1 == L) {
      double peak = 0.0;
      for (std::size_t a = 0; a < nn; ++a) peak = std::max(peak, u_cur[a].cwiseAbs().maxCoeff());
      if (!std::isfinite(peak) || peak > 1e6)
        throw SolverError("dynamic: instability at step " + std::to_string(n));
    }
    u_prev.swap(u_cur);
    u_cur.swap(u_next);
  }

  std::vector<Snapshot> out;
  for (long s : snap_steps) {
    Snapshot snap = std::move(partial.at(s));
    snap.displacements = frames.at(s);
    snap.accelerations = compute_accelerations(frames.at(s - 1), frames.at(s), frames.at(s + 1), dt);
    for (std::size_t g = 0; g < mesh.dofs.groups.size(); ++g)
      for (int d : mesh.dofs.groups[g].dofs)
        snap.reactions[g] += mass[d / 2] * snap.accelerations[d / 2](d % 2);
    out.push_back(std::move(snap));
  }

  if (audit) {
    audit->external_work = w_ext_last;  // accumulated up to the last snapshot
    audit->kinetic_energy = ke_last;
    audit->strain_energy_change = se_last;
    audit->cfl_estimate = dt_crit;
  }
  return out;
}

}  // namespace elastid
