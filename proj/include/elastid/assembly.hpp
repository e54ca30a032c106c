#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "elastid/deformation.hpp"
#include "elastid/errors.hpp"
#include "elastid/features.hpp"
#include "elastid/fem.hpp"
#include "elastid/mesh.hpp"
#include "elastid/rng.hpp"
#include "elastid/snapshot.hpp"

namespace elastid {

struct RowTag {
  enum class Kind { FreeDof, ReactionGroup };
  int snapshot;  // position in the assembled snapshot sequence
  Kind kind;
  int id;  // global DOF index or reaction-group index
};

// The physics-constrained regression system b = A theta + eps: momentum
// balance at sampled free DOFs plus reaction balance at the measured groups,
// stacked over snapshots. Columns are features; entries carry force units.
struct LinearSystem {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  std::vector<RowTag> row_tags;

  int rows() const { return static_cast<int>(A.rows()); }
  int cols() const { return static_cast<int>(A.cols()); }
};

struct SubsampleSpec {
  int n_free = 100;
  std::uint64_t rng_seed = 0;
};

struct FreeRows {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  std::vector<int> dofs;  // sampled global DOF per row
};

struct ReactionRows {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
};

namespace detail {

// DOF x feature matrix of internal nodal forces per unit coefficient:
// column k assembles the one-point-quadrature integral of dQ_k/dF : grad N.
// Suppressed features keep identically zero columns.
inline Eigen::MatrixXd feature_forces(const Mesh& mesh, const Snapshot& snap,
                                      const FeatureLibrary& lib,
                                      const std::optional<FiberPair>& fibers) {
  if (static_cast<int>(snap.displacements.size()) != mesh.node_count())
    throw ConfigError("feature_forces: snapshot node count mismatch");
  Eigen::MatrixXd Ff = Eigen::MatrixXd::Zero(mesh.dof_count(), FeatureLibrary::n_features);
  for (int e = 0; e < mesh.element_count(); ++e) {
    const Eigen::Matrix3d F = deformation_gradient(mesh, snap, e);
    const Eigen::Matrix2d F2 = F.topLeftCorner<2, 2>();
    const auto dQ = gradient_inplane(lib, F2, fibers);
    const auto& el = mesh.elements[e];
    const auto& g = mesh.shape_gradients[e];
    for (int a = 0; a < 3; ++a) {
      const Eigen::Vector2d grad(g(a, 0), g(a, 1));
      for (int k = 0; k < FeatureLibrary::n_features; ++k) {
        const Eigen::Vector2d contrib = mesh.areas[e] * (dQ[k] * grad);
        Ff(dof_of(el[a], 0), k) += contrib.x();
        Ff(dof_of(el[a], 1), k) += contrib.y();
      }
    }
  }
  return Ff;
}

// Lumped inertial force per DOF; zero when the snapshot has no accelerations
// (quasi-static data).
inline Eigen::VectorXd inertial_forces(const Mesh& mesh, const Snapshot& snap, double density) {
  Eigen::VectorXd fm = Eigen::VectorXd::Zero(mesh.dof_count());
  if (!snap.has_accelerations()) return fm;
  if (static_cast<int>(snap.accelerations.size()) != mesh.node_count())
    throw ConfigError("inertial_forces: acceleration node count mismatch");
  const auto mass = lumped_masses(mesh, density);
  for (int n = 0; n < mesh.node_count(); ++n)
    for (int c = 0; c < 2; ++c) fm[dof_of(n, c)] = mass[n] * snap.accelerations[n](c);
  return fm;
}

inline FreeRows free_rows_from(const Eigen::MatrixXd& Ff, const Eigen::VectorXd& fm,
                               std::vector<int> dofs) {
  FreeRows out;
  out.A.resize(static_cast<int>(dofs.size()), Ff.cols());
  out.b.resize(static_cast<int>(dofs.size()));
  for (std::size_t r = 0; r < dofs.size(); ++r) {
    out.A.row(static_cast<int>(r)) = Ff.row(dofs[r]);
    out.b[static_cast<int>(r)] = -fm[dofs[r]];
  }
  out.dofs = std::move(dofs);
  return out;
}

inline ReactionRows reaction_rows_from(const Mesh& mesh, const Eigen::MatrixXd& Ff,
                                       const Eigen::VectorXd& fm, const Snapshot& snap) {
  if (snap.reactions.size() != mesh.dofs.groups.size())
    throw ConfigError("assemble_reaction_rows: reaction count does not match the group count");
  const int n_groups = static_cast<int>(mesh.dofs.groups.size());
  ReactionRows out;
  out.A = Eigen::MatrixXd::Zero(n_groups, Ff.cols());
  out.b.resize(n_groups);
  for (int beta = 0; beta < n_groups; ++beta) {
    const auto& grp = mesh.dofs.groups[beta];
    if (grp.dofs.empty())
      throw ConfigError("assemble_reaction_rows: empty reaction group '" + grp.name + "'");
    double inertia = 0.0;
    for (int d : grp.dofs) {
      out.A.row(beta) += Ff.row(d);
      inertia += fm[d];
    }
    out.b[beta] = snap.reactions[beta] - inertia;
  }
  return out;
}

}  // namespace detail

// Draws n_free distinct free DOFs, independently per snapshot (streams keyed
// by the snapshot's time index), returned in ascending order.
inline std::vector<int> subsample_free_dofs(const Mesh& mesh, const SubsampleSpec& spec,
                                            int time_index) {
  const auto& free = mesh.dofs.free_dofs;
  if (spec.n_free < 0 || static_cast<std::size_t>(spec.n_free) > free.size())
    throw ConfigError("subsample_free_dofs: n_free exceeds the free DOF count");
  std::vector<int> pool = free;
  Rng rng(derive_stream(spec.rng_seed, "subsample", static_cast<std::uint64_t>(time_index)));
  for (int i = 0; i < spec.n_free; ++i) {
    const auto j = i + static_cast<int>(rng.uniform_index(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(spec.n_free);
  std::sort(pool.begin(), pool.end());
  return pool;
}

// Momentum-balance rows at sampled free DOFs. The right-hand side carries the
// negated inertial force for dynamic snapshots (tractions vanish under
// displacement control) and is zero for quasi-static ones.
inline FreeRows assemble_free_rows(const Mesh& mesh, const Snapshot& snap,
                                   const FeatureLibrary& lib, const SubsampleSpec& spec,
                                   const std::optional<FiberPair>& fibers = std::nullopt,
                                   double density = 1.0) {
  const Eigen::MatrixXd Ff = detail::feature_forces(mesh, snap, lib, fibers);
  const Eigen::VectorXd fm = detail::inertial_forces(mesh, snap, density);
  return detail::free_rows_from(Ff, fm, subsample_free_dofs(mesh, spec, snap.time_index));
}

// One row per reaction group: the grouped internal force against the measured
// reaction minus the grouped inertial force.
inline ReactionRows assemble_reaction_rows(const Mesh& mesh, const Snapshot& snap,
                                           const FeatureLibrary& lib,
                                           const std::optional<FiberPair>& fibers = std::nullopt,
                                           double density = 1.0) {
  const Eigen::MatrixXd Ff = detail::feature_forces(mesh, snap, lib, fibers);
  const Eigen::VectorXd fm = detail::inertial_forces(mesh, snap, density);
  return detail::reaction_rows_from(mesh, Ff, fm, snap);
}

// Stacks all free blocks in snapshot order, then all reaction blocks scaled
// by lambda_r (both sides of the equation, so the weighting is part of the
// likelihood, not a post-hoc rescale).
inline LinearSystem concatenate(const std::vector<FreeRows>& free_blocks,
                                const std::vector<ReactionRows>& reaction_blocks,
                                double lambda_r) {
  if (free_blocks.size() != reaction_blocks.size())
    throw ConfigError("concatenate: free and reaction block counts differ");
  if (free_blocks.empty()) throw ConfigError("concatenate: no snapshots");
  const auto n_t = static_cast<int>(free_blocks.size());
  const auto n_free = static_cast<int>(free_blocks.front().A.rows());
  const auto n_beta = static_cast<int>(reaction_blocks.front().A.rows());
  const auto cols = free_blocks.front().A.cols();
  for (const auto& blk : free_blocks)
    if (blk.A.rows() != n_free || blk.A.cols() != cols)
      throw ConfigError("concatenate: free block shape mismatch");
  for (const auto& blk : reaction_blocks)
    if (blk.A.rows() != n_beta || blk.A.cols() != cols)
      throw ConfigError("concatenate: reaction block shape mismatch");

  LinearSystem sys;
  sys.A.resize(n_t * (n_free + n_beta), cols);
  sys.b.resize(sys.A.rows());
  sys.row_tags.reserve(sys.A.rows());
  int row = 0;
  for (int t = 0; t < n_t; ++t)
    for (int r = 0; r < n_free; ++r, ++row) {
      sys.A.row(row) = free_blocks[t].A.row(r);
      sys.b[row] = free_blocks[t].b[r];
      sys.row_tags.push_back({t, RowTag::Kind::FreeDof, free_blocks[t].dofs[r]});
    }
  for (int t = 0; t < n_t; ++t)
    for (int r = 0; r < n_beta; ++r, ++row) {
      sys.A.row(row) = lambda_r * reaction_blocks[t].A.row(r);
      sys.b[row] = lambda_r * reaction_blocks[t].b[r];
      sys.row_tags.push_back({t, RowTag::Kind::ReactionGroup, r});
    }
  if (!sys.A.allFinite() || !sys.b.allFinite())
    throw NumericalError("concatenate: assembled system contains non-finite entries");
  return sys;
}

// Full pipeline assembly over a snapshot sequence, sharing the per-snapshot
// feature-force matrix between the free and the reaction rows.
inline LinearSystem assemble_system(const Mesh& mesh, const std::vector<Snapshot>& snapshots,
                                    const FeatureLibrary& lib, const SubsampleSpec& spec,
                                    double lambda_r,
                                    const std::optional<FiberPair>& fibers = std::nullopt,
                                    double density = 1.0) {
  std::vector<FreeRows> free_blocks;
  std::vector<ReactionRows> reaction_blocks;
  for (const auto& snap : snapshots) {
    const Eigen::MatrixXd Ff = detail::feature_forces(mesh, snap, lib, fibers);
    const Eigen::VectorXd fm = detail::inertial_forces(mesh, snap, density);
    free_blocks.push_back(
        detail::free_rows_from(Ff, fm, subsample_free_dofs(mesh, spec, snap.time_index)));
    reaction_blocks.push_back(detail::reaction_rows_from(mesh, Ff, fm, snap));
  }
  return concatenate(free_blocks, reaction_blocks, lambda_r);
}

}  // namespace elastid
