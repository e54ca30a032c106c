#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <vector>

#include "elastid/errors.hpp"
#include "elastid/mesh.hpp"
#include "elastid/rng.hpp"
#include "elastid/snapshot.hpp"

namespace elastid {

struct NoiseModel {
  double sigma_u = 0.0;   // absolute displacement noise floor
  bool denoise = false;   // smooth displacements before assembly
  std::uint64_t rng_seed = 0;
};

// Adds i.i.d. Gaussian noise to every displacement component of every node
// and snapshot. Accelerations and reactions are left untouched (reactions are
// global load-cell data; acceleration handling is the caller's choice).
inline std::vector<Snapshot> add_noise(const std::vector<Snapshot>& snapshots, const NoiseModel& nm) {
  if (nm.sigma_u < 0.0) throw ConfigError("add_noise: sigma_u must be nonnegative");
  std::vector<Snapshot> out = snapshots;
  if (nm.sigma_u == 0.0) return out;
  Rng rng(derive_stream(nm.rng_seed, "displacement-noise", 0));
  for (auto& snap : out)
    for (auto& u : snap.displacements)
      for (int c = 0; c < 2; ++c) u(c) += nm.sigma_u * rng.normal();
  return out;
}

namespace detail {

inline double mean_edge_length(const Mesh& mesh) {
  double total = 0.0;
  long count = 0;
  for (const auto& el : mesh.elements)
    for (int a = 0; a < 3; ++a) {
      total += (mesh.nodes[el[a]] - mesh.nodes[el[(a + 1) % 3]]).norm();
      ++count;
    }
  if (count == 0) throw ConfigError("mean_edge_length: empty mesh");
  return total / count;
}

}  // namespace detail

// Spatial smoothing of the measured displacement fields: squared-exponential
// kernel ridge regression with an affine tail, fitted over nodal positions
// per component per snapshot. The affine part is reproduced exactly and the
// ridge is kept small, so the smoother is near-interpolatory on smooth
// fields: the attenuation it inflicts on a solution field stays well below
// the smallest noise floor it is asked to remove, at the price of a milder
// noise reduction. Nodes carrying any constrained DOF keep their stored
// values bit-exactly (prescribed boundary data are not measurements). The
// kernel factorization is shared across all components and snapshots.
inline std::vector<Snapshot> denoise(const std::vector<Snapshot>& snapshots, const Mesh& mesh,
                                     double length_scale_factor = 2.0, double ridge_factor = 1e-8) {
  const int n = mesh.node_count();
  if (n == 0) throw ConfigError("denoise: empty mesh");
  const double ell = length_scale_factor * detail::mean_edge_length(mesh);
  const double ridge = ridge_factor * n;

  Eigen::MatrixXd K(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) {
      const double d2 = (mesh.nodes[i] - mesh.nodes[j]).squaredNorm();
      K(i, j) = K(j, i) = std::exp(-d2 / (2.0 * ell * ell));
    }
  K.diagonal().array() += ridge;
  const Eigen::LLT<Eigen::MatrixXd> llt(K);
  if (llt.info() != Eigen::Success)
    throw NumericalError("denoise: kernel system not positive definite; increase the ridge parameter");

  Eigen::MatrixXd P(n, 3);
  for (int i = 0; i < n; ++i) P.row(i) << 1.0, mesh.nodes[i].x(), mesh.nodes[i].y();
  const Eigen::MatrixXd MP = llt.solve(P);
  const Eigen::Matrix3d G = P.transpose() * MP;
  const Eigen::FullPivLU<Eigen::Matrix3d> glu(G);

  std::vector<char> is_boundary(n, 0);
  for (int d : mesh.dofs.fixed_dofs) is_boundary[d / 2] = 1;

  std::vector<Snapshot> out = snapshots;
  Eigen::VectorXd y(n);
  for (auto& snap : out) {
    if (static_cast<int>(snap.displacements.size()) != n)
      throw ConfigError("denoise: snapshot node count mismatch");
    for (int c = 0; c < 2; ++c) {
      for (int i = 0; i < n; ++i) y[i] = snap.displacements[i](c);
      // Universal-kriging form: fit = y - ridge * (K + ridge I)^-1 (y - P c).
      // Degenerate geometry (collinear nodes) drops the affine tail.
      Eigen::Vector3d coeff = Eigen::Vector3d::Zero();
      if (glu.isInvertible()) coeff = glu.solve(MP.transpose() * y);
      const Eigen::VectorXd smooth = y - ridge * llt.solve(y - P * coeff);
      for (int i = 0; i < n; ++i)
        if (!is_boundary[i]) snap.displacements[i](c) = smooth[i];
    }
  }
  return out;
}

}  // namespace elastid
