#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "elastid/errors.hpp"

namespace elastid {

// Canonical homogeneous deformation paths used for model comparison:
// uniaxial tension/compression, biaxial tension/compression, simple shear,
// pure shear. All are parameterized by gamma in [0, 1] with F(0) = I.
enum class PathKind { UT, UC, BT, BC, SS, PS };

inline const std::array<PathKind, 6>& all_paths() {
  static const std::array<PathKind, 6> kinds = {PathKind::UT, PathKind::UC, PathKind::BT,
                                                PathKind::BC, PathKind::SS, PathKind::PS};
  return kinds;
}

inline std::string path_name(PathKind kind) {
  switch (kind) {
    case PathKind::UT: return "UT";
    case PathKind::UC: return "UC";
    case PathKind::BT: return "BT";
    case PathKind::BC: return "BC";
    case PathKind::SS: return "SS";
    case PathKind::PS: return "PS";
  }
  throw ConfigError("path_name: invalid kind");
}

inline PathKind path_from_name(const std::string& name) {
  for (PathKind kind : all_paths())
    if (path_name(kind) == name) return kind;
  throw ConfigError("path_from_name: unknown path '" + name + "'");
}

struct DeformationPath {
  PathKind kind = PathKind::UT;
  std::vector<double> gamma_grid;

  static DeformationPath make(PathKind kind, int n_points = 101) {
    if (n_points < 2) throw ConfigError("DeformationPath: need at least 2 grid points");
    DeformationPath path;
    path.kind = kind;
    path.gamma_grid.resize(n_points);
    for (int i = 0; i < n_points; ++i)
      path.gamma_grid[i] = static_cast<double>(i) / (n_points - 1);
    return path;
  }

  // In-plane deformation gradient at gamma; the out-of-plane stretch is 1.
  Eigen::Matrix2d deformation(double gamma) const {
    Eigen::Matrix2d F = Eigen::Matrix2d::Identity();
    const double s = 1.0 + gamma;
    switch (kind) {
      case PathKind::UT: F(0, 0) = s; break;
      case PathKind::UC: F(0, 0) = 1.0 / s; break;
      case PathKind::BT: F(0, 0) = F(1, 1) = s; break;
      case PathKind::BC: F(0, 0) = F(1, 1) = 1.0 / s; break;
      case PathKind::SS: F(0, 1) = gamma; break;
      case PathKind::PS:
        F(0, 0) = s;
        F(1, 1) = 1.0 / s;
        break;
    }
    if (F.determinant() <= 0.0)
      throw KinematicsError("DeformationPath: non-positive det F at gamma " +
                            std::to_string(gamma));
    return F;
  }
};

}  // namespace elastid
