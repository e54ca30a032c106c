#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "elastid/errors.hpp"
#include "elastid/mesh.hpp"

namespace elastid {

// Quarter of a square plate with a central hole, meshed by transfinite
// interpolation between the hole arc and the outer boundary. The quarter sits
// in [0, side]^2 with the hole arc around the origin; the two straight inner
// edges (x1 = 0 and x2 = 0) are symmetry planes of the full plate.
//
// DOF program baked into the mesh:
//   - bottom edge (x2 = 0): u2 fixed (symmetry), u1 free
//   - left edge   (x1 = 0): u1 fixed (symmetry), u2 free
//   - outer loaded edges (x1 = side and x2 = side): both components fixed
//   - hole arc and interior: free
// Reaction groups (4): per loaded edge, the normal and the tangential force
// resultants. Corner ownership: a symmetry plane owns its component outright
// (never measured); the shared loaded corner contributes each component to
// the edge for which it is the normal direction.
inline Mesh build_quarter_plate(double side, double hole_radius, int target_nodes) {
  if (!(hole_radius > 0.0) || !(hole_radius < side))
    throw ConfigError("quarter plate: require 0 < hole_radius < side");
  if (target_nodes < 12) throw ConfigError("quarter plate: too few target nodes");

  // Grid resolution: about 1.45 angular points per radial point reproduces
  // near-unit element aspect ratios; the angular count is forced odd so the
  // loaded corner lies exactly on a mesh ray.
  int n_s = std::max(3, static_cast<int>(std::lround(std::sqrt(target_nodes / 1.45))));
  int n_t = std::max(5, static_cast<int>(std::lround(static_cast<double>(target_nodes) / n_s)));
  if (n_t % 2 == 0) n_t += 1;

  const double pi = 3.14159265358979323846;
  Mesh m;
  m.nodes.reserve(static_cast<std::size_t>(n_s) * n_t);
  for (int i = 0; i < n_s; ++i) {
    const double s = static_cast<double>(i) / (n_s - 1);
    for (int j = 0; j < n_t; ++j) {
      const double tau = static_cast<double>(j) / (n_t - 1);
      const Eigen::Vector2d hole(hole_radius * std::cos(tau * pi / 2.0),
                                 hole_radius * std::sin(tau * pi / 2.0));
      // Outer boundary by arc length: right edge first, then the top.
      const Eigen::Vector2d outer = tau <= 0.5 ? Eigen::Vector2d(side, 2.0 * tau * side)
                                               : Eigen::Vector2d((2.0 - 2.0 * tau) * side, side);
      m.nodes.emplace_back((1.0 - s) * hole + s * outer);
    }
  }

  auto id = [n_t](int i, int j) { return i * n_t + j; };
  for (int i = 0; i + 1 < n_s; ++i)
    for (int j = 0; j + 1 < n_t; ++j) {
      m.elements.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      m.elements.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }

  const int corner_j = (n_t - 1) / 2;  // the loaded corner (side, side)
  std::vector<char> fixed(2 * m.nodes.size(), 0);
  ReactionGroup top_x2{"top_x2", {}}, right_x1{"right_x1", {}};
  ReactionGroup top_x1{"top_x1", {}}, right_x2{"right_x2", {}};
  for (int j = 0; j < n_t; ++j) {
    const int n = id(n_s - 1, j);
    fixed[dof_of(n, 0)] = fixed[dof_of(n, 1)] = 1;
    if (j <= corner_j) right_x1.dofs.push_back(dof_of(n, 0));  // normal owns the corner
    if (j >= corner_j) top_x2.dofs.push_back(dof_of(n, 1));
    if (j < corner_j && j > 0) right_x2.dofs.push_back(dof_of(n, 1));
    if (j > corner_j && j < n_t - 1) top_x1.dofs.push_back(dof_of(n, 0));
  }
  for (int i = 0; i < n_s; ++i) {
    fixed[dof_of(id(i, 0), 1)] = 1;          // bottom symmetry: u2 = 0
    fixed[dof_of(id(i, n_t - 1), 0)] = 1;    // left symmetry: u1 = 0
  }
  // The tangential sets exclude the loaded-edge endpoints that sit on a
  // symmetry plane: those components are symmetry constraints, not measured.

  for (int d = 0; d < static_cast<int>(fixed.size()); ++d)
    (fixed[d] ? m.dofs.fixed_dofs : m.dofs.free_dofs).push_back(d);
  m.dofs.groups = {top_x2, right_x1, top_x1, right_x2};
  m.finalize();
  return m;
}

// Uniform right-triangle mesh of [0, side]^2 with the whole boundary fixed
// and two reaction groups (right-edge x1, top-edge x2). Used for homogeneous
// patch tests and small synthetic problems.
inline Mesh build_square_patch(double side, int nodes_per_edge) {
  if (nodes_per_edge < 2) throw ConfigError("square patch: need at least 2 nodes per edge");
  const int n = nodes_per_edge;
  Mesh m;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      m.nodes.emplace_back(side * j / (n - 1.0), side * i / (n - 1.0));
  auto id = [n](int i, int j) { return i * n + j; };
  for (int i = 0; i + 1 < n; ++i)
    for (int j = 0; j + 1 < n; ++j) {
      m.elements.push_back({id(i, j), id(i, j + 1), id(i + 1, j + 1)});
      m.elements.push_back({id(i, j), id(i + 1, j + 1), id(i + 1, j)});
    }
  ReactionGroup right{"right_x1", {}}, top{"top_x2", {}};
  std::vector<char> fixed(2 * m.nodes.size(), 0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == 0 || j == 0 || i == n - 1 || j == n - 1) {
        fixed[dof_of(id(i, j), 0)] = fixed[dof_of(id(i, j), 1)] = 1;
        if (j == n - 1) right.dofs.push_back(dof_of(id(i, j), 0));
        if (i == n - 1) top.dofs.push_back(dof_of(id(i, j), 1));
      }
    }
  for (int d = 0; d < static_cast<int>(fixed.size()); ++d)
    (fixed[d] ? m.dofs.fixed_dofs : m.dofs.free_dofs).push_back(d);
  m.dofs.groups = {right, top};
  m.finalize();
  return m;
}

// Exact area of the meshed quarter-plate region up to boundary faceting.
inline double quarter_plate_area(double side, double hole_radius) {
  return side * side - 3.14159265358979323846 * hole_radius * hole_radius / 4.0;
}

}  // namespace elastid
