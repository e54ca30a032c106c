#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "elastid/errors.hpp"
#include "json.hpp"

namespace elastid {

// DOF convention throughout: dof = 2 * node_index + component.
inline int dof_of(int node, int comp) { return 2 * node + comp; }

struct ReactionGroup {
  std::string name;
  std::vector<int> dofs;
};

// Partition of the DOFs: free + fixed; a subset of the fixed DOFs is organized
// into disjoint labeled reaction groups (measured force resultants).
struct DofSets {
  std::vector<int> free_dofs;
  std::vector<int> fixed_dofs;
  std::vector<ReactionGroup> groups;
};

struct Mesh {
  std::vector<Eigen::Vector2d> nodes;
  std::vector<std::array<int, 3>> elements;
  DofSets dofs;

  // Derived per-element geometry, filled by finalize().
  std::vector<Eigen::Matrix<double, 3, 2>> shape_gradients;
  std::vector<double> areas;

  int node_count() const { return static_cast<int>(nodes.size()); }
  int element_count() const { return static_cast<int>(elements.size()); }
  int dof_count() const { return 2 * node_count(); }

  double total_area() const {
    double a = 0.0;
    for (double ae : areas) a += ae;
    return a;
  }

  // Computes shape-function gradients and areas, and validates the mesh
  // invariants (positive areas, consistent DOF partition, disjoint groups).
  void finalize() {
    const int ne = element_count();
    shape_gradients.assign(ne, Eigen::Matrix<double, 3, 2>::Zero());
    areas.assign(ne, 0.0);
    for (int e = 0; e < ne; ++e) {
      const auto& el = elements[e];
      for (int a : el)
        if (a < 0 || a >= node_count()) throw KinematicsError("mesh: element node index out of range");
      const Eigen::Vector2d& p1 = nodes[el[0]];
      const Eigen::Vector2d& p2 = nodes[el[1]];
      const Eigen::Vector2d& p3 = nodes[el[2]];
      const double twoA = (p2.x() - p1.x()) * (p3.y() - p1.y()) - (p3.x() - p1.x()) * (p2.y() - p1.y());
      if (!(twoA > 0.0))
        throw KinematicsError("mesh: element " + std::to_string(e) + " has non-positive area");
      areas[e] = 0.5 * twoA;
      auto& g = shape_gradients[e];
      g(0, 0) = (p2.y() - p3.y()) / twoA;
      g(0, 1) = (p3.x() - p2.x()) / twoA;
      g(1, 0) = (p3.y() - p1.y()) / twoA;
      g(1, 1) = (p1.x() - p3.x()) / twoA;
      g(2, 0) = (p1.y() - p2.y()) / twoA;
      g(2, 1) = (p2.x() - p1.x()) / twoA;
    }
    validate_dofs();
  }

  void validate_dofs() const {
    const int nd = dof_count();
    std::vector<int> seen(nd, 0);
    for (int d : dofs.free_dofs) {
      if (d < 0 || d >= nd) throw KinematicsError("mesh: free DOF out of range");
      seen[d] += 1;
    }
    for (int d : dofs.fixed_dofs) {
      if (d < 0 || d >= nd) throw KinematicsError("mesh: fixed DOF out of range");
      seen[d] += 2;
    }
    for (int d = 0; d < nd; ++d)
      if (seen[d] != 1 && seen[d] != 2)
        throw KinematicsError("mesh: DOF " + std::to_string(d) + " not in exactly one of free/fixed");
    std::vector<int> grouped(nd, 0);
    for (const auto& g : dofs.groups) {
      if (g.dofs.empty()) throw ConfigError("mesh: empty reaction group '" + g.name + "'");
      for (int d : g.dofs) {
        if (seen[d] != 2) throw KinematicsError("mesh: reaction group DOF not fixed");
        if (++grouped[d] > 1) throw KinematicsError("mesh: DOF in more than one reaction group");
      }
    }
  }
};

inline void to_json(nlohmann::json& j, const Mesh& m) {
  auto nodes = nlohmann::json::array();
  for (const auto& p : m.nodes) nodes.push_back({p.x(), p.y()});
  auto elements = nlohmann::json::array();
  for (const auto& e : m.elements) elements.push_back({e[0], e[1], e[2]});
  auto groups = nlohmann::json::array();
  for (const auto& g : m.dofs.groups) groups.push_back({{"name", g.name}, {"dofs", g.dofs}});
  j = {{"nodes", nodes},
       {"elements", elements},
       {"dof_sets", {{"fixed", m.dofs.fixed_dofs}, {"reaction_groups", groups}}}};
}

inline void from_json(const nlohmann::json& j, Mesh& m) {
  m = Mesh{};
  for (const auto& p : j.at("nodes")) m.nodes.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
  for (const auto& e : j.at("elements"))
    m.elements.push_back({e.at(0).get<int>(), e.at(1).get<int>(), e.at(2).get<int>()});
  const auto& ds = j.at("dof_sets");
  m.dofs.fixed_dofs = ds.at("fixed").get<std::vector<int>>();
  for (const auto& g : ds.at("reaction_groups"))
    m.dofs.groups.push_back({g.at("name").get<std::string>(), g.at("dofs").get<std::vector<int>>()});
  std::vector<char> fixed(2 * m.nodes.size(), 0);
  for (int d : m.dofs.fixed_dofs) fixed.at(d) = 1;
  for (int d = 0; d < static_cast<int>(fixed.size()); ++d)
    if (!fixed[d]) m.dofs.free_dofs.push_back(d);
  m.finalize();
}

inline void save_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << j.dump(2) << "\n";
  if (!out) throw IoError("write failed: " + path);
}

inline nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw IoError("malformed JSON in " + path + ": " + e.what());
  }
  return j;
}

}  // namespace elastid
