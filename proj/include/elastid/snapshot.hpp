#pragma once

#include <Eigen/Dense>
#include <vector>

#include "elastid/errors.hpp"
#include "json.hpp"

namespace elastid {

// One measurement frame: nodal displacements, optional nodal accelerations
// (dynamic data), and the measured reaction resultants per group.
struct Snapshot {
  int time_index = 0;
  std::vector<Eigen::Vector2d> displacements;
  std::vector<Eigen::Vector2d> accelerations;  // empty for quasi-static data
  std::vector<double> reactions;

  bool has_accelerations() const { return !accelerations.empty(); }

  void validate(int node_count, int n_groups) const {
    if (static_cast<int>(displacements.size()) != node_count)
      throw ConfigError("snapshot: displacement count != node count");
    if (!accelerations.empty() && static_cast<int>(accelerations.size()) != node_count)
      throw ConfigError("snapshot: accelerations must cover all nodes or be absent");
    if (static_cast<int>(reactions.size()) != n_groups)
      throw ConfigError("snapshot: reaction count != group count");
  }
};

inline void to_json(nlohmann::json& j, const Snapshot& s) {
  auto u = nlohmann::json::array();
  for (const auto& p : s.displacements) u.push_back({p.x(), p.y()});
  j = {{"time_index", s.time_index}, {"displacements", u}, {"reactions", s.reactions}};
  if (!s.accelerations.empty()) {
    auto a = nlohmann::json::array();
    for (const auto& p : s.accelerations) a.push_back({p.x(), p.y()});
    j["accelerations"] = a;
  }
}

inline void from_json(const nlohmann::json& j, Snapshot& s) {
  s = Snapshot{};
  s.time_index = j.at("time_index").get<int>();
  for (const auto& p : j.at("displacements"))
    s.displacements.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
  if (j.contains("accelerations"))
    for (const auto& p : j.at("accelerations"))
      s.accelerations.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
  s.reactions = j.at("reactions").get<std::vector<double>>();
}

}  // namespace elastid
