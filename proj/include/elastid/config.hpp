#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <string>
#include <vector>

#include "elastid/gibbs.hpp"
#include "elastid/materials.hpp"
#include "elastid/mesh.hpp"
#include "json.hpp"

namespace elastid {

// One run of the pipeline, fully determined by this struct plus nothing else.
// Defaults reproduce the reference benchmark setup; every field can be
// overridden from the JSON config file or the command line.
struct RunConfig {
  // data source: a benchmark material generates synthetic data; a dataset
  // directory short-circuits generation.
  std::string material = "NeoHookean";
  std::string dataset_dir;

  // specimen and mesh
  double side = 1.0;
  double hole_radius = 0.25;
  int target_nodes = 1441;
  double fiber_angle_deg = 30.0;

  // loading program
  bool dynamic = false;
  int n_snapshots = 5;
  double phi_increment = 0.1;  // quasi-static load step
  double phi_rate = 0.1;       // dynamic loading rate
  double dt = 2e-4;
  long total_steps = 50000;
  double density = 1.0;

  // measurement noise
  double sigma_u = 0.0;
  bool denoise = false;

  // discovery
  std::vector<int> suppressed_features;  // 1-based feature indices
  int n_free = 100;
  double lambda_r = 10.0;
  HyperParams hyper;
  ChainConfig chains;

  // bookkeeping
  std::string out_dir = "out";
  std::uint64_t seed = 0;

  void validate() const {
    if (material.empty() && dataset_dir.empty())
      throw ConfigError("config: need a material or a dataset directory");
    if (side <= 0.0 || hole_radius < 0.0 || hole_radius >= side)
      throw ConfigError("config: invalid specimen geometry");
    if (target_nodes < 10) throw ConfigError("config: target_nodes too small");
    if (n_snapshots < 1) throw ConfigError("config: need at least one snapshot");
    if (phi_increment <= 0.0 || phi_rate <= 0.0) throw ConfigError("config: loading must advance");
    if (dt <= 0.0 || total_steps < 10) throw ConfigError("config: invalid time stepping");
    if (density <= 0.0) throw ConfigError("config: density must be positive");
    if (sigma_u < 0.0) throw ConfigError("config: sigma_u must be non-negative");
    for (int f : suppressed_features)
      if (f < 1 || f > FeatureLibrary::n_features)
        throw ConfigError("config: suppressed feature index " + std::to_string(f) +
                          " outside 1.." + std::to_string(FeatureLibrary::n_features));
    if (n_free < 1) throw ConfigError("config: n_free must be positive");
    if (lambda_r <= 0.0) throw ConfigError("config: lambda_r must be positive");
    hyper.validate();
    chains.validate();
  }

  FeatureLibrary feature_library() const {
    FeatureLibrary lib;
    for (int f : suppressed_features) lib.suppressed[f - 1] = true;
    return lib;
  }

  FiberPair fibers() const { return FiberPair::at_angle_deg(fiber_angle_deg); }
};

// Accepts benchmark names in any common spelling ("neo-hookean", "NeoHookean",
// "arruda_boyce", ...) and returns the canonical name.
inline std::string canonical_material_name(const std::string& name) {
  auto squash = [](const std::string& s) {
    std::string out;
    for (char c : s)
      if (std::isalnum(static_cast<unsigned char>(c)))
        out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
  };
  const std::string key = squash(name);
  for (const std::string& canon : benchmark_names())
    if (squash(canon) == key) return canon;
  throw ConfigError("unknown benchmark material '" + name + "'");
}

inline void to_json(nlohmann::json& j, const HyperParams& h) {
  j = {{"a_nu", h.a_nu},       {"b_nu", h.b_nu}, {"a_sigma", h.a_sigma},
       {"b_sigma", h.b_sigma}, {"a_p", h.a_p},   {"b_p", h.b_p}};
}

inline void from_json(const nlohmann::json& j, HyperParams& h) {
  h.a_nu = j.value("a_nu", h.a_nu);
  h.b_nu = j.value("b_nu", h.b_nu);
  h.a_sigma = j.value("a_sigma", h.a_sigma);
  h.b_sigma = j.value("b_sigma", h.b_sigma);
  h.a_p = j.value("a_p", h.a_p);
  h.b_p = j.value("b_p", h.b_p);
}

inline void to_json(nlohmann::json& j, const ChainConfig& c) {
  j = {{"n_burn", c.n_burn}, {"n_g", c.n_g}, {"n_chains", c.n_chains}};
}

inline void from_json(const nlohmann::json& j, ChainConfig& c) {
  c.n_burn = j.value("n_burn", c.n_burn);
  c.n_g = j.value("n_g", c.n_g);
  c.n_chains = j.value("n_chains", c.n_chains);
}

inline void to_json(nlohmann::json& j, const RunConfig& c) {
  j = {{"material", c.material},
       {"dataset_dir", c.dataset_dir},
       {"side", c.side},
       {"hole_radius", c.hole_radius},
       {"target_nodes", c.target_nodes},
       {"fiber_angle_deg", c.fiber_angle_deg},
       {"dynamic", c.dynamic},
       {"n_snapshots", c.n_snapshots},
       {"phi_increment", c.phi_increment},
       {"phi_rate", c.phi_rate},
       {"dt", c.dt},
       {"total_steps", c.total_steps},
       {"density", c.density},
       {"sigma_u", c.sigma_u},
       {"denoise", c.denoise},
       {"suppressed_features", c.suppressed_features},
       {"n_free", c.n_free},
       {"lambda_r", c.lambda_r},
       {"hyper", c.hyper},
       {"chains", c.chains},
       {"out_dir", c.out_dir},
       {"seed", c.seed}};
}

inline void from_json(const nlohmann::json& j, RunConfig& c) {
  static const std::vector<std::string> known = {
      "material",     "dataset_dir",   "side",        "hole_radius",
      "target_nodes", "fiber_angle_deg", "dynamic",   "n_snapshots",
      "phi_increment", "phi_rate",     "dt",          "total_steps",
      "density",      "sigma_u",       "denoise",     "suppressed_features",
      "n_free",       "lambda_r",      "hyper",       "chains",
      "out_dir",      "seed"};
  for (const auto& [key, value] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw ConfigError("config: unknown key '" + key + "'");
  c.material = j.value("material", c.material);
  c.dataset_dir = j.value("dataset_dir", c.dataset_dir);
  c.side = j.value("side", c.side);
  c.hole_radius = j.value("hole_radius", c.hole_radius);
  c.target_nodes = j.value("target_nodes", c.target_nodes);
  c.fiber_angle_deg = j.value("fiber_angle_deg", c.fiber_angle_deg);
  c.dynamic = j.value("dynamic", c.dynamic);
  c.n_snapshots = j.value("n_snapshots", c.n_snapshots);
  c.phi_increment = j.value("phi_increment", c.phi_increment);
  c.phi_rate = j.value("phi_rate", c.phi_rate);
  c.dt = j.value("dt", c.dt);
  c.total_steps = j.value("total_steps", c.total_steps);
  c.density = j.value("density", c.density);
  c.sigma_u = j.value("sigma_u", c.sigma_u);
  c.denoise = j.value("denoise", c.denoise);
  c.suppressed_features = j.value("suppressed_features", c.suppressed_features);
  c.n_free = j.value("n_free", c.n_free);
  c.lambda_r = j.value("lambda_r", c.lambda_r);
  if (j.contains("hyper")) j.at("hyper").get_to(c.hyper);
  if (j.contains("chains")) j.at("chains").get_to(c.chains);
  c.out_dir = j.value("out_dir", c.out_dir);
  c.seed = j.value("seed", c.seed);
  if (!c.material.empty()) c.material = canonical_material_name(c.material);
}

inline RunConfig load_config(const std::string& path) {
  return load_json(path).get<RunConfig>();
}

}  // namespace elastid
