// Pipeline driver: dataset generation, model discovery, post-processing, and
// the benchmark suite, all reproducible from (config file, seed) alone.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "elastid/pipeline.hpp"

namespace fs = std::filesystem;
using namespace elastid;

namespace {

struct CliOverrides {
  std::string config_path;
  std::optional<std::string> material;
  std::optional<double> sigma_u;
  std::optional<bool> dynamic;
  std::optional<bool> denoise;
  std::vector<int> suppress;
  std::optional<int> target_nodes;
  std::optional<int> n_free;
  std::optional<double> lambda_r;
  std::optional<int> n_burn, n_g, n_chains;
  std::optional<long> total_steps;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
};

void add_common_options(CLI::App* cmd, CliOverrides& ov) {
  cmd->add_option("--config", ov.config_path, "JSON run configuration file");
  cmd->add_option("--seed", ov.seed, "master seed (every random stream derives from it)");
  cmd->add_option("--out", ov.out, "output directory");
}

void add_model_options(CLI::App* cmd, CliOverrides& ov) {
  cmd->add_option("--material", ov.material, "benchmark material name");
  cmd->add_option("--noise", ov.sigma_u, "displacement noise level sigma_u");
  cmd->add_flag("--dynamic,!--static", ov.dynamic, "dynamic (explicit) data generation");
  cmd->add_flag("--denoise,!--no-denoise", ov.denoise, "smooth displacements before assembly");
  cmd->add_option("--suppress", ov.suppress, "feature indices (1-based) to exclude")
      ->delimiter(',');
  cmd->add_option("--target-nodes", ov.target_nodes, "approximate mesh size");
  cmd->add_option("--n-free", ov.n_free, "interior equations kept per snapshot");
  cmd->add_option("--lambda-r", ov.lambda_r, "reaction row weight");
  cmd->add_option("--n-burn", ov.n_burn, "burn-in sweeps per chain");
  cmd->add_option("--n-g", ov.n_g, "recorded sweeps per chain");
  cmd->add_option("--n-chains", ov.n_chains, "number of chains");
  cmd->add_option("--total-steps", ov.total_steps, "explicit integration steps (dynamic)");
}

RunConfig build_config(const CliOverrides& ov) {
  RunConfig config;
  if (!ov.config_path.empty()) config = load_config(ov.config_path);
  if (ov.material) config.material = canonical_material_name(*ov.material);
  if (ov.sigma_u) config.sigma_u = *ov.sigma_u;
  if (ov.dynamic) config.dynamic = *ov.dynamic;
  if (ov.denoise) config.denoise = *ov.denoise;
  if (!ov.suppress.empty()) config.suppressed_features = ov.suppress;
  if (ov.target_nodes) config.target_nodes = *ov.target_nodes;
  if (ov.n_free) config.n_free = *ov.n_free;
  if (ov.lambda_r) config.lambda_r = *ov.lambda_r;
  if (ov.n_burn) config.chains.n_burn = *ov.n_burn;
  if (ov.n_g) config.chains.n_g = *ov.n_g;
  if (ov.n_chains) config.chains.n_chains = *ov.n_chains;
  if (ov.total_steps) config.total_steps = *ov.total_steps;
  if (ov.seed) config.seed = *ov.seed;
  if (ov.out) config.out_dir = *ov.out;
  config.validate();
  return config;
}

int cmd_generate(const CliOverrides& ov) {
  const RunConfig config = build_config(ov);
  const Dataset ds = generate_dataset(config);
  save_dataset(ds, config.out_dir);
  save_json((fs::path(config.out_dir) / "config.json").string(), nlohmann::json(config));
  std::printf("generated %zu snapshot(s) for %s (%s) in %s\n", ds.snapshots.size(),
              config.material.c_str(), config.dynamic ? "dynamic" : "quasi-static",
              config.out_dir.c_str());
  return 0;
}

int cmd_discover(const CliOverrides& ov, const std::string& data_dir) {
  RunConfig config = build_config(ov);
  const std::string dir = data_dir.empty() ? config.out_dir : data_dir;
  const Dataset ds = load_dataset(dir);
  const PosteriorSamples samples = discover(config, ds);
  const std::string out = ov.out ? *ov.out : dir;
  fs::create_directories(out);
  save_samples_csv(samples, (fs::path(out) / "samples.csv").string());
  const ActivityReport activity = average_activity(samples);
  save_json((fs::path(out) / "activity.json").string(), activity_json(activity));
  std::printf("discovered: %zu posterior states -> %s\n", samples.size(), out.c_str());
  int shown = 0;
  for (int i = 0; i < FeatureLibrary::n_features && shown < 8; ++i)
    if (activity.z_avg[i] > 0.1) {
      std::printf("  feature %-2d  z_avg %.3f\n", i + 1, activity.z_avg[i]);
      ++shown;
    }
  return 0;
}

int cmd_analyze(const CliOverrides& ov, const std::string& data_dir,
                const std::string& samples_path, bool sigma2) {
  RunConfig config = build_config(ov);
  if (sigma2) {
    const auto rows = sigma2_study(config, {0.0, 1e-4, 1e-3});
    const std::string out = ov.out ? *ov.out : config.out_dir;
    save_sigma2_study(rows, out);
    std::printf("%-10s %-9s %-12s %-12s %-12s\n", "sigma_u", "denoised", "mean", "p2.5",
                "p97.5");
    for (const auto& row : rows)
      std::printf("%-10g %-9s %-12.4e %-12.4e %-12.4e\n", row.sigma_u,
                  row.denoised ? "yes" : "no", row.mean, row.p2_5, row.p97_5);
    return 0;
  }
  const std::string dir = data_dir.empty() ? config.out_dir : data_dir;
  const Dataset ds = load_dataset(dir);
  if (ds.manifest.is_null() || !ds.manifest.contains("material"))
    std::fprintf(stderr, "warning: no manifest ground truth; true curves omitted\n");
  const std::string samples_file =
      samples_path.empty() ? (fs::path(dir) / "samples.csv").string() : samples_path;
  const PosteriorSamples samples = load_samples_csv(samples_file);
  const std::string out = ov.out ? *ov.out : (fs::path(dir) / "report").string();
  const auto written = analyze(config, ds, samples, out);
  std::printf("report: %zu file(s) in %s\n", written.size(), out.c_str());
  return 0;
}

struct SuiteEntry {
  std::string material;
  double sigma_u;
  bool dynamic;
};

int cmd_benchmark(const CliOverrides& ov, bool quick) {
  const RunConfig base = build_config(ov);
  std::vector<SuiteEntry> suite;
  if (quick) {
    suite = {{"NeoHookean", 1e-4, false}, {"Ogden1", 1e-4, false}};
  } else {
    for (const std::string& name : benchmark_names()) {
      suite.push_back({name, 1e-4, false});
      suite.push_back({name, 1e-3, false});
    }
    suite.push_back({"HainesWilson", 1e-4, true});
    suite.push_back({"Ogden1", 1e-4, true});
    suite.push_back({"Holzapfel", 1e-4, true});
  }

  std::printf("%-14s %-8s %-10s %-12s %-10s %s\n", "material", "noise", "mode", "containment",
              "aniso", "result");
  int failures = 0;
  for (const SuiteEntry& entry : suite) {
    RunConfig config = base;
    config.material = entry.material;
    config.sigma_u = entry.sigma_u;
    config.dynamic = entry.dynamic;
    config.denoise = entry.sigma_u > 0.0;
    const std::string tag =
        entry.material + (entry.dynamic ? "_dyn" : "") + "_" + detail::fmt(entry.sigma_u);
    const std::string run_dir = (fs::path(base.out_dir) / tag).string();

    const Dataset ds = generate_dataset(config);
    save_dataset(ds, run_dir);
    const PosteriorSamples samples = discover(config, ds);
    save_samples_csv(samples, (fs::path(run_dir) / "samples.csv").string());
    analyze(config, ds, samples, (fs::path(run_dir) / "report").string());

    const BenchmarkMaterial truth = benchmark_material(entry.material);
    const double contain = envelope_containment(samples, config.feature_library(),
                                                config.fibers(), truth);
    const ActivityReport activity = average_activity(samples);
    double aniso = 0.0;
    for (int i = 20; i < FeatureLibrary::n_features; ++i)
      aniso = std::max(aniso, activity.z_avg[i]);
    const bool aniso_ok = truth.fibers ? aniso > 0.5 : aniso < 0.1;
    const bool pass = contain >= 0.9 && aniso_ok;
    failures += pass ? 0 : 1;
    std::printf("%-14s %-8g %-10s %-12.3f %-10.3f %s\n", entry.material.c_str(),
                entry.sigma_u, entry.dynamic ? "dynamic" : "static", contain, aniso,
                pass ? "pass" : "FAIL");
    std::fflush(stdout);
  }
  std::printf("%d/%zu runs passed\n", static_cast<int>(suite.size()) - failures,
              suite.size());
  return failures == 0 ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian discovery of hyperelastic constitutive models from full-field data"};
  app.require_subcommand(1);
  CliOverrides ov;
  std::string data_dir, samples_path;
  bool quick = false, sigma2 = false;

  CLI::App* gen = app.add_subcommand("generate", "simulate a benchmark dataset");
  add_common_options(gen, ov);
  add_model_options(gen, ov);

  CLI::App* dis = app.add_subcommand("discover", "sample the model posterior from a dataset");
  add_common_options(dis, ov);
  add_model_options(dis, ov);
  dis->add_option("--data", data_dir, "dataset directory (defaults to --out)");

  CLI::App* ana = app.add_subcommand("analyze", "post-process posterior samples");
  add_common_options(ana, ov);
  add_model_options(ana, ov);
  ana->add_option("--data", data_dir, "dataset directory (defaults to --out)");
  ana->add_option("--samples", samples_path, "posterior sample file");
  ana->add_flag("--sigma2-study", sigma2, "variance study across noise levels");

  CLI::App* bench = app.add_subcommand("benchmark", "run the full reproduction suite");
  add_common_options(bench, ov);
  add_model_options(bench, ov);
  bench->add_flag("--quick", quick, "two-material smoke subset");

  try {
    app.parse(argc, argv);
    if (gen->parsed()) return cmd_generate(ov);
    if (dis->parsed()) return cmd_discover(ov, data_dir);
    if (ana->parsed()) return cmd_analyze(ov, data_dir, samples_path, sigma2);
    if (bench->parsed()) return cmd_benchmark(ov, quick);
    return 2;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\nrun with --help for usage\n", e.what());
    return 2;
  } catch (const IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 2;
  } catch (const Error& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "unexpected failure: %s\n", e.what());
    return 3;
  }
}
