#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "elastid/pipeline.hpp"

using namespace elastid;
namespace fs = std::filesystem;

namespace {

RunConfig tiny_config(std::uint64_t seed = 5) {
  RunConfig config;
  config.material = "NeoHookean";
  config.target_nodes = 130;
  config.n_snapshots = 2;
  config.n_free = 20;
  config.chains.n_burn = 30;
  config.chains.n_g = 60;
  config.chains.n_chains = 2;
  config.seed = seed;
  return config;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(ELASTID_BIN) + " " + args + " >cli_stdout.txt 2>&1";
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("run configuration") {
  SECTION("defaults match the reference setup") {
    const RunConfig config;
    CHECK(config.hyper.a_nu == 0.5);
    CHECK(config.hyper.b_nu == 0.5);
    CHECK(config.hyper.a_sigma == 1.0);
    CHECK(config.hyper.b_sigma == 1.0);
    CHECK(config.hyper.a_p == 0.1);
    CHECK(config.hyper.b_p == 5.0);
    CHECK(config.chains.n_burn == 250);
    CHECK(config.chains.n_g == 750);
    CHECK(config.chains.n_chains == 4);
    CHECK(config.n_free == 100);
    CHECK(config.lambda_r == 10.0);
    CHECK(config.target_nodes == 1441);
    CHECK(config.n_snapshots == 5);
    CHECK(config.phi_increment == 0.1);
    CHECK(config.phi_rate == 0.1);
    CHECK(config.dt == 2e-4);
    CHECK(config.total_steps == 50000);
    CHECK(config.density == 1.0);
    CHECK(config.fiber_angle_deg == 30.0);
    CHECK(config.sigma_u == 0.0);
    CHECK_FALSE(config.dynamic);
    CHECK_FALSE(config.denoise);
    CHECK_NOTHROW(config.validate());
  }

  SECTION("json round trip") {
    RunConfig config = tiny_config();
    config.sigma_u = 1e-3;
    config.denoise = true;
    config.suppressed_features = {17, 21};
    config.hyper.b_sigma = 1e-3;
    const nlohmann::json j = config;
    const RunConfig back = j.get<RunConfig>();
    CHECK(back.material == "NeoHookean");
    CHECK(back.sigma_u == 1e-3);
    CHECK(back.denoise);
    CHECK(back.suppressed_features == std::vector<int>{17, 21});
    CHECK(back.hyper.b_sigma == 1e-3);
    CHECK(back.chains.n_g == 60);
    CHECK(back.seed == config.seed);
  }

  SECTION("unknown keys are rejected") {
    const nlohmann::json j = {{"materail", "NeoHookean"}};
    CHECK_THROWS_AS(j.get<RunConfig>(), ConfigError);
  }

  SECTION("material name spellings") {
    CHECK(canonical_material_name("neo-hookean") == "NeoHookean");
    CHECK(canonical_material_name("ARRUDA_BOYCE") == "ArrudaBoyce");
    CHECK(canonical_material_name("ogden1") == "Ogden1");
    CHECK(canonical_material_name("haines wilson") == "HainesWilson");
    CHECK_THROWS_AS(canonical_material_name("mooney"), ConfigError);
  }

  SECTION("validation rejects bad fields") {
    RunConfig config;
    config.sigma_u = -1.0;
    CHECK_THROWS_AS(config.validate(), ConfigError);
    config = RunConfig{};
    config.suppressed_features = {0};
    CHECK_THROWS_AS(config.validate(), ConfigError);
    config.suppressed_features = {27};
    CHECK_THROWS_AS(config.validate(), ConfigError);
    config = RunConfig{};
    config.hole_radius = 1.0;
    CHECK_THROWS_AS(config.validate(), ConfigError);
    config = RunConfig{};
    config.n_free = 0;
    CHECK_THROWS_AS(config.validate(), ConfigError);
  }

  SECTION("suppression mask is one-based") {
    RunConfig config;
    config.suppressed_features = {17};
    const FeatureLibrary lib = config.feature_library();
    CHECK(lib.suppressed[16]);
    int n_suppressed = 0;
    for (bool s : lib.suppressed) n_suppressed += s;
    CHECK(n_suppressed == 1);
  }
}

TEST_CASE("pipeline stages") {
  SECTION("quasi-static generation and dataset round trip") {
    const RunConfig config = tiny_config();
    const Dataset ds = generate_dataset(config);
    REQUIRE(ds.snapshots.size() == 2);
    CHECK_FALSE(ds.snapshots[0].has_accelerations());
    CHECK(ds.snapshots[0].reactions.size() == 4);
    CHECK(ds.manifest["material"] == "NeoHookean");
    CHECK(ds.manifest["theta_true"][0].get<double>() == 0.5);

    const fs::path dir = "cli_dataset_rt";
    fs::remove_all(dir);
    save_dataset(ds, dir.string());
    const Dataset back = load_dataset(dir.string());
    REQUIRE(back.mesh.node_count() == ds.mesh.node_count());
    REQUIRE(back.snapshots.size() == ds.snapshots.size());
    for (std::size_t s = 0; s < ds.snapshots.size(); ++s)
      for (int n = 0; n < ds.mesh.node_count(); ++n)
        CHECK(back.snapshots[s].displacements[n] == ds.snapshots[s].displacements[n]);
    CHECK(back.manifest["seed"] == config.seed);
    fs::remove_all(dir);
  }

  SECTION("dynamic generation carries accelerations") {
    RunConfig config = tiny_config();
    config.dynamic = true;
    config.total_steps = 800;
    config.n_snapshots = 3;
    const Dataset ds = generate_dataset(config);
    REQUIRE(ds.snapshots.size() == 3);
    CHECK(ds.snapshots[0].has_accelerations());
    CHECK(ds.manifest["dynamic"] == true);
  }

  SECTION("discovery is reproducible and honors suppression") {
    RunConfig config = tiny_config(11);
    config.sigma_u = 1e-4;
    const Dataset ds = generate_dataset(config);
    const PosteriorSamples a = discover(config, ds);
    const PosteriorSamples b = discover(config, ds);
    REQUIRE(a.size() == 120);
    REQUIRE(a.size() == b.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
      CHECK(a.states[k].theta == b.states[k].theta);
      CHECK(a.states[k].sigma2 == b.states[k].sigma2);
    }
    RunConfig other = config;
    other.seed = 12;
    const PosteriorSamples c = discover(other, ds);
    bool differs = false;
    for (std::size_t k = 0; k < a.size() && !differs; ++k)
      differs = a.states[k].theta != c.states[k].theta;
    CHECK(differs);

    // Suppressing the volumetric feature (1-based 15) must pin it off.
    RunConfig sup = config;
    sup.suppressed_features = {15};
    const PosteriorSamples d = discover(sup, ds);
    for (const ChainState& st : d.states) {
      CHECK_FALSE(st.z[14]);
      CHECK(st.theta[14] == 0.0);
    }
  }

  SECTION("analysis writes the report with ground truth overlays") {
    const RunConfig config = tiny_config(13);
    const Dataset ds = generate_dataset(config);
    const PosteriorSamples samples = discover(config, ds);
    const fs::path dir = "cli_report_stage";
    fs::remove_all(dir);
    const auto written = analyze(config, ds, samples, dir.string());
    CHECK(written.size() == 10);  // 6 csv + 3 svg + json
    const auto report = nlohmann::json::parse(read_file(dir / "report.json"));
    CHECK(report["envelopes"].size() == 6);
    for (const auto& env : report["envelopes"]) CHECK(env["has_true"] == true);
    CHECK(report["manifest"]["config"]["material"] == "NeoHookean");
    fs::remove_all(dir);
  }

  SECTION("variance study structure") {
    RunConfig config = tiny_config(17);
    config.chains.n_burn = 20;
    config.chains.n_g = 40;
    const auto rows = sigma2_study(config, {0.0, 1e-3});
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].sigma_u == 0.0);
    CHECK_FALSE(rows[0].denoised);
    CHECK(rows[1].denoised);
    CHECK(rows[2].sigma_u == 1e-3);
    for (const auto& row : rows) {
      CHECK(row.p2_5 <= row.mean);
      CHECK(row.mean <= row.p97_5);
      CHECK(row.p2_5 > 0.0);
    }
    const fs::path dir = "cli_sigma2";
    fs::remove_all(dir);
    save_sigma2_study(rows, dir.string());
    const std::string csv = read_file(dir / "sigma2_study.csv");
    CHECK(csv.rfind("sigma_u,denoised,mean,p2_5,p97_5\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
    fs::remove_all(dir);
  }
}

TEST_CASE("command line driver") {
  SECTION("help and usage errors") {
    CHECK(run_cli("--help") == 0);
    CHECK(run_cli("generate --help") == 0);
    CHECK(run_cli("generate --material not-a-material") == 2);
    CHECK(run_cli("generate --no-such-flag") == 2);
    CHECK(run_cli("") == 2);  // a subcommand is required
    CHECK(run_cli("discover --data nowhere_at_all") == 2);
  }

  SECTION("generate, discover, analyze round trip") {
    const fs::path dir = "cli_e2e";
    fs::remove_all(dir);
    const std::string common =
        " --target-nodes 130 --n-free 20 --n-burn 30 --n-g 60 --n-chains 2 --seed 9 --out " +
        dir.string();
    REQUIRE(run_cli("generate --material gent-thomas --noise 1e-4" + common) == 0);
    CHECK(fs::exists(dir / "manifest.json"));
    REQUIRE(run_cli("discover --denoise" + common) == 0);
    CHECK(fs::exists(dir / "samples.csv"));
    CHECK(fs::exists(dir / "activity.json"));
    REQUIRE(run_cli("analyze --data " + dir.string() + " --out " + (dir / "report").string()) ==
            0);
    CHECK(fs::exists(dir / "report" / "report.json"));
    CHECK(fs::exists(dir / "report" / "fig_envelopes.svg"));

    // Same seed, byte-identical posterior file.
    const std::string first = read_file(dir / "samples.csv");
    REQUIRE(run_cli("discover --denoise" + common) == 0);
    CHECK(read_file(dir / "samples.csv") == first);
    fs::remove_all(dir);
    fs::remove("cli_stdout.txt");
  }
}
