#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "elastid/paths.hpp"
#include "elastid/report.hpp"

using namespace elastid;
namespace fs = std::filesystem;

namespace {

ChainState state_from_theta(const std::array<double, 26>& theta) {
  ChainState st;
  for (int i = 0; i < 26; ++i) {
    st.theta[i] = theta[i];
    st.z[i] = theta[i] != 0.0;
  }
  return st;
}

void push_state(PosteriorSamples& samples, const ChainState& st, int chain = 0, int sweep = 0) {
  samples.states.push_back(st);
  samples.chain_ids.push_back(chain);
  samples.sweep_ids.push_back(sweep);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const std::optional<FiberPair> kFibers{FiberPair::at_angle_deg(30.0)};

}  // namespace

TEST_CASE("deformation paths") {
  SECTION("identity at the origin and known endpoints") {
    for (PathKind kind : all_paths()) {
      const auto path = DeformationPath::make(kind);
      CHECK((path.deformation(0.0) - Eigen::Matrix2d::Identity()).norm() == 0.0);
      REQUIRE(path.gamma_grid.size() == 101);
      CHECK(path.gamma_grid.front() == 0.0);
      CHECK(path.gamma_grid.back() == 1.0);
      CHECK(path.gamma_grid[50] == Catch::Approx(0.5).margin(1e-15));
      for (double g : path.gamma_grid) CHECK(path.deformation(g).determinant() > 0.0);
    }
    Eigen::Matrix2d expect;
    expect << 2.0, 0.0, 0.0, 1.0;
    CHECK((DeformationPath::make(PathKind::UT).deformation(1.0) - expect).norm() < 1e-15);
    expect << 0.5, 0.0, 0.0, 1.0;
    CHECK((DeformationPath::make(PathKind::UC).deformation(1.0) - expect).norm() < 1e-15);
    expect << 2.0, 0.0, 0.0, 2.0;
    CHECK((DeformationPath::make(PathKind::BT).deformation(1.0) - expect).norm() < 1e-15);
    expect << 0.5, 0.0, 0.0, 0.5;
    CHECK((DeformationPath::make(PathKind::BC).deformation(1.0) - expect).norm() < 1e-15);
    expect << 1.0, 1.0, 0.0, 1.0;
    CHECK((DeformationPath::make(PathKind::SS).deformation(1.0) - expect).norm() < 1e-15);
    expect << 2.0, 0.0, 0.0, 0.5;
    CHECK((DeformationPath::make(PathKind::PS).deformation(1.0) - expect).norm() < 1e-15);
  }

  SECTION("name round trip and validation") {
    for (PathKind kind : all_paths()) CHECK(path_from_name(path_name(kind)) == kind);
    CHECK_THROWS_AS(path_from_name("XT"), ConfigError);
    CHECK_THROWS_AS(DeformationPath::make(PathKind::UT, 1), ConfigError);
  }
}

TEST_CASE("average activity") {
  SECTION("constant chain collapses to one mode") {
    PosteriorSamples samples;
    std::array<double, 26> theta{};
    theta[0] = 0.5;
    for (int k = 0; k < 7; ++k) push_state(samples, state_from_theta(theta));
    const auto report = average_activity(samples);
    CHECK(report.z_avg[0] == 1.0);
    for (int i = 1; i < 26; ++i) CHECK(report.z_avg[i] == 0.0);
    REQUIRE(report.modes.size() == 1);
    CHECK(report.modes[0].frequency == 1.0);
    CHECK(report.modes[0].count == 7);
    CHECK(report.modes[0].theta_mean[0] == 0.5);
  }

  SECTION("alternating states split evenly") {
    PosteriorSamples samples;
    std::array<double, 26> ta{}, tb{};
    ta[0] = 0.4;
    ta[14] = 1.5;
    tb[2] = 0.9;
    tb[14] = 1.6;
    for (int k = 0; k < 10; ++k)
      push_state(samples, state_from_theta(k % 2 ? tb : ta));
    const auto report = average_activity(samples);
    CHECK(report.z_avg[0] == 0.5);
    CHECK(report.z_avg[2] == 0.5);
    CHECK(report.z_avg[14] == 1.0);
    CHECK(report.z_avg[5] == 0.0);
    REQUIRE(report.modes.size() == 2);
    CHECK(report.modes[0].frequency == 0.5);
    CHECK(report.modes[1].frequency == 0.5);
    double freq_sum = 0.0;
    for (const auto& mode : report.modes) freq_sum += mode.frequency;
    CHECK(freq_sum == Catch::Approx(1.0).margin(1e-15));
  }

  SECTION("no samples is an error") {
    CHECK_THROWS_AS(average_activity(PosteriorSamples{}), ConfigError);
  }
}

TEST_CASE("energy envelopes") {
  const FeatureLibrary lib;

  SECTION("single true-coefficient state reproduces the exact curve") {
    const auto mat = benchmark_material("NeoHookean");
    PosteriorSamples samples;
    push_state(samples, state_from_theta(mat.theta_true));
    const auto path = DeformationPath::make(PathKind::UT);
    const auto env = energy_envelope(samples, lib, path, kFibers, mat);
    REQUIRE(env.true_w.size() == env.gamma.size());
    for (std::size_t g = 0; g < env.gamma.size(); ++g) {
      CHECK(env.mean[g] == Catch::Approx(env.true_w[g]).margin(1e-10));
      CHECK(env.p2_5[g] == env.mean[g]);
      CHECK(env.p97_5[g] == env.mean[g]);
    }
    CHECK(env.mean[0] == 0.0);
    // Hand evaluation at gamma = 1: F = diag(2, 1, 1).
    const double j = 2.0, i1 = 6.0;
    const double w_hand = 0.5 * (i1 * std::pow(j, -2.0 / 3.0) - 3.0) + 1.5 * (j - 1.0) * (j - 1.0);
    CHECK(env.mean.back() == Catch::Approx(w_hand).epsilon(1e-12));
  }

  SECTION("constant feature offsets are gauged away") {
    const auto mat = benchmark_material("Ogden1");
    PosteriorSamples samples;
    push_state(samples, state_from_theta(mat.theta_true));
    const auto env =
        energy_envelope(samples, lib, DeformationPath::make(PathKind::UT), kFibers, mat);
    CHECK(env.mean[0] == 0.0);
    CHECK(env.true_w[0] == 0.0);
    for (std::size_t g = 0; g < env.gamma.size(); ++g)
      CHECK(env.mean[g] == Catch::Approx(env.true_w[g]).margin(1e-10));
    CHECK(env.mean.back() > 0.1);  // tension stores energy
  }

  SECTION("anisotropic closed form feeds the true curve") {
    const auto mat = benchmark_material("Holzapfel");
    PosteriorSamples samples;
    push_state(samples, state_from_theta(std::array<double, 26>{}));
    samples.states[0].z[0] = true;  // placeholder activity
    const auto path = DeformationPath::make(PathKind::BT, 3);
    const auto env = energy_envelope(samples, lib, path, mat.fibers, mat);
    // Hand evaluation at gamma = 0.5: F = diag(1.5, 1.5, 1).
    const double j = 2.25, i1 = 5.5;
    const double i1t = i1 * std::pow(j, -2.0 / 3.0);
    const double j4t = 2.25 * std::pow(j, -2.0 / 3.0);
    const double k1 = 0.9, k2 = 0.8;
    const double w_hand = 0.5 * (i1t - 3.0) + (j - 1.0) * (j - 1.0) +
                          k1 / (2.0 * k2) * (2.0 * std::exp(k2 * (j4t - 1.0) * (j4t - 1.0)) - 2.0);
    CHECK(env.true_w[1] == Catch::Approx(w_hand).epsilon(1e-12));
  }

  SECTION("percentiles interpolate the sorted draws") {
    const auto mat = benchmark_material("NeoHookean");
    PosteriorSamples samples;
    for (double scale : {0.8, 1.0, 1.3}) {
      auto theta = mat.theta_true;
      for (double& v : theta) v *= scale;
      push_state(samples, state_from_theta(theta));
    }
    const auto path = DeformationPath::make(PathKind::BT, 11);
    const auto env = energy_envelope(samples, lib, path, kFibers);
    CHECK(env.true_w.empty());
    for (std::size_t g = 1; g < env.gamma.size(); ++g) {
      const double w1 = env.mean[g] * 3.0 / 3.1;  // unit-scale draw: mean of {.8,1,1.3}*w
      const double w0 = 0.8 * w1, w2 = 1.3 * w1;
      CHECK(env.p2_5[g] == Catch::Approx(w0 + 0.05 * (w1 - w0)).epsilon(1e-12));
      CHECK(env.p97_5[g] == Catch::Approx(w1 + 0.95 * (w2 - w1)).epsilon(1e-12));
    }
  }

  SECTION("band brackets the mean for a diffuse cloud") {
    const auto mat = benchmark_material("GentThomas");
    Rng rng(40);
    PosteriorSamples samples;
    for (int k = 0; k < 200; ++k) {
      auto theta = mat.theta_true;
      for (double& v : theta)
        if (v != 0.0) v *= 1.0 + 0.1 * rng.normal();
      push_state(samples, state_from_theta(theta));
    }
    for (PathKind kind : all_paths()) {
      const auto env =
          energy_envelope(samples, lib, DeformationPath::make(kind, 21), kFibers, mat);
      for (std::size_t g = 0; g < env.gamma.size(); ++g) {
        CHECK(env.p2_5[g] <= env.mean[g]);
        CHECK(env.mean[g] <= env.p97_5[g]);
      }
    }
  }

  SECTION("input validation") {
    PosteriorSamples samples;
    CHECK_THROWS_AS(
        energy_envelope(samples, lib, DeformationPath::make(PathKind::UT), kFibers),
        ConfigError);
    push_state(samples, ChainState{});
    DeformationPath empty;
    CHECK_THROWS_AS(energy_envelope(samples, lib, empty, kFibers), ConfigError);
  }
}

TEST_CASE("report artifacts") {
  const FeatureLibrary lib;
  const auto mat = benchmark_material("NeoHookean");
  Rng rng(41);
  PosteriorSamples samples;
  for (int k = 0; k < 40; ++k) {
    auto theta = mat.theta_true;
    for (double& v : theta)
      if (v != 0.0) v *= 1.0 + 0.05 * rng.normal();
    if (k % 4 == 0) theta[1] = 0.02;  // second mode
    push_state(samples, state_from_theta(theta), k % 2, k / 2);
  }
  const auto activity = average_activity(samples);
  std::vector<EnergyEnvelope> envelopes;
  envelopes.push_back(
      energy_envelope(samples, lib, DeformationPath::make(PathKind::UT, 21), kFibers, mat));
  envelopes.push_back(
      energy_envelope(samples, lib, DeformationPath::make(PathKind::SS, 21), kFibers));
  nlohmann::json manifest{{"material", "NeoHookean"}, {"seed", 11}};

  SECTION("file inventory and content") {
    const fs::path dir = "report_out_a";
    fs::remove_all(dir);
    const auto written = emit_report(samples, activity, envelopes, manifest, dir.string());
    CHECK(written.size() == 6);  // 2 csv + 3 svg + json
    for (const auto& name : written) CHECK(fs::exists(dir / name));

    const std::string csv = read_file(dir / "envelope_UT.csv");
    CHECK(csv.rfind("gamma,mean,p2_5,p97_5,true\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 22);
    const std::string csv_ss = read_file(dir / "envelope_SS.csv");
    CHECK(csv_ss.find(",nan\n") != std::string::npos);

    const auto report = nlohmann::json::parse(read_file(dir / "report.json"));
    CHECK(report["schema_version"] == 1);
    CHECK(report["manifest"]["material"] == "NeoHookean");
    CHECK(report["n_states"] == 40);
    REQUIRE(report["activity"]["z_avg"].size() == 26);
    CHECK(report["activity"]["z_avg"][0].get<double>() == 1.0);
    CHECK(report["activity"]["z_avg"][1].get<double>() == Catch::Approx(0.25));
    double freq_sum = 0.0;
    for (const auto& mode : report["activity"]["modes"])
      freq_sum += mode["frequency"].get<double>();
    CHECK(freq_sum == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(report["envelopes"].size() == 2);
    CHECK(report["envelopes"][0]["path"] == "UT");
    CHECK(report["envelopes"][0]["has_true"] == true);
    CHECK(report["envelopes"][1]["has_true"] == false);
    CHECK(report["envelopes"][1]["mean_band_width"].get<double>() >= 0.0);

    const std::string violin = read_file(dir / "fig_violin.svg");
    CHECK(violin.rfind("<svg", 0) == 0);
    CHECK(violin.find("</svg>") != std::string::npos);
    const std::string grid = read_file(dir / "fig_envelopes.svg");
    CHECK(grid.find(">UT<") != std::string::npos);
    CHECK(grid.find(">SS<") != std::string::npos);
    fs::remove_all(dir);
  }

  SECTION("byte-identical on re-run") {
    const fs::path da = "report_out_b", db = "report_out_c";
    fs::remove_all(da);
    fs::remove_all(db);
    const auto wa = emit_report(samples, activity, envelopes, manifest, da.string());
    const auto wb = emit_report(samples, activity, envelopes, manifest, db.string());
    REQUIRE(wa == wb);
    for (const auto& name : wa) CHECK(read_file(da / name) == read_file(db / name));
    fs::remove_all(da);
    fs::remove_all(db);
  }

  SECTION("empty inputs leave no partial files") {
    const fs::path dir = "report_out_d";
    fs::remove_all(dir);
    CHECK_THROWS_AS(emit_report(PosteriorSamples{}, activity, envelopes, manifest, dir.string()),
                    ConfigError);
    CHECK_THROWS_AS(emit_report(samples, ActivityReport{}, envelopes, manifest, dir.string()),
                    ConfigError);
    CHECK_FALSE(fs::exists(dir));
  }
}
