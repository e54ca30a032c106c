#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "elastid/dynamics.hpp"
#include "elastid/materials.hpp"
#include "elastid/noise.hpp"
#include "elastid/plate.hpp"
#include "elastid/quasistatic.hpp"
#include "elastid/rng.hpp"
#include "support/oracles.hpp"

using namespace elastid;

namespace {

Eigen::Matrix3d embed(const Eigen::Matrix2d& F2) {
  Eigen::Matrix3d F = Eigen::Matrix3d::Identity();
  F.topLeftCorner<2, 2>() = F2;
  return F;
}

Eigen::Matrix2d random_plane_f(Rng& rng, double spread = 0.25) {
  for (;;) {
    Eigen::Matrix2d F2;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        F2(i, j) = (i == j ? 1.0 : 0.0) + rng.uniform(-spread, spread);
    if (F2.determinant() > 0.3) return F2;
  }
}

// Exponential fiber energy evaluated in 50-digit arithmetic through the
// feature transcription (its entries 0, 14, 20, 23 are exactly the pieces of
// the closed-form model).
double holzapfel_energy_oracle(const Eigen::Matrix3d& F) {
  oracle::FeatureParams p;
  p.has_fibers = true;
  const auto fp = FiberPair::at_angle_deg(30.0);
  p.a1 = fp.a1;
  p.a2 = fp.a2;
  const auto q = oracle::mp_features(F, p);
  const oracle::mp k1(0.9), k2(0.8);
  const oracle::mp w =
      oracle::mp(0.5) * q[0] + q[14] + k1 / (2 * k2) * (exp(k2 * q[20]) + exp(k2 * q[23]) - 2);
  return w.convert_to<double>();
}

}  // namespace

TEST_CASE("benchmark material factory") {
  for (const auto& name : benchmark_names()) CHECK_NOTHROW(benchmark_material(name));
  CHECK_THROWS_AS(benchmark_material("MooneyRivlin"), ConfigError);

  const auto nh = benchmark_material("NeoHookean");
  CHECK(nh.theta_true[0] == 0.5);
  CHECK(nh.theta_true[14] == 1.5);
  CHECK_FALSE(nh.closed_form);
  CHECK_FALSE(nh.fibers.has_value());

  const auto hw = benchmark_material("HainesWilson");
  CHECK(hw.theta_true[0] == 0.5);
  CHECK(hw.theta_true[1] == 1.0);
  CHECK(hw.theta_true[3] == 0.7);
  CHECK(hw.theta_true[2] == 0.2);
  CHECK(hw.theta_true[14] == 1.5);

  const auto og3 = benchmark_material("Ogden3");
  CHECK(og3.theta_true[17] == 0.4);
  CHECK(og3.theta_true[18] == 0.0012);
  CHECK(og3.theta_true[19] == 0.1);

  const auto hz = benchmark_material("Holzapfel");
  CHECK(hz.closed_form);
  CHECK(hz.k1 == 0.9);
  CHECK(hz.k2 == 0.8);
  REQUIRE(hz.fibers.has_value());
  CHECK(hz.fibers->a1.y() == Catch::Approx(0.5).epsilon(1e-15));

  for (const auto& name : benchmark_names()) {
    const auto m = benchmark_material(name);
    for (double t : m.theta_true) CHECK(t >= 0.0);
  }
}

TEST_CASE("material energies at reference and against oracles") {
  CHECK(material_energy_at(benchmark_material("NeoHookean"), Eigen::Matrix3d::Identity()) == 0.0);
  CHECK(material_energy_at(benchmark_material("ArrudaBoyce"), Eigen::Matrix3d::Identity()) == 0.0);
  CHECK(material_energy_at(benchmark_material("Holzapfel"), Eigen::Matrix3d::Identity()) ==
        Catch::Approx(0.0).margin(1e-14));
  // Ogden entries carry their reference value 6/alpha into the energy gauge.
  CHECK(material_energy_at(benchmark_material("Ogden1"), Eigen::Matrix3d::Identity()) ==
        Catch::Approx(0.65 * 6.0 / 1.3).epsilon(1e-14));

  Rng rng(3);
  for (int rep = 0; rep < 10; ++rep) {
    const Eigen::Matrix3d F = embed(random_plane_f(rng));
    CHECK(material_energy_at(benchmark_material("Holzapfel"), F) ==
          Catch::Approx(holzapfel_energy_oracle(F)).epsilon(1e-12));
  }

  // The library-backed energies are linear in theta over the feature values.
  const auto ih = benchmark_material("Isihara");
  const Eigen::Matrix3d F = embed(random_plane_f(rng));
  const auto q = FeatureLibrary{}.evaluate_invariants(invariants_3x3(to_mat3(F), FiberPair::at_angle_deg(30.0)));
  const double expected = 0.5 * q[0] + q[1] + q[2] + 1.5 * q[14];
  CHECK(material_energy_at(ih, F) == Catch::Approx(expected).epsilon(1e-13));
}

TEST_CASE("material stress and tangent") {
  const auto nh = benchmark_material("NeoHookean");
  Rng rng(5);
  for (int rep = 0; rep < 20; ++rep) {
    const Eigen::Matrix2d F2 = random_plane_f(rng);
    const Eigen::Matrix2d P = material_stress(nh, F2);
    const Eigen::Matrix3d Po = oracle::neo_hooke_stress(embed(F2));
    CHECK((P - Po.topLeftCorner<2, 2>()).cwiseAbs().maxCoeff() <
          1e-12 * std::max(1.0, Po.cwiseAbs().maxCoeff()));
  }

  // Tangent: symmetric (energy Hessian) and consistent with stress differences.
  for (const auto& name : {std::string("NeoHookean"), std::string("Ogden3"), std::string("Holzapfel")}) {
    const auto mat = benchmark_material(name);
    const Eigen::Matrix2d F2 = random_plane_f(rng);
    const StressTangent st = material_stress_tangent(mat, F2);
    CHECK((st.A - st.A.transpose()).cwiseAbs().maxCoeff() < 1e-10 * std::max(1.0, st.A.cwiseAbs().maxCoeff()));
    CHECK((st.P - material_stress(mat, F2)).cwiseAbs().maxCoeff() < 1e-13 * std::max(1.0, st.P.cwiseAbs().maxCoeff()));

    const double h = 1e-6;
    Eigen::Matrix4d fd;
    for (int s = 0; s < 4; ++s) {
      Eigen::Matrix2d Fp = F2, Fm = F2;
      Fp(s / 2, s % 2) += h;
      Fm(s / 2, s % 2) -= h;
      const Eigen::Matrix2d dP = (material_stress(mat, Fp) - material_stress(mat, Fm)) / (2.0 * h);
      for (int r = 0; r < 4; ++r) fd(r, s) = dP(r / 2, r % 2);
    }
    CHECK((st.A - fd).cwiseAbs().maxCoeff() < 1e-5 * std::max(1.0, fd.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("quarter plate meshing") {
  const Mesh m = build_quarter_plate(1.0, 0.25, 1441);
  CHECK(std::abs(m.node_count() - 1441) <= 144);
  CHECK(m.element_count() > 0);
  CHECK(m.total_area() == Catch::Approx(quarter_plate_area(1.0, 0.25)).epsilon(0.01));

  REQUIRE(m.dofs.groups.size() == 4);
  for (const auto& g : m.dofs.groups) CHECK_FALSE(g.dofs.empty());

  // Normal groups span a whole loaded edge including its corners; the
  // tangential groups exclude the symmetry-plane endpoints.
  const auto& top_x2 = m.dofs.groups[0];
  const auto& right_x1 = m.dofs.groups[1];
  CHECK(top_x2.name == "top_x2");
  CHECK(right_x1.name == "right_x1");
  CHECK(top_x2.dofs.size() == right_x1.dofs.size());
  CHECK(m.dofs.groups[2].dofs.size() == top_x2.dofs.size() - 2);
  for (int d : top_x2.dofs) {
    CHECK(d % 2 == 1);
    CHECK(m.nodes[d / 2].y() == Catch::Approx(1.0).margin(1e-12));
  }
  for (int d : right_x1.dofs) {
    CHECK(d % 2 == 0);
    CHECK(m.nodes[d / 2].x() == Catch::Approx(1.0).margin(1e-12));
  }

  // Symmetry edges: normal component fixed, tangential free (except corners).
  for (int i = 0; i < m.node_count(); ++i) {
    const auto& X = m.nodes[i];
    CHECK(X.x() >= -1e-14);
    CHECK(X.y() >= -1e-14);
    CHECK(X.squaredNorm() >= 0.25 * 0.25 - 1e-12);
  }

  CHECK_THROWS_AS(build_quarter_plate(1.0, 0.0, 100), ConfigError);
  CHECK_THROWS_AS(build_quarter_plate(1.0, 1.5, 100), ConfigError);

  // Coarser and finer targets scale the node count accordingly.
  CHECK(std::abs(build_quarter_plate(1.0, 0.25, 400).node_count() - 400) <= 40);
  CHECK(std::abs(build_quarter_plate(1.0, 0.25, 3000).node_count() - 3000) <= 300);
}

TEST_CASE("homogeneous patch test") {
  const Mesh m = build_square_patch(1.0, 6);
  const auto nh = benchmark_material("NeoHookean");
  LoadingProgram prog = default_quasistatic(2, 0.15);
  const auto snaps = solve_quasistatic(m, nh, prog);
  REQUIRE(snaps.size() == 2);

  for (std::size_t l = 0; l < snaps.size(); ++l) {
    const double phi = prog.phi_steps[l];
    const auto& u = snaps[l].displacements;
    for (int i = 0; i < m.node_count(); ++i) {
      const Eigen::Vector2d exact(0.5 * phi * m.nodes[i].x(), phi * m.nodes[i].y());
      CHECK((u[i] - exact).norm() < 1e-8);
    }
    // Group resultants of a uniform stress state are exact edge integrals.
    Eigen::Matrix2d F2 = Eigen::Matrix2d::Identity();
    F2(0, 0) += 0.5 * phi;
    F2(1, 1) += phi;
    const Eigen::Matrix2d P = material_stress(nh, F2);
    REQUIRE(snaps[l].reactions.size() == 2);
    CHECK(snaps[l].reactions[0] == Catch::Approx(P(0, 0)).margin(1e-8));
    CHECK(snaps[l].reactions[1] == Catch::Approx(P(1, 1)).margin(1e-8));
  }
}

TEST_CASE("zero loading gives the trivial solution") {
  const Mesh m = build_square_patch(1.0, 5);
  LoadingProgram prog;
  prog.mode = LoadingProgram::Mode::QuasiStatic;
  prog.phi_steps = {0.0};
  const auto snaps = solve_quasistatic(m, benchmark_material("NeoHookean"), prog);
  REQUIRE(snaps.size() == 1);
  for (const auto& u : snaps[0].displacements) CHECK(u.norm() == 0.0);
  for (double r : snaps[0].reactions) CHECK(std::abs(r) < 1e-14);
}

TEST_CASE("quarter plate solve: equilibrium of the constrained forces") {
  const Mesh m = build_quarter_plate(1.0, 0.25, 420);
  const auto mat = benchmark_material("Isihara");
  const auto snaps = solve_quasistatic(m, mat, default_quasistatic());
  REQUIRE(snaps.size() == 5);

  // The free residual vanished, so the constrained forces carry all load;
  // their global sum must vanish as well (momentum balance of the quarter).
  std::vector<Eigen::Vector2d> f;
  internal_forces(m, mat, snaps.back().displacements, f);
  Eigen::Vector2d total = Eigen::Vector2d::Zero();
  double scale = 0.0;
  for (const auto& fa : f) {
    total += fa;
    scale += fa.norm();
  }
  CHECK(total.norm() < 1e-9 * std::max(1.0, scale));

  // Tension in both directions: positive normal reactions, increasing in phi.
  for (std::size_t l = 0; l < snaps.size(); ++l) {
    CHECK(snaps[l].reactions[0] > 0.0);
    CHECK(snaps[l].reactions[1] > 0.0);
    if (l > 0) {
      CHECK(snaps[l].reactions[0] > snaps[l - 1].reactions[0]);
      CHECK(snaps[l].reactions[1] > snaps[l - 1].reactions[1]);
    }
  }
}

TEST_CASE("lumped masses partition the total mass") {
  const Mesh m = build_quarter_plate(1.0, 0.25, 420);
  const auto mass = lumped_masses(m, 1.0);
  double total = 0.0;
  for (double v : mass) total += v;
  CHECK(total == Catch::Approx(m.total_area()).margin(1e-10));

  const auto mass2 = lumped_masses(m, 2.5);
  double total2 = 0.0;
  for (double v : mass2) total2 += v;
  CHECK(total2 == Catch::Approx(2.5 * m.total_area()).margin(1e-10));
}

TEST_CASE("acceleration reconstruction") {
  const double dt = 2e-4;
  std::vector<Eigen::Vector2d> prev(3), cur(3), next(3);

  // Constant velocity: zero acceleration.
  for (int n = 0; n < 3; ++n) {
    const Eigen::Vector2d v(0.3 * (n + 1), -0.1);
    prev[n] = v * 0.0;
    cur[n] = v * dt;
    next[n] = v * 2.0 * dt;
  }
  for (const auto& a : compute_accelerations(prev, cur, next, dt)) CHECK(a.norm() < 1e-9);

  // Quadratic history: the difference quotient is exact.
  const Eigen::Vector2d acc(1.7, -0.6);
  for (int n = 0; n < 3; ++n) {
    prev[n] = 0.5 * acc * (1.0 * dt) * (1.0 * dt);
    cur[n] = 0.5 * acc * (2.0 * dt) * (2.0 * dt);
    next[n] = 0.5 * acc * (3.0 * dt) * (3.0 * dt);
  }
  for (const auto& a : compute_accelerations(prev, cur, next, dt))
    CHECK((a - acc).norm() < 1e-8);

  // Sinusoid: second-order accuracy in dt.
  const double omega = 5.0;
  auto sin_err = [&](double step) {
    std::vector<Eigen::Vector2d> p(1), c(1), x(1);
    const double t = 0.4;
    p[0] = {std::sin(omega * (t - step)), 0.0};
    c[0] = {std::sin(omega * t), 0.0};
    x[0] = {std::sin(omega * (t + step)), 0.0};
    const auto a = compute_accelerations(p, c, x, step);
    return std::abs(a[0].x() + omega * omega * std::sin(omega * t));
  };
  CHECK(sin_err(dt) < omega * omega * omega * omega * dt * dt / 10.0);
  // Doubling the step quadruples the error (second order), loosely checked.
  CHECK(sin_err(8.0 * dt) / sin_err(4.0 * dt) == Catch::Approx(4.0).margin(0.5));

  CHECK_THROWS_AS(compute_accelerations(prev, cur, {}, dt), ConfigError);
  CHECK_THROWS_AS(compute_accelerations(prev, cur, next, 0.0), ConfigError);
}

TEST_CASE("free rigid-body motion conserves momentum") {
  Mesh m;
  m.nodes = {{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}};
  m.elements = {{0, 1, 2}, {0, 2, 3}};
  for (int d = 0; d < 8; ++d) m.dofs.free_dofs.push_back(d);
  m.finalize();

  LoadingProgram prog = default_dynamic();
  prog.total_steps = 1000;
  prog.dt = 1e-3;
  prog.initial_velocity = {0.3, -0.2};
  const auto snaps = solve_dynamic(m, benchmark_material("NeoHookean"), prog);
  REQUIRE(snaps.size() == 5);
  for (const auto& snap : snaps) {
    const double t = snap.time_index * prog.dt;
    for (int n = 0; n < 4; ++n) {
      CHECK((snap.displacements[n] - t * prog.initial_velocity).norm() < 1e-8);
      CHECK(snap.accelerations[n].norm() < 1e-8);
    }
    CHECK(snap.reactions.empty());
  }
}

TEST_CASE("dynamic ramp on the plate: energy audit and snapshot shape") {
  const Mesh m = build_quarter_plate(1.0, 0.25, 150);
  LoadingProgram prog = default_dynamic();
  prog.total_steps = 4000;
  const auto mat = benchmark_material("NeoHookean");
  DynamicAudit audit;
  const auto snaps = solve_dynamic(m, mat, prog, &audit);
  REQUIRE(snaps.size() == 5);

  const auto steps = dynamic_snapshot_steps(prog);
  for (std::size_t k = 0; k < snaps.size(); ++k) {
    CHECK(snaps[k].time_index == steps[k]);
    CHECK(snaps[k].has_accelerations());
    CHECK(snaps[k].reactions.size() == 4);
    snaps[k].validate(m.node_count(), 4);
  }
  // Slow ramp: the boundary displacement tracks the rate exactly.
  const auto& last = snaps.back();
  const double t = last.time_index * prog.dt;
  int checked = 0;
  for (int d : m.dofs.fixed_dofs) {
    const double expect = prescribed_displacement(m.nodes[d / 2], d % 2, prog.phi_rate * t);
    CHECK(last.displacements[d / 2](d % 2) == Catch::Approx(expect).margin(1e-12));
    ++checked;
  }
  CHECK(checked > 0);

  CHECK(audit.cfl_estimate > prog.dt);  // the run was stable by construction
  const double stored = audit.kinetic_energy + audit.strain_energy_change;
  CHECK(audit.external_work == Catch::Approx(stored).epsilon(0.02));
}

TEST_CASE("noise injection statistics and determinism") {
  const Mesh m = build_quarter_plate(1.0, 0.25, 1441);
  std::vector<Snapshot> snaps(5);
  for (auto& s : snaps) {
    s.displacements.assign(m.nodes.size(), Eigen::Vector2d(0.25, -0.5));
    s.reactions = {1.0, 2.0, 3.0, 4.0};
  }

  NoiseModel clean{0.0, false, 7};
  const auto same = add_noise(snaps, clean);
  for (std::size_t k = 0; k < snaps.size(); ++k)
    for (std::size_t n = 0; n < snaps[k].displacements.size(); ++n)
      CHECK((same[k].displacements[n] - snaps[k].displacements[n]).norm() == 0.0);

  NoiseModel nm{1e-3, false, 7};
  const auto noisy = add_noise(snaps, nm);
  double sum = 0.0, sum2 = 0.0;
  long cnt = 0;
  for (std::size_t k = 0; k < snaps.size(); ++k)
    for (std::size_t n = 0; n < snaps[k].displacements.size(); ++n)
      for (int c = 0; c < 2; ++c) {
        const double d = noisy[k].displacements[n](c) - snaps[k].displacements[n](c);
        sum += d;
        sum2 += d * d;
        ++cnt;
      }
  const double sd = std::sqrt(sum2 / cnt - (sum / cnt) * (sum / cnt));
  CHECK(sd == Catch::Approx(1e-3).epsilon(0.05));
  CHECK(noisy[0].reactions == snaps[0].reactions);

  const auto again = add_noise(snaps, nm);
  CHECK(again[4].displacements[100] == noisy[4].displacements[100]);
  NoiseModel other{1e-3, false, 8};
  CHECK(add_noise(snaps, other)[0].displacements[0] != noisy[0].displacements[0]);
}

TEST_CASE("denoising smooths the interior and preserves the boundary") {
  const Mesh m = build_quarter_plate(1.0, 0.25, 420);
  const auto mat = benchmark_material("NeoHookean");
  const auto clean = solve_quasistatic(m, mat, default_quasistatic());

  std::vector<char> boundary(m.nodes.size(), 0);
  for (int d : m.dofs.fixed_dofs) boundary[d / 2] = 1;
  auto interior_rms_diff = [&](const std::vector<Snapshot>& a, const std::vector<Snapshot>& b) {
    double acc = 0.0;
    long cnt = 0;
    for (std::size_t k = 0; k < a.size(); ++k)
      for (std::size_t n = 0; n < a[k].displacements.size(); ++n) {
        if (boundary[n]) continue;
        acc += (a[k].displacements[n] - b[k].displacements[n]).squaredNorm();
        cnt += 2;
      }
    return std::sqrt(acc / cnt);
  };

  // Affine fields pass through exactly (up to roundoff in the tail fit).
  std::vector<Snapshot> affine = clean;
  for (auto& s : affine)
    for (std::size_t n = 0; n < s.displacements.size(); ++n)
      s.displacements[n] = {0.3 + 0.2 * m.nodes[n].x() - 0.1 * m.nodes[n].y(),
                            -0.4 + 0.05 * m.nodes[n].x() + 0.15 * m.nodes[n].y()};
  CHECK(interior_rms_diff(denoise(affine, m), affine) < 1e-12);

  // Noiseless smooth input at measurement scale: deviation under 10% of it.
  const double scale = 1e-4;
  std::vector<Snapshot> gentle = clean;
  for (auto& s : gentle)
    for (std::size_t n = 0; n < s.displacements.size(); ++n) {
      const auto& X = m.nodes[n];
      s.displacements[n] = {scale * std::sin(1.3 * X.x() + 0.4 * X.y()),
                            scale * std::cos(0.9 * X.x() - 0.7 * X.y())};
    }
  CHECK(interior_rms_diff(denoise(gentle, m), gentle) < 0.1 * scale);

  // The fine stress-concentration detail of a real solution is attenuated
  // far below the smallest noise floor the smoother is traded against: the
  // smoothing must not bias the assembled system at low noise.
  const auto smoothed = denoise(clean, m);
  CHECK(interior_rms_diff(smoothed, clean) < 5e-5);

  // Noise suppression on a pure-noise field. The near-interpolatory setting
  // buys its negligible bias with a milder reduction factor.
  std::vector<Snapshot> zero = clean;
  for (auto& s : zero)
    for (auto& u : s.displacements) u.setZero();
  NoiseModel nm{1e-3, true, 11};
  const auto noisy = add_noise(zero, nm);
  const auto den = denoise(noisy, m);
  const double rms_in = interior_rms_diff(noisy, zero);
  const double rms_out = interior_rms_diff(den, zero);
  CHECK(rms_out < 0.75 * rms_in);

  // Boundary nodes keep their (noisy) stored values bit-exactly.
  for (std::size_t k = 0; k < den.size(); ++k)
    for (std::size_t n = 0; n < den[k].displacements.size(); ++n)
      if (boundary[n]) {
        CHECK(den[k].displacements[n].x() == noisy[k].displacements[n].x());
        CHECK(den[k].displacements[n].y() == noisy[k].displacements[n].y());
      }

  // Denoising noisy data moves it back toward the clean solution.
  const auto noisy_real = add_noise(clean, NoiseModel{1e-3, true, 13});
  const auto den_real = denoise(noisy_real, m);
  CHECK(interior_rms_diff(den_real, clean) < 0.75 * interior_rms_diff(noisy_real, clean));
}
