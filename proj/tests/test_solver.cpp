#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>

#include "test_util.hpp"
#include "vcrit/errors.hpp"
#include "vcrit/norms.hpp"
#include "vcrit/rings.hpp"
#include "vcrit/slf.hpp"
#include "vcrit/solver.hpp"

using namespace vcrit;
using std::numbers::pi;

namespace {

// ABC flow with A = B = C = 1: a curl eigenfield with eigenvalue 1, so u = w.
VectorField3D abc_field(const GridSpec& g) {
  VectorField3D w(g);
  for (std::size_t idx = 0; idx < g.cells(); ++idx) {
    const auto [i, j, k] = g.coords(idx);
    const Vec3 x = g.position(i, j, k);
    w.set(idx, {std::sin(x[2]) + std::cos(x[1]), std::sin(x[0]) + std::cos(x[2]),
                std::sin(x[1]) + std::cos(x[0])});
  }
  return w;
}

// Vorticity of the Taylor-Green velocity (sin x cos y cos z, -cos x sin y cos z, 0).
VectorField3D taylor_green(const GridSpec& g) {
  VectorField3D w(g);
  for (std::size_t idx = 0; idx < g.cells(); ++idx) {
    const auto [i, j, k] = g.coords(idx);
    const Vec3 p = g.position(i, j, k);
    const double x = p[0], y = p[1], z = p[2];
    w.set(idx, {-std::cos(x) * std::sin(y) * std::sin(z), -std::sin(x) * std::cos(y) * std::sin(z),
                2 * std::sin(x) * std::sin(y) * std::cos(z)});
  }
  return w;
}

RingConfig ring(double a) {
  RingConfig r;
  r.radius = 1.0;
  r.core_radius = a;
  r.center = {pi, pi, pi};
  return r;
}

SimState advance(SpectralSolver& s, SimState st, double T, double dt) {
  const int n = static_cast<int>(std::lround(T / dt));
  for (int i = 0; i < n; ++i) st = s.step(st, dt);
  return st;
}

}  // namespace

TEST_CASE("step: zero field is a fixed point") {
  const GridSpec g(16, 2 * pi);
  SpectralSolver s(g, 0.1);
  auto st = s.make_state(VectorField3D(g));
  st = s.step(st, 0.1);
  CHECK(testutil::max_abs(s.vorticity(st)) == 0.0);
  CHECK(st.time == doctest::Approx(0.1));
}

TEST_CASE("step: Beltrami field decays at the exact viscous rate") {
  const GridSpec g(32, 2 * pi);
  const double nu = 0.1;
  const auto w0 = abc_field(g);
  for (auto visc : {ViscousTreatment::IntegratingFactor, ViscousTreatment::Explicit}) {
    SolverOptions opt;
    opt.viscous = visc;
    SpectralSolver s(g, nu, opt);
    const auto st = advance(s, s.make_state(w0), 0.5, 0.01);
    auto expect = w0;
    expect *= std::exp(-nu * 0.5);  // |k|^2 = 1
    CHECK(testutil::max_abs_diff(s.vorticity(st), expect) <= 1e-6 * testutil::max_abs(expect));
  }
}

TEST_CASE("step: inviscid Taylor-Green conserves energy over 100 steps") {
  const GridSpec g(32, 2 * pi);
  // CFL 0.25 keeps the 100 steps within t ~ 5, before the 2/3 truncation starts to drain
  // energy from the cascading Taylor-Green flow.
  SolverOptions opt;
  opt.cfl = 0.25;
  SpectralSolver s(g, 0.0, opt);
  auto st = s.make_state(taylor_green(g));
  const double e0 = s.diagnostics(st).energy;
  const double dt = s.cfl_dt(st);
  st = advance(s, st, 100 * dt, dt);
  CHECK(std::fabs(s.diagnostics(st).energy - e0) <= 1e-6 * e0);
}

TEST_CASE("step: non-finite results raise InstabilityError") {
  const GridSpec g(16, 2 * pi);
  SpectralSolver s(g, 0.0);
  auto w = taylor_green(g);
  w *= 1e150;
  const auto st = s.make_state(w);
  CHECK_THROWS_AS(s.step(st, 1e10), InstabilityError);
}

TEST_CASE("cfl_dt: rest state, homogeneity and the advective candidate") {
  const GridSpec g(32, 2 * pi);
  SolverOptions opt;
  opt.dt_max = 0.3;
  SpectralSolver rest(g, 0.0, opt);
  CHECK(rest.cfl_dt(rest.make_state(VectorField3D(g))) == 0.3);

  opt.viscous = ViscousTreatment::Explicit;
  SpectralSolver visc(g, 1.0, opt);
  const double h = g.spacing();
  CHECK(visc.cfl_dt(visc.make_state(VectorField3D(g))) == doctest::Approx(h * h / 6.0));

  SolverOptions big;
  big.dt_max = 1e9;
  SpectralSolver s(g, 0.0, big);
  const auto w = taylor_green(g);
  auto w2 = w;
  w2 *= 2.0;
  CHECK(s.cfl_dt(s.make_state(w)) == doctest::Approx(2.0 * s.cfl_dt(s.make_state(w2))).epsilon(1e-12));

  // u = (sin z, 0, 0) has max-norm 1 at z = pi/2 (a grid plane), w = (0, cos z, 0).
  const GridSpec g64(64, 2 * pi);
  SpectralSolver s64(g64, 0.0, big);
  VectorField3D shear(g64);
  for (std::size_t idx = 0; idx < g64.cells(); ++idx) {
    const auto c = g64.coords(idx);
    shear.set(idx, {0.0, std::cos(g64.position(c[0], c[1], c[2])[2]), 0.0});
  }
  CHECK(s64.cfl_dt(s64.make_state(shear)) == doctest::Approx(0.5 * 2 * pi / 64).epsilon(1e-9));
  CHECK(0.5 * 2 * pi / 64 == doctest::Approx(0.04909).epsilon(1e-4));
}

TEST_CASE("step: RK4 converges at fourth order") {
  const GridSpec g(16, 2 * pi);
  SpectralSolver s(g, 0.0);
  const auto st0 = s.make_state(taylor_green(g));
  const double T = 0.8;
  const auto ref = s.vorticity(advance(s, st0, T, 0.0125));
  const auto e1 = testutil::max_abs_diff(s.vorticity(advance(s, st0, T, 0.2)), ref);
  const auto e2 = testutil::max_abs_diff(s.vorticity(advance(s, st0, T, 0.1)), ref);
  const auto e3 = testutil::max_abs_diff(s.vorticity(advance(s, st0, T, 0.05)), ref);
  // Halving the step reduces the error 16-fold for a fourth-order method.
  CHECK(e1 / e2 >= 8.0);
  CHECK(e1 / e2 <= 32.0);
  CHECK(e2 / e3 >= 8.0);
  CHECK(e2 / e3 <= 32.0);
}

TEST_CASE("step: enstrophy balance over one step") {
  const GridSpec g(64, 2 * pi);
  const double nu = 0.02;
  MKConfig mk;
  mk.ring = ring(0.3);
  mk.separation = 0.6;
  SpectralSolver s(g, nu);
  const auto st0 = s.make_state(mk_initial_configuration(mk, g));
  const double dt = 1e-3;
  const auto st1 = s.step(st0, dt);
  const auto b0 = s.enstrophy_budget(st0);
  const auto b1 = s.enstrophy_budget(st1);
  const double lhs = (b1.enstrophy - b0.enstrophy) / dt;
  const double rhs = 0.5 * ((b0.production - 2 * nu * b0.palinstrophy) + (b1.production - 2 * nu * b1.palinstrophy));
  CHECK(lhs == doctest::Approx(rhs).epsilon(0.05));
  CHECK(b0.enstrophy == doctest::Approx(s.diagnostics(st0).enstrophy).epsilon(1e-12));
}

TEST_CASE("evolve: zero final time yields the single initial snapshot") {
  const GridSpec g(16, 2 * pi);
  SpectralSolver s(g, 0.01);
  RunConfig rc;
  rc.t_final = 0.0;
  const auto tl = evolve(s, taylor_green(g), rc);
  REQUIRE(tl.size() == 1);
  CHECK(tl.snapshots()[0].time == 0.0);
  CHECK(tl.snapshots()[0].field.has_value());
  CHECK_FALSE(tl.failure.has_value());
}

TEST_CASE("evolve: snapshots, files, diagnostics and the L1 envelope") {
  const GridSpec g(32, 2 * pi);
  const double nu = 0.02;
  SpectralSolver s(g, nu);
  const auto dir = std::filesystem::temp_directory_path() / "vcrit_test_evolve";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  RunConfig rc;
  rc.t_final = 1.0;
  rc.snapshot_interval = 0.25;
  rc.store_fields = false;
  rc.output_dir = dir;
  const auto tl = evolve(s, gaussian_ring_vorticity(ring(0.3), g), rc);
  REQUIRE(tl.size() == 5);
  for (std::size_t j = 0; j < tl.size(); ++j) {
    const auto& snap = tl.snapshots()[j];
    CHECK(snap.time == doctest::Approx(0.25 * static_cast<double>(j)));
    CHECK_FALSE(snap.field.has_value());
    REQUIRE(snap.file.has_value());
    CHECK(snap.file->filename().string() == snapshot_file_name(j));
    const auto w = slf::read_field(*snap.file);
    CHECK(linf_norm(w) == doctest::Approx(snap.diagnostics.omega_linf).epsilon(1e-14));
  }
  // a priori bound ||w||_1(t) <= ||w0||_1 + (E0 - E(t)) / nu
  const auto& first = tl.snapshots().front().diagnostics;
  for (const auto& snap : tl.snapshots()) {
    CHECK(snap.diagnostics.energy <= first.energy * (1 + 1e-12));
    CHECK(snap.diagnostics.omega_l1 <= first.omega_l1 + (first.energy - snap.diagnostics.energy) / nu);
  }

  write_diagnostics_csv(dir / "d.csv", tl);
  std::ifstream in(dir / "d.csv");
  std::string line;
  std::size_t rows = 0;
  std::getline(in, line);
  CHECK(line == "t,energy,enstrophy,helicity,omega_linf,omega_l1");
  while (std::getline(in, line)) ++rows;
  CHECK(rows == tl.size());
}

TEST_CASE("evolve: growth stop and argument checks") {
  const GridSpec g(16, 2 * pi);
  SpectralSolver s(g, 0.0);
  RunConfig rc;
  rc.snapshot_interval = 0.0;
  CHECK_THROWS_AS(evolve(s, taylor_green(g), rc), ParameterError);
  rc.snapshot_interval = 0.1;
  rc.t_start = 1.0;
  rc.t_final = 0.5;
  CHECK_THROWS_AS(evolve(s, taylor_green(g), rc), ParameterError);

  Timeline t;
  Snapshot a;
  a.time = 1.0;
  t.append(a);
  CHECK_THROWS(t.append(a));
}
