#include <doctest.h>

#include <cmath>
#include <numbers>

#include "test_util.hpp"
#include "vcrit/errors.hpp"
#include "vcrit/norms.hpp"
#include "vcrit/oscillation.hpp"
#include "vcrit/rings.hpp"
#include "vcrit/weights.hpp"

using namespace vcrit;
using std::numbers::e;
using std::numbers::pi;

namespace {

// sgn(x1 - 1/2) with the jump between grid planes n/2 - 1 and n/2.
ScalarField3D signum(const GridSpec& g) {
  ScalarField3D f(g);
  for (std::size_t idx = 0; idx < g.cells(); ++idx) f[idx] = g.coords(idx)[0] >= g.n() / 2 ? 1.0 : -1.0;
  return f;
}

double bmo_sup(const ScalarField3D& f, const WeightSpec& w, const std::vector<double>& scales) {
  return bmo_phi_norm(OscillationField(f), w, scales).sup_part;
}

}  // namespace

TEST_CASE("direction field: constant, homogeneity and the zero field") {
  const GridSpec g(8, 1.0);
  VectorField3D c(g);
  for (std::size_t i = 0; i < g.cells(); ++i) c.set(i, {3.0, 0, 0});
  const auto d = direction_field(c);
  CHECK(d.valid_count() == g.cells());
  for (std::size_t i = 0; i < g.cells(); ++i) CHECK(d.xi.at(i) == Vec3{1.0, 0.0, 0.0});

  std::mt19937_64 rng(2);
  const auto w = testutil::random_field(g, rng);
  auto w2 = w;
  w2 *= 2.0;
  const auto a = direction_field(w), b = direction_field(w2);
  CHECK(testutil::max_abs_diff(a.xi, b.xi) == 0.0);
  CHECK(a.valid == b.valid);

  const auto z = direction_field(VectorField3D(g));
  CHECK(z.degenerate);
  CHECK(z.valid_count() == 0);
}

TEST_CASE("direction field: tangent to a ring along its centerline") {
  const GridSpec g(64, 2 * pi);
  RingConfig r;
  r.radius = 1.0;
  r.core_radius = 0.3;
  r.center = {pi, pi, pi};
  const auto d = direction_field(gaussian_ring_vorticity(r, g));
  const double h = g.spacing();
  std::size_t checked = 0;
  double worst = 0.0;
  for (std::size_t idx = 0; idx < g.cells(); ++idx) {
    const auto c = g.coords(idx);
    const Vec3 x = g.position(c[0], c[1], c[2]) - r.center;
    const double rho = std::hypot(x[0], x[1]);
    if (std::hypot(rho - r.radius, x[2]) > 0.5 * h) continue;
    const Vec3 tangent{-x[1] / rho, x[0] / rho, 0.0};  // counter-clockwise about +z
    worst = std::max(worst, std::acos(std::min(1.0, dot(d.xi.at(idx), tangent))));
    ++checked;
  }
  CHECK(checked > 20);
  CHECK(worst * 180 / pi < 2.0);
}

TEST_CASE("mean oscillation: constant, signum and linear profiles") {
  const GridSpec g(32, 1.0);
  const double h = g.spacing();
  ScalarField3D c(g);
  for (auto& v : c.data) v = 4.2;
  CHECK(*mean_oscillation(OscillationField(c), {3, 7, 9}, 8 * h) == 0.0);

  const auto s = signum(g);
  for (std::size_t m = 2; m <= 16; ++m) {
    const double om = *mean_oscillation(OscillationField(s), {16, 5, 5}, static_cast<double>(m) * h);
    CHECK(std::fabs(om - 1.0) <= 2.0 / static_cast<double>(m));
    if (m % 2 == 0) CHECK(om == 1.0);
  }

  // f = x1: m equispaced values around the centre; exact mean absolute deviation.
  ScalarField3D lin(g);
  for (std::size_t idx = 0; idx < g.cells(); ++idx) lin[idx] = h * static_cast<double>(g.coords(idx)[0]);
  for (std::size_t m = 2; m <= 16; ++m) {
    const double md = static_cast<double>(m);
    const double r = md * h;
    const double om = *mean_oscillation(OscillationField(lin), {16, 3, 3}, r);
    const double exact = m % 2 == 0 ? r / 4 : (md * md - 1) * h / (4 * md);
    CHECK(om == doctest::Approx(exact).epsilon(1e-12));
    CHECK(std::fabs(om - r / 4) <= (2.0 / md) * (r / 4));
  }

  CHECK_THROWS_AS(cube_cells_per_side(g, 1.2 * h), ParameterError);
  CHECK(cube_cells_per_side(g, 2.4 * h) == 2);
  CHECK(cube_cells_per_side(g, 2.6 * h) == 3);
}

TEST_CASE("mean oscillation: masked fields skip sparse cubes") {
  const GridSpec g(16, 1.0);
  VectorField3D w(g);
  w.set(g.index(8, 8, 8), {1.0, 0, 0});
  const auto d = direction_field(w);
  CHECK(d.valid_count() == 1);
  const OscillationField f(d);
  CHECK_FALSE(mean_oscillation(f, {8, 8, 8}, 4 * g.spacing()).has_value());
  CHECK(*mean_oscillation(f, {8, 8, 8}, 4 * g.spacing(), 0.0) == 0.0);
}

TEST_CASE("bmo: constant field, signum with constant weight") {
  const GridSpec g(32, 1.0);
  ScalarField3D c(g);
  for (auto& v : c.data) v = -1.5;
  const auto scales = dyadic_scales(g, 0.5);
  CHECK(scales.size() == 4);  // 16, 8, 4, 2 cells
  CHECK(bmo_sup(c, WeightSpec::log_composite(1), scales) == 0.0);

  const auto rep = bmo_phi_norm(OscillationField(signum(g)), WeightSpec::constant(), scales);
  CHECK(rep.sup_part == 1.0);
  CHECK(rep.l1_part == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(rep.total == doctest::Approx(2.0).epsilon(1e-14));
  for (const auto& row : rep.per_scale) CHECK(row.max_oscillation == 1.0);
}

TEST_CASE("bmo: signum leaves every log-composite space") {
  const GridSpec g(64, 1.0);
  const auto s = signum(g);
  for (int k : {1, 2}) {
    const auto w = WeightSpec::log_composite(k);
    const auto all = dyadic_scales(g, w.r_max);
    REQUIRE(all.size() >= 5);
    double prev = 0.0;
    for (std::size_t j = 1; j <= 5; ++j) {
      const std::vector<double> scales(all.begin(), all.begin() + static_cast<long>(j));
      const double sup = bmo_sup(s, w, scales);
      CHECK(sup > prev);
      // attained at the smallest scale: 1 / phi(side)
      CHECK(sup == doctest::Approx(1.0 / phi_eval(w, static_cast<double>(cube_cells_per_side(g, scales.back())) * g.spacing())));
      prev = sup;
    }
  }
}

TEST_CASE("bmo: Holder profile is stable under refinement for the power weight") {
  auto sup_at = [](std::size_t n) {
    const GridSpec g(n, 1.0);
    ScalarField3D f(g);
    for (std::size_t idx = 0; idx < g.cells(); ++idx) {
      const double x = g.spacing() * static_cast<double>(g.coords(idx)[0]);
      f[idx] = std::sqrt(std::fabs(x - 0.5));
    }
    // centres every 1/16 of the box at both resolutions (the cusp plane included)
    BmoOptions o;
    o.stride = n / 16;
    return bmo_phi_norm(OscillationField(f), WeightSpec::power(0.5), dyadic_scales(g, 0.5), o).sup_part;
  };
  const double s32 = sup_at(32), s64 = sup_at(64);
  CHECK(s32 > 0.0);
  CHECK(s64 == doctest::Approx(s32).epsilon(0.10));
}

TEST_CASE("bmo: inadmissible scales are dropped or rejected") {
  const GridSpec g(16, 1.0);
  const auto s = signum(g);
  CHECK_THROWS_AS(bmo_sup(s, WeightSpec::constant(), {0.01}), DomainError);
  CHECK_THROWS_AS(bmo_sup(s, WeightSpec::constant(), {0.9}), DomainError);
  const auto rep = bmo_phi_norm(OscillationField(s), WeightSpec::constant(), {0.9, 0.25});
  CHECK(rep.per_scale.size() == 1);
}

TEST_CASE("phi: hand evaluations") {
  CHECK(phi_eval(WeightSpec::power(1.0), 0.25) == 0.25);
  CHECK(phi_eval(WeightSpec::constant(), 0.1) == 1.0);
  CHECK(phi_eval(WeightSpec::log_composite(1, 0.0), std::exp(-e)) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(phi_eval(WeightSpec::log_composite(2, 0.0), std::exp(-std::exp(e))) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(phi_of_log_scale(WeightSpec::log_composite(2, 0.0), std::exp(e)) == doctest::Approx(1.0).epsilon(1e-15));
  // default offsets normalise phi(1/2) = 1
  for (int k = 1; k <= 3; ++k) CHECK(phi_eval(WeightSpec::log_composite(k), 0.5) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(phi_eval(WeightSpec::inverse_log(), 0.5) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(e_tower(2) == doctest::Approx(std::exp(e)));
  CHECK_THROWS_AS(e_tower(4), ParameterError);
  CHECK_THROWS_AS(phi_eval(WeightSpec::power(0.5), 0.0), DomainError);
  CHECK_THROWS_AS(phi_eval(WeightSpec::power(0.5), 0.7), DomainError);
  CHECK_THROWS_AS(WeightSpec::power(1.5), ParameterError);
}

TEST_CASE("discontinuity criterion agrees with closed-form antiderivatives") {
  CHECK_FALSE(discontinuity_criterion(WeightSpec::power(0.5)).admits_discontinuous);
  CHECK_FALSE(discontinuity_criterion(WeightSpec::power(1.0)).admits_discontinuous);
  for (const auto& w : {WeightSpec::constant(), WeightSpec::inverse_log(), WeightSpec::log_composite(1),
                        WeightSpec::log_composite(2)}) {
    const auto rep = discontinuity_criterion(w);
    CHECK(rep.admits_discontinuous);
    CHECK(rep.agrees);
  }
  CHECK(discontinuity_criterion(WeightSpec::power(0.5)).agrees);

  // antiderivatives of phi(r)/r written out by hand
  const double r0 = 1e-6, u = 0.5;
  CHECK(closed_form_log_integral(WeightSpec::power(0.5), r0, u) ==
        doctest::Approx((std::sqrt(u) - std::sqrt(r0)) / 0.5).epsilon(1e-13));
  CHECK(closed_form_log_integral(WeightSpec::constant(), r0, u) == doctest::Approx(std::log(u / r0)).epsilon(1e-13));
  const auto il = WeightSpec::inverse_log(1.0);
  CHECK(closed_form_log_integral(il, r0, u) ==
        doctest::Approx(std::log(1 + std::fabs(std::log(r0))) - std::log(1 + std::fabs(std::log(u)))).epsilon(1e-13));
  CHECK_THROWS_AS(closed_form_log_integral(WeightSpec::log_composite(1), r0, u), ParameterError);
}

TEST_CASE("orlicz modular") {
  const GridSpec g(8, 2.0);
  CHECK(orlicz_modular(VectorField3D(g), 1) == 0.0);
  VectorField3D c(g);
  const double cv = 5.0;
  for (std::size_t i = 0; i < g.cells(); ++i) c.set(i, {0, 0, cv});
  const double V = 8.0;
  CHECK(orlicz_modular(c, 1) == doctest::Approx(cv * std::log(e + cv) * V).epsilon(1e-13));
  CHECK(orlicz_modular(c, 2) == doctest::Approx(cv * std::log(std::log(std::exp(e) + cv)) * V).epsilon(1e-13));
  std::mt19937_64 rng(8);
  for (int k = 1; k <= 3; ++k) {
    const auto w = testutil::random_field(g, rng, 10.0);
    CHECK(orlicz_modular(w, k) >= l1_norm(w));
  }
  CHECK_THROWS_AS(orlicz_modular(c, 0), ParameterError);
}
