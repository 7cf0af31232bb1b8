#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "vcrit/errors.hpp"
#include "vcrit/harmonic.hpp"

using namespace vcrit;
using std::numbers::pi;

namespace {

// Reference values evaluated independently in 40-digit arithmetic.
constexpr double kHStar = 0.06095468348303329;
constexpr double kM = 1.0324556666280609;
constexpr double kLambda = 0.4842822952708181;
constexpr double kHalf = 0.4096655293982669;

// Root of h/2 + (1 - h) M = 1 by plain bisection on [1, 1 / (1 - h)].
double bisect_M(double h) {
  double lo = 1.0, hi = 1.0 / (1.0 - h) + 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (h / 2 + (1 - h) * mid < 1.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("solynin_h: anchor values") {
  CHECK(solynin_h(1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(solynin_h(0.5) == doctest::Approx(kHalf).epsilon(1e-13));
  CHECK(solynin_h(1.0 - std::cbrt(0.75)) == doctest::Approx(kHStar).epsilon(1e-12));
  CHECK_THROWS_AS(solynin_h(0.0), ParameterError);
  CHECK_THROWS_AS(solynin_h(1.5), ParameterError);
}

TEST_CASE("solynin_h: strictly increasing") {
  double prev = 0.0;
  for (int i = 1; i <= 1000; ++i) {
    const double h = solynin_h(i / 1000.0);
    CHECK(h > prev);
    prev = h;
  }
}

TEST_CASE("solve_M: constants and the defining identity") {
  const MConstants c = solve_M();
  CHECK(c.delta == 0.75);
  CHECK(c.alpha_star == doctest::Approx(1.0 - std::cbrt(0.75)).epsilon(1e-15));
  CHECK(c.h_star == doctest::Approx(kHStar).epsilon(1e-12));
  CHECK(c.M == doctest::Approx(kM).epsilon(1e-12));
  CHECK(c.lambda == doctest::Approx(kLambda).epsilon(1e-12));
  CHECK(std::fabs(c.h_star / 2 + (1 - c.h_star) * c.M - 1.0) <= 1e-12);
  CHECK(c.M == doctest::Approx(bisect_M(c.h_star)).epsilon(1e-12));
  CHECK(c.lambda * 2 * c.M == doctest::Approx(1.0).epsilon(1e-15));

  for (double h : {0.0, 0.1, 0.5, 0.9}) {
    const MConstants m = solve_M(h);
    CHECK(m.M == doctest::Approx(bisect_M(h)).epsilon(1e-12));
  }
  const MConstants z = solve_M(0.0);
  CHECK(z.M == doctest::Approx(1.0));
  CHECK(z.lambda == doctest::Approx(0.5));
  CHECK_THROWS_AS(solve_M(1.0), ParameterError);
  CHECK_THROWS_AS(solve_M(-0.1), ParameterError);
}

TEST_CASE("hmmp_bound: convex combination") {
  CHECK(hmmp_bound(0.5, 1.0, 0.0) == 1.0);
  CHECK(hmmp_bound(0.5, 1.0, 1.0) == 0.5);
  CHECK(hmmp_bound(0.5, 1.0, 0.25) == doctest::Approx(0.875));
  // with m = 1/2 and M_big = M the bound at h* is exactly 1 (normalised sup)
  const MConstants c = solve_M();
  CHECK(hmmp_bound(0.5, c.M, c.h_star) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(hmmp_bound(0.5, 1.0, 1.5), ParameterError);
  CHECK_THROWS_AS(hmmp_bound(2.0, 1.0, 0.5), ParameterError);
}

TEST_CASE("SlitSet: sorting, merging and validation") {
  const SlitSet s({{0.5, 0.7}, {-1.0, -0.5}, {-0.5, -0.2}});
  REQUIRE(s.intervals().size() == 2);
  CHECK(s.intervals()[0].first == -1.0);
  CHECK(s.intervals()[0].second == -0.2);
  CHECK(s.total_length() == doctest::Approx(1.0));
  CHECK(s.alpha() == doctest::Approx(0.5));
  CHECK(s.contains(0.6));
  CHECK_FALSE(s.contains(0.0));

  const SlitSet sym = SlitSet::symmetric(0.25);
  CHECK(sym.total_length() == doctest::Approx(0.5));
  CHECK(sym.contains(-0.9));
  CHECK(sym.contains(0.8));

  CHECK_THROWS_AS(SlitSet({}), ParameterError);
  CHECK_THROWS_AS(SlitSet({{0.3, 0.2}}), ParameterError);
  CHECK_THROWS_AS(SlitSet({{0.5, 1.2}}), ParameterError);
  CHECK_THROWS_AS(SlitSet({{0.0, 0.5}, {0.4, 0.6}}), ParameterError);
  CHECK_THROWS_AS(SlitSet({{0.2, 0.2}}), ParameterError);
}

TEST_CASE("random_slit_set: length, spacing and determinism") {
  std::mt19937_64 a(11), b(11);
  for (int t = 0; t < 200; ++t) {
    const std::size_t pieces = 1 + static_cast<std::size_t>(t % 4);
    const double alpha = 0.05 + 0.9 * (t % 17) / 17.0;
    const SlitSet s = random_slit_set(alpha, pieces, 0.02, a);
    const SlitSet r = random_slit_set(alpha, pieces, 0.02, b);
    CHECK(s.total_length() == doctest::Approx(2 * alpha).epsilon(1e-12));
    CHECK(s.intervals() == r.intervals());
    CHECK(s.intervals().size() == pieces);
    for (std::size_t i = 0; i < s.intervals().size(); ++i) {
      const auto [lo, hi] = s.intervals()[i];
      CHECK(lo >= -1.0);
      CHECK(hi <= 1.0);
      CHECK(hi - lo >= 0.02 - 1e-12);
      if (i > 0) CHECK(lo - s.intervals()[i - 1].second >= 0.02 - 1e-12);
    }
  }
  std::mt19937_64 c(1);
  CHECK_THROWS_AS(random_slit_set(0.99, 4, 0.1, c), ParameterError);
  CHECK_THROWS_AS(random_slit_set(0.5, 0, 0.01, c), ParameterError);
}

TEST_CASE("harmonic_measure_numeric: closed-form shortcut and argument checks") {
  const auto full = harmonic_measure_numeric(SlitSet({{-1.0, 1.0}}), 128);
  CHECK(full.value == 1.0);
  CHECK(full.method == HmMethod::ClosedForm);
  CHECK_THROWS_AS(harmonic_measure_numeric(SlitSet::symmetric(0.5), 64), ParameterError);
  CHECK_THROWS_AS(harmonic_measure_numeric(SlitSet::symmetric(0.5), 129), ParameterError);
  CHECK_THROWS_AS(harmonic_measure_numeric(SlitSet::symmetric(0.005), 128), ParameterError);
  HmOptions tight;
  tight.max_sweeps = 3;
  CHECK_THROWS_AS(harmonic_measure_numeric(SlitSet::symmetric(0.5), 128, tight), ConvergenceError);
}

TEST_CASE("harmonic_measure_numeric: symmetric pair matches the closed form") {
  const auto r = harmonic_measure_numeric(SlitSet::symmetric(0.5), 512);
  CHECK(r.method == HmMethod::GridLaplace);
  CHECK(r.value == doctest::Approx(kHalf).epsilon(0.02));
  CHECK(r.residual <= 1e-8);
}

TEST_CASE("harmonic_measure_numeric: a non-extremal set has larger measure") {
  // The closed form is the minimum over sets of the same length; a single interval
  // nearer the centre is seen more.
  const auto r = harmonic_measure_numeric(SlitSet({{0.5, 1.0}}), 256);
  CHECK(r.value >= solynin_h(0.25) - 0.005);
}

TEST_CASE("harmonic_measure_numeric: random sets stay above the extremal value at 512") {
  std::mt19937_64 rng(77);
  for (std::size_t pieces = 1; pieces <= 3; ++pieces) {
    const SlitSet k = random_slit_set(0.25, pieces, 8.0 / 512, rng);
    CHECK(harmonic_measure_numeric(k, 512).value >= solynin_h(0.25) - 0.005);
  }
}
