#include <cmath>

#include "doctest.h"
#include "ltsmile/charfn.hpp"
#include "ltsmile/moments.hpp"
#include "ltsmile/saddle.hpp"
#include "ltsmile/smile.hpp"
#include "support.hpp"

using namespace ltsmile;
using testsupport::typical_models;

namespace {

// Taylor coefficients 0..4 of w(k, 1) at k = 0; 5-point stencils, one Richardson step.
std::array<double, 5> fd_taylor(const ModelSpec& m, double h) {
  auto w = [&](double k) { return total_variance(m, k, 1.0); };
  auto raw = [&](double s) {
    const double f0 = w(0.0), f1 = w(s), fm1 = w(-s), f2 = w(2 * s), fm2 = w(-2 * s);
    return std::array<double, 5>{f0, (f1 - fm1) / (2 * s), (f1 - 2 * f0 + fm1) / (s * s),
                                 (f2 - 2 * f1 + 2 * fm1 - fm2) / (2 * s * s * s),
                                 (f2 - 4 * f1 + 6 * f0 - 4 * fm1 + fm2) / (s * s * s * s)};
  };
  const auto a = raw(h);
  const auto b = raw(h / 2);
  const double fact[5] = {1, 1, 2, 6, 24};
  std::array<double, 5> c{};
  for (int n = 0; n < 5; ++n) c[n] = (4 * b[n] - a[n]) / 3 / fact[n];
  return c;
}

}  // namespace

TEST_CASE("ATM Esscher shift") {
  CHECK(atm_esscher_shift(ModelSpec(typical::bs)) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(atm_esscher_shift(ModelSpec(BSParams{0.3})) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(atm_esscher_shift(ModelSpec(MertonParams{0.1, 0.1, 0.0, 0.0})) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(atm_esscher_shift(ModelSpec(typical::heston)) < 0.5);
  // mpmath, tests/oracles/derive.py
  CHECK(atm_esscher_shift(ModelSpec(typical::bg)) == doctest::Approx(0.4900343170048668).epsilon(1e-12));
  for (const auto& m : typical_models()) {
    CAPTURE(m.name());
    const double u0 = atm_esscher_shift(m);
    CHECK(u0 > 0.0);
    CHECK(u0 < 1.0);
    CHECK(std::abs(cumulant_slope(m, u0)[0]) < 1e-12);
    CHECK(cumulant(m, u0 + 1e-3) > cumulant(m, u0));
    CHECK(cumulant(m, u0 - 1e-3) > cumulant(m, u0));
  }
}

TEST_CASE("Esscher central moments") {
  const auto bs = esscher_central_moments(ModelSpec(typical::bs), 0.5, 4);
  REQUIRE(bs.size() == 5);
  CHECK(bs[2] == doctest::Approx(0.04).epsilon(1e-14));
  CHECK(std::abs(bs[3]) < 1e-16);
  CHECK(bs[4] == doctest::Approx(3 * 0.04 * 0.04).epsilon(1e-12));
  const ModelSpec bg(typical::bg);
  const double u0 = atm_esscher_shift(bg);
  const auto m = esscher_central_moments(bg, u0, 3);
  REQUIRE(m.size() == 4);
  // mpmath, tests/oracles/derive.py
  CHECK(m[2] == doctest::Approx(0.02830352991129177).epsilon(1e-12));
  CHECK(m[3] == doctest::Approx(-0.006765343928242043).epsilon(1e-10));
  const ModelSpec vg(typical::vg);
  const auto mv = esscher_central_moments(vg, atm_esscher_shift(vg), 3);
  CHECK(mv[3] < 0.0);
  CHECK(mv[3] == doctest::Approx(-0.001084343224037732).epsilon(1e-10));
  CHECK(esscher_central_moments(bg, u0, 2).size() == 3);
  CHECK_THROWS_AS(esscher_central_moments(bg, u0, 5), DomainError);
  CHECK_THROWS_AS(esscher_central_moments(bg, u0, 1), DomainError);
  CHECK_THROWS_AS(esscher_central_moments(bg, 40.0, 2), DomainError);
}

TEST_CASE("moment expansion of total variance") {
  const auto bs = w_expansion_coeffs(ModelSpec(typical::bs));
  CHECK(bs.w_coeffs[0] == doctest::Approx(0.04).epsilon(1e-14));
  for (int n = 1; n <= 4; ++n) CHECK(std::abs(bs.w_coeffs[n]) < 1e-12);
  for (const auto& m : typical_models()) {
    CAPTURE(m.name());
    const auto e = w_expansion_coeffs(m);
    CHECK(e.m2 > 0.0);
    CHECK(e.w_coeffs[0] == doctest::Approx(8 * e.psi0).epsilon(1e-14));
    CHECK(e.w_coeffs[1] == doctest::Approx(-8 * (0.5 - e.ubar0)).epsilon(1e-14));
    const double h = 1e-3;
    const double skew = (total_variance(m, h, 1.0) - total_variance(m, -h, 1.0)) / (2 * h);
    CHECK(std::abs(skew - e.w_coeffs[1]) < 1e-5);
    if (m.kind() == ModelKind::BS) continue;
    const auto fd = fd_taylor(m, 0.005);
    for (int n = 0; n <= 3; ++n) {
      CAPTURE(n);
      CHECK(std::abs(e.w_coeffs[n] - fd[n]) <= 1e-4 * std::abs(e.w_coeffs[n]));
    }
    CHECK(std::abs(e.w_coeffs[4] - fd[4]) <= 1e-2 * std::abs(e.w_coeffs[4]));
    CHECK(e.eval(0.01) == doctest::Approx(total_variance(m, 0.01, 1.0)).epsilon(1e-6));
  }
}

TEST_CASE("Heston curvature against fourth-order differences") {
  const ModelSpec m(typical::heston);
  const auto e = w_expansion_coeffs(m);
  const double h = 1e-3;
  auto w = [&](double k) { return total_variance(m, k, 1.0); };
  const double d2 = (-w(-2 * h) + 16 * w(-h) - 30 * w(0) + 16 * w(h) - w(2 * h)) / (12 * h * h);
  CHECK(e.w_coeffs[2] == doctest::Approx(0.5 * 8 * (1 / e.m2 - 1 / (8 * e.psi0))).epsilon(1e-14));
  CHECK(std::abs(d2 / 2 - e.w_coeffs[2]) < 1e-4 * std::abs(e.w_coeffs[2]));
}

TEST_CASE("Lee wing slopes") {
  for (double L : {0.5, 0.7, 5.5, 34.5, 1e4}) {
    const double b = lee_beta(L);
    CHECK(b >= 0.0);
    CHECK(b <= 2.0);
    CHECK(b / 8 + 1 / (2 * b) == doctest::Approx(L).epsilon(1e-12));
  }
  CHECK(lee_beta(0.5) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(lee_beta(HUGE_VAL) == 0.0);
  CHECK_THROWS_AS(lee_beta(0.4), DomainError);

  const ModelSpec bg(typical::bg);
  const auto w = lee_wings(bg);
  CHECK(w.beta_minus == doctest::Approx(0.09109769979335546).epsilon(1e-12));
  CHECK(w.beta_plus == doctest::Approx(lee_beta(34.5)).epsilon(1e-15));
  CHECK(w.p_tilde == doctest::Approx(34.0));
  CHECK(w.q_tilde == doctest::Approx(5.0));
  CHECK(std::abs(implied_variance(bg, 1e4) / 1e4 - w.beta_plus) < 1e-3);
  CHECK(std::abs(implied_variance(bg, -1e4) / 1e4 - w.beta_minus) < 1e-3);

  const auto bs = lee_wings(ModelSpec(typical::bs));
  CHECK(bs.beta_minus == 0.0);
  CHECK(bs.beta_plus == 0.0);
  const auto mer = lee_wings(ModelSpec(typical::merton));
  CHECK(mer.beta_plus == 0.0);
}

TEST_CASE("tangency points track the Esscher variance") {
  for (const auto& m : typical_models()) {
    CAPTURE(m.name());
    const double m2 = w_expansion_coeffs(m).m2;
    const auto tp = tangency_points(m);
    CHECK(std::abs(tp.x_plus - m2 / 2) < 0.25 * m2);
    CHECK(std::abs(tp.x_minus + m2 / 2) < 0.25 * m2);
  }
}
