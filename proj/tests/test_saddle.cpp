#include <cmath>

#include "doctest.h"
#include "ltsmile/charfn.hpp"
#include "ltsmile/moments.hpp"
#include "ltsmile/saddle.hpp"
#include "ltsmile/smile.hpp"
#include "support.hpp"

using namespace ltsmile;
using testsupport::linspace;
using testsupport::typical_models;

namespace {

// kappa'(ubar) = x by plain bisection on a central-difference slope.
double bisect_uhat(const ModelSpec& m, double x, double lo, double hi) {
  auto slope = [&](double u) {
    const double h = 1e-6 * (1.0 + std::abs(u));
    return (cumulant(m, u + h) - cumulant(m, u - h)) / (2 * h);
  };
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (slope(mid) > x ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi) - 0.5;
}

}  // namespace

TEST_CASE("Black-Scholes saddle point") {
  const ModelSpec bs(typical::bs);
  CHECK(uhat_closed(bs, 0.02) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(uhat_numeric(bs, 0.02) == doctest::Approx(0.5).epsilon(1e-12));
  const auto tp = tangency_points(bs);
  CHECK(tp.x_minus == doctest::Approx(-0.02).epsilon(1e-14));
  CHECK(tp.x_plus == doctest::Approx(0.02).epsilon(1e-14));
}

TEST_CASE("Heston tangency points and branch point") {
  const ModelSpec h(typical::heston);
  const auto tp = tangency_points(h);
  CHECK(tp.x_minus == doctest::Approx(-0.0200).epsilon(1e-12));
  CHECK(std::abs(tp.x_plus - 0.0187) < 5e-5);
  CHECK(uhat_closed(h, tp.x_plus) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(uhat_closed(h, tp.x_minus) == doctest::Approx(-0.5).epsilon(1e-10));
  const auto num = tangency_points(h, SaddleMethod::Numeric);
  CHECK(num.x_minus == doctest::Approx(tp.x_minus).epsilon(1e-10));
  CHECK(num.x_plus == doctest::Approx(tp.x_plus).epsilon(1e-10));
  CHECK(branch_match_x0(h) == doctest::Approx(0.28).epsilon(1e-14));
}

TEST_CASE("Heston redundant constant equations") {
  const auto r = heston_overconstraint(typical::heston);
  CHECK(r.lhs1 == doctest::Approx(50.76705882352938).epsilon(1e-12));
  CHECK(r.rhs1 == doctest::Approx(50.76705882352938).epsilon(1e-12));
  CHECK(r.lhs2 == doctest::Approx(613.8985005767010).epsilon(1e-12));
  CHECK(r.rhs2 == doctest::Approx(613.8985005767010).epsilon(1e-12));
}

TEST_CASE("VG and BG tangency points against bisection") {
  // mpmath kappa'(0), kappa'(1), tests/oracles/derive.py
  const auto vg = tangency_points(ModelSpec(typical::vg));
  CHECK(vg.x_minus == doctest::Approx(-0.008676859993998134).epsilon(1e-12));
  CHECK(vg.x_plus == doctest::Approx(0.008496083630730003).epsilon(1e-12));
  const auto bg = tangency_points(ModelSpec(typical::bg));
  CHECK(bg.x_minus == doctest::Approx(-0.01476814894186441).epsilon(1e-12));
  CHECK(bg.x_plus == doctest::Approx(0.01363521240267340).epsilon(1e-12));
}

TEST_CASE("branch-matching points") {
  CHECK(branch_match_x0(ModelSpec(typical::bg)) == doctest::Approx(-0.1804824346561501).epsilon(1e-13));
  CHECK(branch_match_x0(ModelSpec(typical::vg)) == doctest::Approx(0.1313231400060019).epsilon(1e-13));
  CHECK_THROWS_AS(branch_match_x0(ModelSpec(typical::bs)), UnsupportedModel);
  CHECK_THROWS_AS(branch_match_x0(ModelSpec(typical::merton)), UnsupportedModel);
  for (const ModelSpec m : {ModelSpec(typical::heston), ModelSpec(typical::vg), ModelSpec(typical::bg)}) {
    CAPTURE(m.name());
    const double x0 = branch_match_x0(m);
    const double at = uhat_closed(m, x0);
    CHECK(std::abs(uhat_closed(m, x0 - 1e-9) - at) < 1e-6);
    CHECK(std::abs(uhat_closed(m, x0 + 1e-9) - at) < 1e-6);
    CHECK(at == doctest::Approx(uhat_numeric(m, x0)).epsilon(1e-9));
  }
}

TEST_CASE("closed and numeric saddle points agree") {
  for (const ModelSpec m : {ModelSpec(typical::bs), ModelSpec(typical::heston), ModelSpec(typical::vg),
                            ModelSpec(typical::bg)}) {
    CAPTURE(m.name());
    for (double x : linspace(-1.0, 1.0, 401)) {
      CAPTURE(x);
      const double c = uhat_closed(m, x);
      const double n = uhat_numeric(m, x);
      CHECK(std::abs(c - n) <= 1e-9 * std::max(1.0, std::abs(n)));
    }
  }
}

TEST_CASE("CGMY small-Y approximation regression") {
  // measured maxima of |closed - numeric| / max(1, |uhat|) on [-1, 1]: 0.0104 (Y=0.05), 0.0466 (Y=0.25)
  for (auto [Y, bound] : {std::pair{0.05, 0.011}, std::pair{0.25, 0.05}}) {
    CGMYParams p = typical::cgmy;
    p.Y = Y;
    const ModelSpec m(p);
    double worst = 0.0;
    for (double x : linspace(-1.0, 1.0, 201)) {
      const double n = uhat_numeric(m, x);
      worst = std::max(worst, std::abs(uhat_closed(m, x) - n) / std::max(1.0, std::abs(n)));
    }
    CAPTURE(Y);
    CHECK(worst < bound);
  }
  CGMYParams big = typical::cgmy;
  big.Y = 0.7;
  CHECK_THROWS_AS(uhat_closed(ModelSpec(big), 0.1, true), ApproximationWarning);
  CHECK_NOTHROW(uhat_closed(ModelSpec(big), 0.1));
  CHECK_THROWS_AS(uhat_closed(ModelSpec(typical::merton), 0.1), UnsupportedModel);
}

TEST_CASE("numeric saddle point against bisection") {
  for (const auto& m : typical_models()) {
    CAPTURE(m.name());
    const double lo = std::max(m.ubar_lo(), -40.0) + 1e-9, hi = std::min(m.ubar_hi(), 40.0) - 1e-9;
    for (double x : {-0.6, -0.05, 0.0, 0.01, 0.3}) {
      CAPTURE(x);
      CHECK(std::abs(uhat_numeric(m, x) - bisect_uhat(m, x, lo, hi)) < 1e-6 * (1.0 + std::abs(uhat_numeric(m, x))));
    }
  }
}

TEST_CASE("Merton saddle point") {
  const ModelSpec bs_like(MertonParams{0.1, 0.1, 0.0, 0.0});
  CHECK(uhat_numeric(bs_like, 0.005) == doctest::Approx(0.5).epsilon(1e-10));
  const ModelSpec m(typical::merton);
  // mpmath bisection 9.80276614682690; product-log asymptote 9.81192968891010
  const double u = uhat_numeric(m, 10.0);
  CHECK(u == doctest::Approx(9.802766146826896).epsilon(1e-11));
  CHECK(std::abs(u - 9.811929688910101) < 0.01);
  const auto [lo, hi] = uhat_limits(m);
  CHECK(std::isinf(lo));
  CHECK(std::isinf(hi));
}

TEST_CASE("uhat at zero is the ATM Esscher shift") {
  for (const auto& m : typical_models()) {
    CAPTURE(m.name());
    CHECK(uhat(m, 0.0) == doctest::Approx(atm_esscher_shift(m) - 0.5).epsilon(1e-9));
  }
}

TEST_CASE("saddle point monotone and strictly inside its bounds") {
  for (const auto& m : typical_models()) {
    CAPTURE(m.name());
    const auto [lo, hi] = uhat_limits(m);
    double prev = -HUGE_VAL;
    for (double x : linspace(-3.0, 3.0, 601)) {
      const double u = uhat(m, x);
      CHECK(u > prev);
      CHECK(u > lo);
      CHECK(u < hi);
      prev = u;
    }
  }
  const auto [lo, hi] = uhat_limits(ModelSpec(typical::bg));
  CHECK(lo == doctest::Approx(-5.5));
  CHECK(hi == doctest::Approx(34.5));
  CHECK(uhat(ModelSpec(typical::bg), 1e4) == doctest::Approx(34.5).epsilon(1e-3));
}

TEST_CASE("tangency identities") {
  for (const auto& m : typical_models()) {
    CAPTURE(m.name());
    const auto tp = tangency_points(m);
    CHECK(tp.x_minus < 0.0);
    CHECK(tp.x_plus > 0.0);
    CHECK(uhat(m, tp.x_minus) == doctest::Approx(-0.5).epsilon(1e-9));
    CHECK(uhat(m, tp.x_plus) == doctest::Approx(0.5).epsilon(1e-9));
    for (double xt : {tp.x_minus, tp.x_plus}) {
      CHECK(std::abs(omega(m, xt) - std::abs(xt) / 2) < 1e-10);
      const double h = 1e-5 * std::abs(xt);
      const double d = (omega(m, xt + h) - omega(m, xt - h)) / (2 * h);
      CHECK(std::abs(d - std::copysign(0.5, xt)) < 1e-8);
    }
  }
}

TEST_CASE("saddle point record") {
  const ModelSpec m(typical::bg);
  const auto sp = saddle_point(m, 0.1);
  CHECK(sp.x == 0.1);
  CHECK(sp.omega == doctest::Approx(sp.u_hat * sp.x + sp.psi_at_saddle).epsilon(1e-14));
  CHECK(sp.psi_at_saddle == doctest::Approx(-cumulant(m, sp.ubar())).epsilon(1e-10));
  CHECK(sp.omega >= 0.05);
  CHECK_THROWS_AS(uhat_numeric(m, 0.1, 0.0), DomainError);
  CHECK_THROWS_AS(uhat_numeric(m, NAN), DomainError);
}
