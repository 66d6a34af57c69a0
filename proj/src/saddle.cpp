#include "ltsmile/saddle.hpp"

#include <boost/math/special_functions/lambert_w.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <limits>
#include <sstream>

#include "ltsmile/charfn.hpp"

namespace ltsmile {

HestonConstants heston_constants(const HestonParams& p) {
  HestonConstants c{};
  const double re = p.rho * p.eta;
  c.A2 = p.eta * p.eta * (1.0 - p.rho * p.rho);
  c.A = std::sqrt(c.A2);
  c.B = re * (p.lambda - 0.5 * re);
  c.C2 = (p.lambda - 0.5 * re) * (p.lambda - 0.5 * re) + 0.25 * p.eta * p.eta;
  c.D = std::sqrt(1.0 / c.A2 + c.C2 / (c.B * c.B));
  c.xi = p.eta * p.eta / (p.lambda * p.v_bar);
  c.m = -re / c.xi;
  c.a = re / p.lambda;
  c.K = std::sqrt(1.0 + (c.a * c.A2 / (4.0 * c.B)) / (1.0 - 0.5 * c.a));
  c.K0 = (p.lambda / c.xi) * (1.0 - 0.5 * c.a) * c.K;
  c.K1 = (c.B / c.A2) * c.K;
  c.K2 = (c.B * c.D / c.xi) / c.K;
  return c;
}

HestonOverconstraint heston_overconstraint(const HestonParams& p) {
  const auto c = heston_constants(p);
  const double l = p.lambda / c.xi * (1.0 - 0.5 * c.a);
  const double bd = c.B * c.D / c.xi;
  const double ba = c.B / c.A2;
  HestonOverconstraint r{};
  r.lhs1 = c.K0 * c.K0 + c.K2 * c.K2;
  r.rhs1 = l * l + bd * bd - 0.25 * c.m * c.m;
  r.lhs2 = c.K1 * c.K1 + c.K2 * c.K2 * c.xi * c.xi / c.A2;
  r.rhs2 = ba * ba + c.xi * c.xi * bd * bd / c.A2 - 0.25;
  return r;
}

VGConstants vg_constants(const VGParams& p) {
  VGConstants c{};
  const double s2 = p.sigma * p.sigma;
  c.alpha = 0.5 * s2 * p.nu;
  c.beta = 1.0 - 0.5 * p.theta * p.nu - 0.125 * s2 * p.nu;
  c.xi = (p.theta + 0.5 * s2) * p.nu;
  const double r = c.xi / (2.0 * c.alpha);
  c.c = r * r + c.beta / c.alpha;
  c.eta2 = p.nu * p.nu * c.c;
  c.x0 = std::log1p(-c.xi) / p.nu;
  const double ell = std::log(c.alpha * c.eta2 / (p.nu * p.nu));
  const double q = c.x0 * p.nu / ell;
  c.K = (1.0 - 0.5 * (1.0 - c.alpha / c.xi) * q) / std::sqrt(1.0 - q);
  return c;
}

BGConstants bg_constants(const BGParams& p) {
  return {p.lambda_p - 0.5, p.lambda_m + 0.5,
          -p.alpha_p * std::log1p(-1.0 / p.lambda_p) - p.alpha_m * std::log1p(1.0 / p.lambda_m)};
}

CGMYConstants cgmy_constants(const CGMYParams& p) {
  CGMYConstants c{};
  const double Y = p.Y;
  c.Gbar = p.G + 0.5;
  c.Mbar = p.M - 0.5;
  c.xi = c.Mbar / c.Gbar;
  const double MY = std::pow(p.M, Y);
  const double GY = std::pow(p.G, Y);
  const double kcy = MY * std::expm1(Y * std::log1p(-1.0 / p.M)) +
                     GY * std::expm1(Y * std::log1p(1.0 / p.G));
  c.Kc = kcy / Y;
  const double num = MY * std::expm1(Y * std::log1p(-0.5 / p.M)) +
                     GY * std::expm1(Y * std::log1p(0.5 / p.G)) - 0.5 * kcy;
  c.Kbar = num / (Y * (Y - 1.0) * std::pow(c.Gbar, Y));
  c.pre = p.C * Y * (Y - 1.0) * gamma_neg(Y);
  return c;
}

namespace {

bool has_closed(const ModelSpec& m) {
  switch (m.kind()) {
    case ModelKind::BS:
    case ModelKind::VG:
    case ModelKind::BG:
      return true;
    case ModelKind::Heston:
      return m.get<HestonParams>().rho > -1.0;
    default:
      return false;
  }
}

double cgmy_sigma(const CGMYConstants& c, const CGMYParams& p, double x) {
  return x / (c.pre * std::pow(c.Gbar, p.Y - 2.0));
}

double merton_guess(const MertonParams& p, double x) {
  const double s2 = p.sigma * p.sigma / p.lambda;
  const double theta = std::expm1(p.alpha + 0.5 * p.delta * p.delta);
  if (std::abs(x) < p.lambda || p.delta == 0.0) {
    return (x / p.lambda + 0.5 * s2 + theta - p.alpha) / (s2 + p.delta * p.delta);
  }
  const double r = p.alpha / p.delta;
  const double q = x / (p.lambda * p.delta);
  // log of the Lambert-W argument, kept finite for large |x|
  const double log_arg = r * r + 2.0 * std::log(std::abs(q));
  double w;
  if (log_arg < 700.0) {
    w = boost::math::lambert_w0(std::exp(log_arg));
  } else {
    w = log_arg - std::log(log_arg);
  }
  return (std::copysign(p.delta * std::sqrt(w), x) - p.alpha) / (p.delta * p.delta);
}

}  // namespace

double uhat_closed(const ModelSpec& model, double x, bool strict) {
  switch (model.kind()) {
    case ModelKind::BS:
      return x / model.get<BSParams>().v;
    case ModelKind::Heston: {
      const auto& p = model.get<HestonParams>();
      if (!(p.rho > -1.0)) throw DomainError("Heston closed form requires rho > -1");
      const auto c = heston_constants(p);
      const double y = x - c.m;
      const double s = std::sqrt(1.0 + c.xi * c.xi * y * y / c.A2);
      return (c.B / c.A2) * (-c.xi * c.D * y / s - 1.0);
    }
    case ModelKind::VG: {
      const auto& p = model.get<VGParams>();
      const auto c = vg_constants(p);
      const double S = p.nu * (x - c.x0);
      return -c.xi / (2.0 * c.alpha) + c.c * S / (std::sqrt(1.0 + c.c * S * S) + 1.0);
    }
    case ModelKind::BG: {
      const auto& p = model.get<BGParams>();
      const auto c = bg_constants(p);
      const double y = c.K + x;
      const double L = c.lbar_p + c.lbar_m;
      const double da = p.alpha_p - p.alpha_m;
      const double S = p.alpha_p + p.alpha_m;
      const double Q = 4.0 * p.alpha_p * p.alpha_m + (L * y - da) * (L * y - da);
      return 0.5 * (c.lbar_p - c.lbar_m) + L * (L * y - 2.0 * da) / (2.0 * (std::sqrt(Q) + S));
    }
    case ModelKind::CGMY: {
      const auto& p = model.get<CGMYParams>();
      if (strict && p.Y > 0.5) throw ApproximationWarning("CGMY small-Y approximation used with Y > 0.5");
      const auto c = cgmy_constants(p);
      const double e = std::pow(c.xi, p.Y - 2.0);
      const double S = cgmy_sigma(c, p, x);
      const double gi = 1.0 / c.Gbar;
      const double mi = 1.0 / c.Mbar;
      const double t = (gi + mi) * S - (1.0 - e);
      const double N = 0.5 * (1.0 + e) - 0.5 * (gi - mi) * S + std::sqrt(0.25 * t * t + e);
      return S / N;
    }
    case ModelKind::Merton:
      throw UnsupportedModel("Merton has no closed-form saddle point");
  }
  return 0.0;
}

double omega_closed(const ModelSpec& model, double x, bool strict) {
  switch (model.kind()) {
    case ModelKind::BS: {
      const double v = model.get<BSParams>().v;
      return v / 8.0 + x * x / (2.0 * v);
    }
    case ModelKind::Heston: {
      const auto& p = model.get<HestonParams>();
      if (!(p.rho > -1.0)) throw DomainError("Heston closed form requires rho > -1");
      const auto c = heston_constants(p);
      const double y = x - c.m;
      const double s = std::sqrt(1.0 + c.xi * c.xi * y * y / c.A2);
      return -(p.lambda / c.xi) * (1.0 - 0.5 * c.a) - (c.B / c.A2) * y - (c.B * c.D / c.xi) * s;
    }
    case ModelKind::VG: {
      const auto& p = model.get<VGParams>();
      const auto c = vg_constants(p);
      const double y = x - c.x0;
      const double r = std::sqrt(1.0 + c.eta2 * y * y);
      const double nu2 = p.nu * p.nu;
      return -0.5 * c.x0 - c.xi / (2.0 * c.alpha) * y + (c.eta2 * y * y / (r + 1.0)) / p.nu +
             std::log((2.0 * c.alpha / nu2) * c.eta2 / (r + 1.0)) / p.nu;
    }
    case ModelKind::BG: {
      const auto& p = model.get<BGParams>();
      const auto c = bg_constants(p);
      const double y = c.K + x;
      const double L = c.lbar_p + c.lbar_m;
      const double da = p.alpha_p - p.alpha_m;
      const double S = p.alpha_p + p.alpha_m;
      const double u = uhat_closed(model, x);
      const double lin = 0.5 * L * y - 0.5 * da;
      return (0.5 * c.K + p.alpha_p * std::log1p(-0.5 / p.lambda_p) +
              p.alpha_m * std::log1p(0.5 / p.lambda_m) - 0.5 * S) -
             0.5 * (c.lbar_m - c.lbar_p) * y + std::sqrt(p.alpha_p * p.alpha_m + lin * lin) +
             p.alpha_p * std::log1p(-u / c.lbar_p) + p.alpha_m * std::log1p(u / c.lbar_m);
    }
    case ModelKind::CGMY: {
      const auto& p = model.get<CGMYParams>();
      const auto c = cgmy_constants(p);
      const double u = uhat_closed(model, x, strict);
      const double S = cgmy_sigma(c, p, x);
      const double xiY = std::pow(c.xi, p.Y);
      return c.pre * std::pow(c.Gbar, p.Y) *
             (-c.Kbar + (S / (c.Gbar * c.Gbar) - (1.0 / c.Gbar - xiY / c.Mbar)) * u +
              std::log1p(u / c.Gbar) + xiY * std::log1p(-u / c.Mbar));
    }
    case ModelKind::Merton:
      throw UnsupportedModel("Merton has no closed-form omega");
  }
  return 0.0;
}

double uhat_numeric(const ModelSpec& model, double x, double tol) {
  if (!(tol > 0.0)) throw DomainError("uhat_numeric: tol must be positive");
  if (!std::isfinite(x)) throw DomainError("uhat_numeric: x must be finite");
  const double lo = model.ubar_lo();
  const double hi = model.ubar_hi();
  const double target = tol * (1.0 + std::abs(x));

  double g = 0.5;
  if (model.kind() == ModelKind::Merton) g = merton_guess(model.get<MertonParams>(), x);
  if (!model.in_domain(g)) g = 0.5 * (lo + hi);

  auto f = [&](double u) {
    auto d = cumulant_slope(model, u);
    return std::pair<double, double>{d[0] - x, d[1]};
  };

  // Finite domain ends act as virtual bracket points; infinite ends are found by expansion.
  double a = lo;
  double b = hi;
  auto [fg, dg] = f(g);
  if (fg <= 0.0) {
    a = g;
    if (!std::isfinite(hi)) {
      double step = std::max(1.0, std::abs(g));
      for (int i = 0;; ++i) {
        const double c = g + step;
        if (f(c).first >= 0.0) { b = c; break; }
        a = c;
        step *= 2.0;
        if (i > 200) throw DomainError("uhat_numeric: bracketing failed");
      }
    }
  } else {
    b = g;
    if (!std::isfinite(lo)) {
      double step = std::max(1.0, std::abs(g));
      for (int i = 0;; ++i) {
        const double c = g - step;
        if (f(c).first <= 0.0) { a = c; break; }
        b = c;
        step *= 2.0;
        if (i > 200) throw DomainError("uhat_numeric: bracketing failed");
      }
    }
  }

  double u = g;
  double fu = fg;
  double du = dg;
  for (int it = 0; it < 400; ++it) {
    if (std::abs(fu) <= target) return u - 0.5;
    if (fu < 0.0) a = u; else b = u;
    double next = u - fu / du;
    if (!std::isfinite(next) || next <= a || next >= b) next = 0.5 * (a + b);
    if (b - a <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(u))) {
      if (a == lo || b == hi) break;
      return u - 0.5;
    }
    u = next;
    std::tie(fu, du) = f(u);
    if (std::isnan(fu)) throw DomainError("uhat_numeric: cumulant slope is NaN");
  }
  if (a == lo || b == hi) {
    std::ostringstream os;
    os << model.name() << ": no saddle point for x = " << x << " inside the moment interval";
    throw DomainError(os.str());
  }
  throw ConvergenceError("uhat_numeric: no convergence");
}

double uhat(const ModelSpec& model, double x, SaddleMethod method) {
  if (method == SaddleMethod::Closed || (method == SaddleMethod::Auto && has_closed(model)))
    return uhat_closed(model, x);
  return uhat_numeric(model, x);
}

SaddlePoint saddle_point(const ModelSpec& model, double x, SaddleMethod method) {
  SaddlePoint sp{};
  sp.x = x;
  if (method == SaddleMethod::Closed || (method == SaddleMethod::Auto && has_closed(model))) {
    sp.u_hat = uhat_closed(model, x);
    sp.omega = omega_closed(model, x);
    sp.psi_at_saddle = sp.omega - sp.u_hat * x;
  } else {
    sp.u_hat = uhat_numeric(model, x);
    sp.psi_at_saddle = -cumulant(model, sp.u_hat + 0.5);
    sp.omega = sp.u_hat * x + sp.psi_at_saddle;
  }
  return sp;
}

TangencyPoints tangency_points(const ModelSpec& model, SaddleMethod method) {
  if (model.kind() == ModelKind::Heston && method != SaddleMethod::Numeric && has_closed(model)) {
    const auto& p = model.get<HestonParams>();
    const double a = p.rho * p.eta / p.lambda;
    return {-0.5 * p.v_bar, p.v_bar / (2.0 * (1.0 - a))};
  }
  if (model.kind() == ModelKind::CGMY && method == SaddleMethod::Closed) {
    auto solve = [&](double level) {
      auto f = [&](double x) { return uhat_closed(model, x) - level; };
      double a = 0.0;
      double b = std::copysign(1e-3, level);
      for (int i = 0; f(b) * f(a) > 0.0; ++i) {
        a = b;
        b *= 2.0;
        if (i > 60) throw ConvergenceError("tangency_points: bracketing failed");
      }
      if (b < a) std::swap(a, b);
      std::uintmax_t iters = 200;
      auto r = boost::math::tools::toms748_solve(f, a, b, boost::math::tools::eps_tolerance<double>(52),
                                                 iters);
      if (iters >= 200) throw ConvergenceError("tangency_points: root finder did not converge");
      return 0.5 * (r.first + r.second);
    };
    return {solve(-0.5), solve(0.5)};
  }
  return {cumulant_slope(model, 0.0)[0], cumulant_slope(model, 1.0)[0]};
}

double branch_match_x0(const ModelSpec& model) {
  switch (model.kind()) {
    case ModelKind::Heston:
      return heston_constants(model.get<HestonParams>()).m;
    case ModelKind::VG:
      return vg_constants(model.get<VGParams>()).x0;
    case ModelKind::BG:
      return -bg_constants(model.get<BGParams>()).K;
    case ModelKind::CGMY:
      return 0.0;
    default:
      throw UnsupportedModel("no branch-matching point for " + model.name());
  }
}

std::pair<double, double> uhat_limits(const ModelSpec& model) {
  return {model.ubar_lo() - 0.5, model.ubar_hi() - 0.5};
}

}  // namespace ltsmile
