#include "ltsmile/smile.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "ltsmile/charfn.hpp"

namespace ltsmile {

double omega(const ModelSpec& model, double x, SaddleMethod method) {
  return saddle_point(model, x, method).omega;
}

double variance_from_omega(double omega_val, double x, bool inside_tangency) {
  const double half = 0.5 * std::abs(x);
  if (!(omega_val >= half - 1e-12)) {
    std::ostringstream os;
    os << "omega = " << omega_val << " below |x|/2 = " << half << " at x = " << x;
    throw DomainError(os.str());
  }
  const double disc = std::max(0.0, (omega_val - half) * (omega_val + half));
  const double s = std::sqrt(disc);
  if (inside_tangency) return 4.0 * (omega_val + s);
  if (omega_val + s == 0.0) return 0.0;
  return x * x / (omega_val + s);
}

double implied_variance(const ModelSpec& model, double x, SaddleMethod method) {
  const auto tp = tangency_points(model, method);
  return variance_from_omega(omega(model, x, method), x, tp.inside(x));
}

SmileSlice build_smile(const ModelSpec& model, std::span<const double> x_grid, SaddleMethod method) {
  SmileSlice s;
  s.x_grid.assign(x_grid.begin(), x_grid.end());
  s.x_pm = tangency_points(model, method);
  try {
    s.x0 = branch_match_x0(model);
  } catch (const UnsupportedModel&) {
    s.x0 = std::numeric_limits<double>::quiet_NaN();
  }
  const std::size_t n = x_grid.size();
  s.omega.resize(n);
  s.omega_bar.resize(n);
  s.v.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = x_grid[i];
    const double w = omega(model, x, method);
    const bool in = s.x_pm.inside(x);
    s.omega[i] = w;
    s.v[i] = variance_from_omega(w, x, in);
    s.omega_bar[i] = w - 0.25 * s.v[i];
  }
  return s;
}

double heston_omega_bar(const HestonParams& p, double x) {
  const auto c = heston_constants(p);
  const double y = x - c.m;
  const double s = std::sqrt(1.0 + c.xi * c.xi * y * y / c.A2);
  return -c.K0 - c.K1 * y - c.K2 * s;
}

double heston_smile_closed(const HestonParams& p, double x) {
  p.validate();
  const auto c = heston_constants(p);
  const double y = x - c.m;
  const double s = std::sqrt(1.0 + c.xi * c.xi * y * y / c.A2);
  const double lead = (p.lambda / c.xi) * (1.0 - 0.5 * c.a);
  return 4.0 * (c.K - 1.0) * (lead + (c.B / c.A2) * y - (c.B * c.D / c.xi) * s / c.K);
}

double vg_omega_bar_approx(const VGParams& p, double x) {
  const auto c = vg_constants(p);
  const double y = x - c.x0;
  const double r = std::sqrt(1.0 + c.eta2 * y * y);
  const double nu2 = p.nu * p.nu;
  return -c.x0 / (2.0 * c.K) * (1.0 - c.alpha / c.xi) - c.xi / (2.0 * c.alpha) * c.K * y +
         (c.eta2 * y * y / (r + 1.0)) / (c.K * p.nu) +
         std::log((2.0 * c.alpha / nu2) * c.eta2 / (r + 1.0)) / (c.K * p.nu);
}

double vg_smile_approx(const VGParams& p, double x) {
  const ModelSpec m(p);
  return 4.0 * (omega_closed(m, x) - vg_omega_bar_approx(p, x));
}

double total_variance(const ModelSpec& model, double k, double T, SaddleMethod method) {
  if (!(T > 0.0)) throw DomainError("total_variance: T must be positive");
  return T * implied_variance(model, k / T, method);
}

TotalVarianceSlice total_variance_slice(const ModelSpec& model, std::span<const double> k_grid,
                                        double T, SaddleMethod method) {
  if (!(T > 0.0)) throw DomainError("total_variance: T must be positive");
  TotalVarianceSlice s{T, {k_grid.begin(), k_grid.end()}, {}};
  const auto tp = tangency_points(model, method);
  s.w.reserve(k_grid.size());
  for (double k : k_grid) {
    const double x = k / T;
    s.w.push_back(T * variance_from_omega(omega(model, x, method), x, tp.inside(x)));
  }
  return s;
}

double bg_psi2(const BGParams& p, double u_hat) {
  const double lp = p.lambda_p - 0.5;
  const double lm = p.lambda_m + 0.5;
  const double a = 1.0 - u_hat / lp;
  const double b = 1.0 + u_hat / lm;
  return p.alpha_p / (lp * lp) / (a * a) + p.alpha_m / (lm * lm) / (b * b);
}

double esscher_variance(const ModelSpec& model, double x) {
  const double u = uhat(model, x);
  if (model.kind() == ModelKind::BG) return bg_psi2(model.get<BGParams>(), u);
  return cumulant_slope(model, u + 0.5)[1];
}

double first_order_smile(const ModelSpec& model, double x, double T) {
  if (!(T > 0.0)) throw DomainError("first_order_smile: T must be positive");
  const auto tp = tangency_points(model);
  for (double xt : {tp.x_minus, tp.x_plus}) {
    if (std::abs(x - xt) < 1e-4 * (1.0 + std::abs(xt)))
      throw SingularityError("first_order_smile: x too close to a tangency point");
  }
  const auto sp = saddle_point(model, x);
  const double v = variance_from_omega(sp.omega, x, tp.inside(x));
  const double p2 = model.kind() == ModelKind::BG ? bg_psi2(model.get<BGParams>(), sp.u_hat)
                                                  : cumulant_slope(model, sp.ubar())[1];
  const double r = x / v;
  const double arg = ((0.25 - r * r) / (0.25 - sp.u_hat * sp.u_hat)) * std::sqrt(v / p2);
  return v + 8.0 * v * v / (4.0 * x * x - v * v) * std::log(arg) / T;
}

double small_time_total_variance(const ModelSpec& model, double k) {
  double call = 0.0;
  double put = 0.0;
  switch (model.kind()) {
    case ModelKind::VG: {
      const auto c = vg_constants(model.get<VGParams>());
      const double r = c.xi / (2.0 * c.alpha);
      const double en = std::sqrt(c.eta2) / model.get<VGParams>().nu;
      call = en - r;
      put = en + r;
      break;
    }
    case ModelKind::BG:
    case ModelKind::CGMY: {
      const auto lim = uhat_limits(model);
      call = lim.second;
      put = -lim.first;
      break;
    }
    default:
      throw UnsupportedModel("small-time limit needs bounded saddle points; not available for " +
                             model.name());
  }
  if (k == 0.0) return 0.0;
  return k > 0.0 ? k / (2.0 * call) : -k / (2.0 * put);
}

}  // namespace ltsmile
