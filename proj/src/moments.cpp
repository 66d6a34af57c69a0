#include "ltsmile/moments.hpp"

#include <cmath>
#include <limits>

#include "ltsmile/charfn.hpp"
#include "ltsmile/saddle.hpp"

namespace ltsmile {

double MomentExpansion::eval(double k) const {
  double r = 0.0;
  for (int n = 4; n >= 0; --n) r = r * k + w_coeffs[n];
  return r;
}

double atm_esscher_shift(const ModelSpec& model) {
  const double u0 = uhat_numeric(model, 0.0, 1e-14) + 0.5;
  return u0;
}

std::vector<double> esscher_central_moments(const ModelSpec& model, double ubar, int n_max) {
  if (n_max < 2 || n_max > 4) throw DomainError("esscher_central_moments: n_max must be 2, 3 or 4");
  const auto d = cumulant_derivatives(model, ubar);
  std::vector<double> m{1.0, 0.0, d[2]};
  if (n_max >= 3) m.push_back(d[3]);
  if (n_max >= 4) m.push_back(d[4] + 3.0 * d[2] * d[2]);
  return m;
}

MomentExpansion w_expansion_coeffs(const ModelSpec& model) {
  MomentExpansion e{};
  e.ubar0 = atm_esscher_shift(model);
  const auto d = cumulant_derivatives(model, e.ubar0);
  e.psi0 = -d[0];
  e.m2 = d[2];
  e.m3 = d[3];
  e.m4 = d[4] + 3.0 * d[2] * d[2];
  const double p = e.psi0;
  const double u = e.ubar0;
  const double m2 = e.m2;
  const double m3 = e.m3;
  const double q = 3.0 * m2 * m2 * m2 + 3.0 * m3 * m3 - m2 * e.m4;
  e.w_coeffs[0] = 8.0 * p;
  e.w_coeffs[1] = -8.0 * (0.5 - u);
  e.w_coeffs[2] = 4.0 * (1.0 / m2 - 1.0 / (8.0 * p));
  e.w_coeffs[3] = -(8.0 / 6.0) * (m3 / (m2 * m2 * m2) - (6.0 * u - 3.0) / (16.0 * p * p));
  e.w_coeffs[4] = (8.0 / 24.0) * (q / std::pow(m2, 5) + 3.0 / (4.0 * p * p * m2) -
                                  3.0 * (16.0 * u * u - 16.0 * u + 5.0) / (32.0 * p * p * p));
  return e;
}

double lee_beta(double L) {
  if (std::isinf(L)) return 0.0;
  if (!(L >= 0.5)) throw DomainError("lee_beta: wing saddle limit must be at least 1/2");
  return 1.0 / (L + std::sqrt((L - 0.5) * (L + 0.5)));
}

LeeWings lee_wings(const ModelSpec& model) {
  const auto [lo, hi] = uhat_limits(model);
  LeeWings w{};
  w.beta_minus = lee_beta(-lo);
  w.beta_plus = lee_beta(hi);
  w.p_tilde = hi - 0.5;
  w.q_tilde = -lo - 0.5;
  return w;
}

}  // namespace ltsmile
