#include "ltsmile/pricer.hpp"

#include <fftw3.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>
#include <algorithm>
#include <cmath>
#include <iomanip>
#include <mutex>
#include <numbers>
#include <ostream>
#include <sstream>

#include "ltsmile/charfn.hpp"
#include "ltsmile/saddle.hpp"
#include "ltsmile/smile.hpp"

namespace ltsmile {

namespace {

constexpr double kTailTol = 1e-10;
constexpr double kPi = std::numbers::pi;

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }
double norm_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi); }

void check_tail(const ModelSpec& model, double u, double T) {
  const double t = lewis_tail(model, u, T);
  if (!(t < kTailTol)) {
    std::ostringstream os;
    os << "integrand not decayed at u_max = " << u << " (|phi|/u^2 = " << t << ")";
    throw TruncationError(os.str());
  }
}

// Panels of GK61 over [0, u_max), stopping once both the panel mass and the envelope vanish.
template <class F, class Env>
double panel_integral(const F& f, const Env& envelope, double k, double u_max) {
  double width = u_max / 64.0;
  if (k != 0.0) width = std::min(width, 4.0 * kPi / std::abs(k));
  double total = 0.0;
  for (double a = 0.0; a < u_max; a += width) {
    const double b = std::min(a + width, u_max);
    double err = 0.0;
    double l1 = 0.0;
    total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 12, 1e-14, &err, &l1);
    if (l1 < 1e-18 && envelope(b) < 1e-18) break;
  }
  return total;
}

// int_0^inf Re[exp(-iuk) phi_T(u - i/2)] / (u^2 + 1/4) du
double lewis_integral(const ModelSpec& model, double k, double T, double u_max) {
  check_tail(model, u_max, T);
  auto f = [&](double u) {
    const cplx z = std::exp(cplx(0.0, -u * k)) * phi(model, cplx(u, -0.5), T);
    return z.real() / (u * u + 0.25);
  };
  auto env = [&](double u) { return std::abs(phi(model, cplx(u, -0.5), T)) / (u * u + 0.25); };
  return panel_integral(f, env, k, u_max);
}

// Contour Im(u) = -c with c > 1 (call) or c < 0 (put), integrand scaled by 1 / E[exp(c X_T)].
double shifted_price(const ModelSpec& model, double k, double T, double c, double u_max) {
  const double log_m = std::log(phi(model, cplx(0.0, -c), T).real());
  auto scaled = [&](double u) { return phi(model, cplx(u, -c), T) * std::exp(-log_m); };
  const double tail = std::abs(scaled(u_max)) / (u_max * u_max);
  if (!(tail < kTailTol)) {
    std::ostringstream os;
    os << "shifted integrand not decayed at u_max = " << u_max << " (" << tail << ")";
    throw TruncationError(os.str());
  }
  auto f = [&](double u) {
    const cplx z = std::exp(cplx(0.0, -u * k)) * scaled(u) / (cplx(c, u) * cplx(c - 1.0, u));
    return z.real();
  };
  auto env = [&](double u) { return std::abs(scaled(u)) / (u * u + c * (c - 1.0)); };
  return std::exp((1.0 - c) * k + log_m) / kPi * panel_integral(f, env, k, u_max);
}

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

std::mutex& fftw_plan_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

void QuadratureConfig::validate() const {
  if (!(u_max > 0.0)) throw DomainError("QuadratureConfig: u_max must be positive");
  if (n_points < 256 || !power_of_two(n_points))
    throw DomainError("QuadratureConfig: n_points must be a power of two >= 256");
  if (!(fft_eta > 0.0)) throw DomainError("QuadratureConfig: fft_eta must be positive");
}

double lewis_tail(const ModelSpec& model, double u, double T) {
  return std::abs(phi(model, cplx(u, -0.5), T)) / (u * u);
}

QuadratureConfig default_quadrature(const ModelSpec& model, double T) {
  if (!(T > 0.0)) throw DomainError("default_quadrature: T must be positive");
  const double v_ref = implied_variance(model, 0.0);
  double u = 200.0 / std::sqrt(v_ref * T);
  for (int i = 0; i < 40 && !(lewis_tail(model, u, T) < kTailTol); ++i) u *= 2.0;
  check_tail(model, u, T);
  QuadratureConfig cfg{u, 1 << 14, 2.0 * kPi / (2.0 * T + 80.0)};
  while (cfg.n_points * cfg.fft_eta < u && cfg.n_points < (1 << 22)) cfg.n_points <<= 1;
  return cfg;
}

double lewis_call_price(const ModelSpec& model, double k, double T, const QuadratureConfig& cfg) {
  cfg.validate();
  return 1.0 - std::exp(0.5 * k) / kPi * lewis_integral(model, k, T, cfg.u_max);
}

double lewis_call_price(const ModelSpec& model, double k, double T) {
  return lewis_call_price(model, k, T, default_quadrature(model, T));
}

double lewis_put_price(const ModelSpec& model, double k, double T, const QuadratureConfig& cfg) {
  cfg.validate();
  return std::exp(k) - std::exp(0.5 * k) / kPi * lewis_integral(model, k, T, cfg.u_max);
}

double lewis_otm_price(const ModelSpec& model, double k, double T, const QuadratureConfig& cfg) {
  return k < 0.0 ? lewis_put_price(model, k, T, cfg) : lewis_call_price(model, k, T, cfg);
}

double otm_price(const ModelSpec& model, double k, double T, const QuadratureConfig& cfg) {
  cfg.validate();
  if (!(T > 0.0)) throw DomainError("otm_price: T must be positive");
  const auto tp = tangency_points(model);
  if (tp.inside(k / T)) return lewis_otm_price(model, k, T, cfg);
  // minimise the modulus of the integrand at u = 0 over the admissible strip
  auto g = [&](double c) { return std::log(phi(model, cplx(0.0, -c), T).real()) - c * k - std::log(c * (c - 1.0)); };
  const double ub = uhat(model, k / T) + 0.5;
  double lo = 0.0;
  double hi = 0.0;
  if (k > 0.0) {
    lo = 1.0 + 1e-6;
    hi = std::isfinite(model.ubar_hi()) ? model.ubar_hi() - 1e-9 * (model.ubar_hi() - 1.0) : std::max(4.0, 2.0 * ub);
  } else {
    hi = -1e-6;
    lo = std::isfinite(model.ubar_lo()) ? model.ubar_lo() - 1e-9 * model.ubar_lo() : std::min(-4.0, 2.0 * ub);
  }
  const double c = boost::math::tools::brent_find_minima(g, lo, hi, 40).first;
  return shifted_price(model, k, T, c, cfg.u_max);
}

double otm_price(const ModelSpec& model, double k, double T) {
  return otm_price(model, k, T, default_quadrature(model, T));
}

FFTSlice::FFTSlice(const ModelSpec& model, double T, const QuadratureConfig& cfg) {
  cfg.validate();
  const int n = cfg.n_points;
  const double eta = cfg.fft_eta;
  check_tail(model, n * eta, T);
  dk_ = 2.0 * kPi / (n * eta);
  k_min_ = -0.5 * n * dk_;

  fftw_complex* buf = fftw_alloc_complex(static_cast<std::size_t>(n));
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    plan = fftw_plan_dft_1d(n, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
  }
  for (int j = 0; j < n; ++j) {
    const double u = j * eta;
    // trapezoid weights on the even integrand; (-1)^j centres the log-strike grid on k = 0
    const double w = (j == 0 ? 0.5 : 1.0) * eta * ((j & 1) ? -1.0 : 1.0);
    const cplx f = w * phi(model, cplx(u, -0.5), T) / (u * u + 0.25);
    buf[j][0] = f.real();
    buf[j][1] = f.imag();
  }
  fftw_execute(plan);
  integral_.resize(static_cast<std::size_t>(n));
  for (int m = 0; m < n; ++m) integral_[static_cast<std::size_t>(m)] = buf[m][0];
  {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(buf);
}

double FFTSlice::integral(double k) const {
  const double t = (k - k_min_) / dk_;
  const auto n = static_cast<long>(integral_.size());
  const long r = std::lround(t);
  if (std::abs(t - static_cast<double>(r)) < 1e-9 && r >= 0 && r < n) return integral_[static_cast<std::size_t>(r)];
  constexpr long kOrder = 8;
  long j0 = static_cast<long>(std::floor(t)) - kOrder / 2 + 1;
  if (j0 < 0 || j0 + kOrder > n) throw DomainError("FFTSlice: log-strike outside the FFT grid");
  double acc = 0.0;
  for (long i = 0; i < kOrder; ++i) {
    double li = 1.0;
    for (long j = 0; j < kOrder; ++j) {
      if (j != i) li *= (t - static_cast<double>(j0 + j)) / static_cast<double>(i - j);
    }
    acc += li * integral_[static_cast<std::size_t>(j0 + i)];
  }
  return acc;
}

double FFTSlice::call(double k) const { return 1.0 - std::exp(0.5 * k) / kPi * integral(k); }
double FFTSlice::put(double k) const { return std::exp(k) - std::exp(0.5 * k) / kPi * integral(k); }
double FFTSlice::otm(double k) const { return k < 0.0 ? put(k) : call(k); }

std::vector<double> fft_call_prices(const ModelSpec& model, std::span<const double> k, double T,
                                    const QuadratureConfig& cfg) {
  const FFTSlice s(model, T, cfg);
  std::vector<double> out;
  out.reserve(k.size());
  for (double kk : k) out.push_back(s.call(kk));
  return out;
}

double bs_call(double k, double w) {
  if (!(w > 0.0)) return std::max(0.0, 1.0 - std::exp(k));
  const double s = std::sqrt(w);
  const double d1 = -k / s + 0.5 * s;
  return norm_cdf(d1) - std::exp(k) * norm_cdf(d1 - s);
}

double bs_put(double k, double w) {
  if (!(w > 0.0)) return std::max(0.0, std::exp(k) - 1.0);
  const double s = std::sqrt(w);
  const double d1 = -k / s + 0.5 * s;
  return std::exp(k) * norm_cdf(s - d1) - norm_cdf(-d1);
}

double bs_otm(double k, double w) { return k < 0.0 ? bs_put(k, w) : bs_call(k, w); }

double implied_vol_otm(double price, double k, double T) {
  if (!(T > 0.0)) throw DomainError("implied_vol: T must be positive");
  if (!std::isfinite(price) || !(price > 0.0)) throw NoSolution("implied_vol: price at or below intrinsic");
  if (!(price < std::min(1.0, std::exp(k)))) throw NoSolution("implied_vol: price above the no-arbitrage cap");
  const double rt = std::sqrt(T);
  double a = 1e-6 * rt;
  double b = 5.0 * rt;
  if (price < bs_otm(k, a * a)) throw NoSolution("implied_vol: price below the 1e-6 vol floor");
  if (price > bs_otm(k, b * b)) throw NoSolution("implied_vol: price above the vol cap of 5");
  const double lp = std::log(price);

  double s = std::clamp(std::sqrt(2.0 * std::abs(k)) + std::sqrt(2.0 * kPi) * price, a, b);
  bool done = false;
  for (int it = 0; it < 100 && !done; ++it) {
    const double p = bs_otm(k, s * s);
    if (!(p > 0.0)) {
      a = s;
      s = std::sqrt(a * b);
      continue;
    }
    const double g = std::log(p) - lp;
    if (std::abs(g) < 1e-15) break;
    if (g < 0.0) a = s; else b = s;
    const double d1 = -k / s + 0.5 * s;
    double next = s - g * p / norm_pdf(d1);
    if (!std::isfinite(next) || next <= a || next >= b) next = 0.5 * (a + b);
    done = std::abs(next - s) <= 1e-16 * s;
    s = next;
  }
  if (std::abs(bs_otm(k, s * s) - price) > 1e-13 * std::max(price, 1e-3)) {
    auto f = [&](double x) { return bs_otm(k, x * x) - price; };
    std::uintmax_t iters = 200;
    const auto r = boost::math::tools::toms748_solve(f, a, b, boost::math::tools::eps_tolerance<double>(52), iters);
    s = 0.5 * (r.first + r.second);
  }
  return s / rt;
}

double implied_vol_bs(double call_price, double k, double T) {
  if (!(call_price < 1.0)) throw NoSolution("implied_vol: call price must be below 1");
  if (k >= 0.0) return implied_vol_otm(call_price, k, T);
  return implied_vol_otm(call_price - 1.0 + std::exp(k), k, T);
}

std::vector<ConvergenceRow> convergence_study(const ModelSpec& model, std::span<const double> T_list,
                                              std::span<const double> x_grid) {
  if (T_list.empty() || x_grid.empty()) throw DomainError("convergence_study: empty input");
  const auto tp = tangency_points(model);
  std::vector<double> v_lim;
  v_lim.reserve(x_grid.size());
  for (double x : x_grid) v_lim.push_back(std::sqrt(variance_from_omega(omega(model, x), x, tp.inside(x))));

  std::vector<ConvergenceRow> rows;
  for (double T : T_list) {
    if (!(T >= 0.05)) throw DomainError("convergence_study: T below 0.05 is not supported");
    const auto cfg = default_quadrature(model, T);
    const FFTSlice slice(model, T, cfg);
    for (std::size_t i = 0; i < x_grid.size(); ++i) {
      const double x = x_grid[i];
      const double k = x * T;
      double vol = std::numeric_limits<double>::quiet_NaN();
      try {
        const double price = tp.inside(x) ? slice.otm(k) : otm_price(model, k, T, cfg);
        vol = implied_vol_otm(price, k, T);
      } catch (const NoSolution&) {
      }
      rows.push_back({model.name(), T, x, vol, v_lim[i], std::abs(vol - v_lim[i])});
    }
  }
  return rows;
}

void write_convergence_csv(std::ostream& os, const std::vector<ConvergenceRow>& rows) {
  os << "model,T,x,vol_fft,vol_limit,abs_err\n";
  os << std::setprecision(17);
  for (const auto& r : rows)
    os << r.model << ',' << r.T << ',' << r.x << ',' << r.vol_fft << ',' << r.vol_limit << ',' << r.abs_err
       << '\n';
}

}  // namespace ltsmile
