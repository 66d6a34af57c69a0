#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ltsmile/model.hpp"

namespace ltsmile {

struct QuadratureConfig {
  double u_max;    // truncation of the Lewis integral
  int n_points;    // FFT grid size, power of two
  double fft_eta;  // FFT spacing in u
  void validate() const;
};

// u_max = 200 / sqrt(v_ref T), doubled until the integrand has decayed;
// FFT spacing gives a log-strike period of 2T + 80.
QuadratureConfig default_quadrature(const ModelSpec& model, double T);

// |phi_T(u - i/2)| / u^2, the truncation diagnostic.
double lewis_tail(const ModelSpec& model, double u, double T);

// Undiscounted call and put on a unit forward, log-strike k, contour Im(u) = -1/2.
double lewis_call_price(const ModelSpec& model, double k, double T, const QuadratureConfig& cfg);
double lewis_call_price(const ModelSpec& model, double k, double T);
double lewis_put_price(const ModelSpec& model, double k, double T, const QuadratureConfig& cfg);
// Out-of-the-money option: put for k < 0, call otherwise.
double lewis_otm_price(const ModelSpec& model, double k, double T, const QuadratureConfig& cfg);

// Out-of-the-money price with relative accuracy in the wings: beyond the tangency points the
// contour Im(u) = -c minimises the integrand modulus at u = 0 instead of using c = 1/2.
// c is confined to the large-time moment strip, which limits Heston at short T and |k / T| >> 1.
double otm_price(const ModelSpec& model, double k, double T, const QuadratureConfig& cfg);
double otm_price(const ModelSpec& model, double k, double T);

// One FFT sweep of the Lewis integral on a centred log-strike grid.
class FFTSlice {
 public:
  FFTSlice(const ModelSpec& model, double T, const QuadratureConfig& cfg);
  double k_min() const { return k_min_; }
  double dk() const { return dk_; }
  std::size_t size() const { return integral_.size(); }
  double k_at(std::size_t j) const { return k_min_ + dk_ * static_cast<double>(j); }
  double call(double k) const;
  double put(double k) const;
  double otm(double k) const;

 private:
  double integral(double k) const;
  double k_min_;
  double dk_;
  std::vector<double> integral_;
};

std::vector<double> fft_call_prices(const ModelSpec& model, std::span<const double> k, double T,
                                    const QuadratureConfig& cfg);

// Black-Scholes on a unit forward with total variance w.
double bs_call(double k, double w);
double bs_put(double k, double w);
double bs_otm(double k, double w);

// Implied vol from an undiscounted call price on a unit forward.
double implied_vol_bs(double call_price, double k, double T);
// Same, from the out-of-the-money option price (put for k < 0).
double implied_vol_otm(double otm_price, double k, double T);

struct ConvergenceRow {
  std::string model;
  double T;
  double x;
  double vol_fft;
  double vol_limit;
  double abs_err;
};

// FFT prices inside the tangency interval, otm_price beyond it.
std::vector<ConvergenceRow> convergence_study(const ModelSpec& model, std::span<const double> T_list,
                                              std::span<const double> x_grid);
void write_convergence_csv(std::ostream& os, const std::vector<ConvergenceRow>& rows);

}  // namespace ltsmile
