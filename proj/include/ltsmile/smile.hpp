#pragma once

#include <span>
#include <vector>

#include "ltsmile/saddle.hpp"

namespace ltsmile {

struct SmileSlice {
  std::vector<double> x_grid;
  std::vector<double> omega;
  std::vector<double> omega_bar;  // signed: negative inside (x-, x+)
  std::vector<double> v;
  TangencyPoints x_pm;
  double x0;  // NaN when the model has no branch-matching point
};

struct TotalVarianceSlice {
  double T;
  std::vector<double> k_grid;
  std::vector<double> w;
};

double omega(const ModelSpec& model, double x, SaddleMethod method = SaddleMethod::Auto);

// Root of v/8 + x^2/(2v) = omega_val; larger root inside the tangency interval.
double variance_from_omega(double omega_val, double x, bool inside_tangency);

// Large-time implied variance v(x).
double implied_variance(const ModelSpec& model, double x,
                        SaddleMethod method = SaddleMethod::Auto);

SmileSlice build_smile(const ModelSpec& model, std::span<const double> x_grid,
                       SaddleMethod method = SaddleMethod::Auto);

double heston_omega_bar(const HestonParams& p, double x);
double heston_smile_closed(const HestonParams& p, double x);

double vg_omega_bar_approx(const VGParams& p, double x);
double vg_smile_approx(const VGParams& p, double x);

// w solving w/8 + k^2/(2w) = omega(k/T) T.
double total_variance(const ModelSpec& model, double k, double T,
                      SaddleMethod method = SaddleMethod::Auto);
TotalVarianceSlice total_variance_slice(const ModelSpec& model, std::span<const double> k_grid,
                                        double T, SaddleMethod method = SaddleMethod::Auto);

// psi''(u~) at the saddle for x, equal to kappa''(ubar).
double esscher_variance(const ModelSpec& model, double x);
double bg_psi2(const BGParams& p, double u_hat);

// v(x) with the 1/T correction.
double first_order_smile(const ModelSpec& model, double x, double T);

// lim_{T->0} w(k, T) for models whose omega has linear wings.
double small_time_total_variance(const ModelSpec& model, double k);

}  // namespace ltsmile
