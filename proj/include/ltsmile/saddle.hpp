#pragma once

#include <utility>

#include "ltsmile/model.hpp"

namespace ltsmile {

// Auto: closed forms for BS, Heston, VG, BG; exact numeric root for CGMY and Merton.
// Closed: closed forms everywhere they exist (CGMY uses its small-Y approximation).
// Numeric: root of kappa'(ubar) = x for every model.
enum class SaddleMethod { Auto, Closed, Numeric };

struct SaddlePoint {
  double x;
  double u_hat;
  double psi_at_saddle;
  double omega;
  double ubar() const { return u_hat + 0.5; }
};

struct TangencyPoints {
  double x_minus;
  double x_plus;
  bool inside(double x) const { return x > x_minus && x < x_plus; }
};

struct HestonConstants {
  double A2, A, B, C2, D, xi, m, a, K;
  double K0, K1, K2;
};

struct VGConstants {
  double alpha, beta, xi, c, eta2, x0, K;
};

struct BGConstants {
  double lbar_p, lbar_m, K;
};

struct CGMYConstants {
  double Gbar, Mbar, xi, Kc, Kbar, pre;  // pre = C Y (Y-1) Gamma(-Y)
};

HestonConstants heston_constants(const HestonParams& p);
VGConstants vg_constants(const VGParams& p);
BGConstants bg_constants(const BGParams& p);
CGMYConstants cgmy_constants(const CGMYParams& p);

// Both sides of the two redundant equations that pin the Heston omega-bar constants.
struct HestonOverconstraint {
  double lhs1, rhs1, lhs2, rhs2;
};
HestonOverconstraint heston_overconstraint(const HestonParams& p);

// strict: throw ApproximationWarning for CGMY with Y > 0.5.
double uhat_closed(const ModelSpec& model, double x, bool strict = false);
double omega_closed(const ModelSpec& model, double x, bool strict = false);

// Residual target is tol * (1 + |x|) on kappa'(ubar) - x.
double uhat_numeric(const ModelSpec& model, double x, double tol = 1e-12);

double uhat(const ModelSpec& model, double x, SaddleMethod method = SaddleMethod::Auto);
SaddlePoint saddle_point(const ModelSpec& model, double x,
                         SaddleMethod method = SaddleMethod::Auto);

TangencyPoints tangency_points(const ModelSpec& model, SaddleMethod method = SaddleMethod::Auto);
double branch_match_x0(const ModelSpec& model);

// (u_hat(-inf), u_hat(+inf)); infinite for BS and Merton.
std::pair<double, double> uhat_limits(const ModelSpec& model);

}  // namespace ltsmile
