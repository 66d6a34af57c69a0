#include "ltsmile/model.hpp"

#include <algorithm>
#include <numbers>

namespace ltsmile {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw DomainError(what);
}

bool finite_all(std::initializer_list<double> xs) {
  return std::all_of(xs.begin(), xs.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

void BSParams::validate() const {
  require(std::isfinite(v) && v > 0.0, "BS: v must be positive");
}

void HestonParams::validate() const {
  require(finite_all({v_bar, lambda, eta, rho}), "Heston: non-finite parameter");
  require(v_bar > 0.0 && lambda > 0.0 && eta > 0.0, "Heston: v_bar, lambda, eta must be positive");
  require(rho >= -1.0 && rho < 0.0, "Heston: rho must lie in [-1, 0)");
  require(2.0 * lambda * v_bar >= eta * eta, "Heston: Feller condition 2 lambda v_bar >= eta^2 violated");
  if (v0) require(std::isfinite(*v0) && *v0 >= 0.0, "Heston: v0 must be nonnegative");
}

void VGParams::validate() const {
  require(finite_all({sigma, theta, nu}), "VG: non-finite parameter");
  require(sigma > 0.0 && nu > 0.0, "VG: sigma and nu must be positive");
  require((theta + 0.5 * sigma * sigma) * nu < 1.0, "VG: (theta + sigma^2/2) nu must be < 1");
}

void BGParams::validate() const {
  require(finite_all({alpha_p, alpha_m, lambda_p, lambda_m}), "BG: non-finite parameter");
  require(alpha_p > 0.0 && alpha_m > 0.0 && lambda_m > 0.0, "BG: parameters must be positive");
  require(lambda_p > 1.0, "BG: lambda_p must exceed 1");
}

void CGMYParams::validate() const {
  require(finite_all({C, G, M, Y}), "CGMY: non-finite parameter");
  require(C > 0.0 && G > 0.0, "CGMY: C and G must be positive");
  require(M > 1.0, "CGMY: M must exceed 1");
  require(Y > 0.0 && Y < 1.0, "CGMY: Y must lie in (0, 1)");
}

void MertonParams::validate() const {
  require(finite_all({sigma, lambda, alpha, delta}), "Merton: non-finite parameter");
  require(sigma > 0.0 && lambda > 0.0, "Merton: sigma and lambda must be positive");
  require(delta >= 0.0, "Merton: delta must be nonnegative");
}

double gamma_neg(double y) {
  // Gamma(-y) Gamma(1+y) = pi / sin(-pi y)
  return -std::numbers::pi / (std::sin(std::numbers::pi * y) * std::exp(std::lgamma(1.0 + y)));
}

ModelSpec::ModelSpec(const BSParams& p) : params_(p) { init(); }
ModelSpec::ModelSpec(const HestonParams& p) : params_(p) { init(); }
ModelSpec::ModelSpec(const VGParams& p) : params_(p) { init(); }
ModelSpec::ModelSpec(const BGParams& p) : params_(p) { init(); }
ModelSpec::ModelSpec(const CGMYParams& p) : params_(p) { init(); }
ModelSpec::ModelSpec(const MertonParams& p) : params_(p) { init(); }

std::string ModelSpec::name() const {
  switch (kind()) {
    case ModelKind::BS: return "bs";
    case ModelKind::Heston: return "heston";
    case ModelKind::VG: return "vg";
    case ModelKind::BG: return "bg";
    case ModelKind::CGMY: return "cgmy";
    case ModelKind::Merton: return "merton";
  }
  return "?";
}

void ModelSpec::init() {
  std::visit([](const auto& p) { p.validate(); }, params_);
  switch (kind()) {
    case ModelKind::BS: break;
    case ModelKind::Heston: {
      const auto& p = std::get<HestonParams>(params_);
      // -A^2 z^2 + (eta^2 - 2 lambda rho eta) z + lambda^2 >= 0
      const double a2 = p.eta * p.eta * (1.0 - p.rho * p.rho);
      const double b = p.eta * p.eta - 2.0 * p.lambda * p.rho * p.eta;
      const double c = p.lambda * p.lambda;
      if (a2 > 0.0) {
        const double disc = std::sqrt(b * b + 4.0 * a2 * c);
        const double q = -0.5 * (b + disc);
        const double r1 = q / -a2;
        const double r2 = c / q;
        lo_ = std::min(r1, r2);
        hi_ = std::max(r1, r2);
      } else {
        lo_ = -c / b;
      }
      // beta = lambda - rho eta z must stay positive
      lo_ = std::max(lo_, p.lambda / (p.rho * p.eta));
      break;
    }
    case ModelKind::VG: {
      const auto& p = std::get<VGParams>(params_);
      c0_ = std::log1p(-(p.theta + 0.5 * p.sigma * p.sigma) * p.nu);
      // 1 - theta nu z - sigma^2 nu z^2 / 2 = 0
      const double a = 0.5 * p.sigma * p.sigma * p.nu;
      const double b = p.theta * p.nu;
      const double disc = std::sqrt(b * b + 4.0 * a);
      const double q = -0.5 * (b + std::copysign(disc, b));
      const double r1 = q / a;
      const double r2 = -1.0 / q;
      lo_ = std::min(r1, r2);
      hi_ = std::max(r1, r2);
      break;
    }
    case ModelKind::BG: {
      const auto& p = std::get<BGParams>(params_);
      c0_ = -p.alpha_p * std::log1p(-1.0 / p.lambda_p) - p.alpha_m * std::log1p(1.0 / p.lambda_m);
      lo_ = -p.lambda_m;
      hi_ = p.lambda_p;
      break;
    }
    case ModelKind::CGMY: {
      const auto& p = std::get<CGMYParams>(params_);
      c0_ = p.C * gamma_neg(p.Y);
      c1_ = std::pow(p.M, p.Y) * std::expm1(p.Y * std::log1p(-1.0 / p.M)) +
            std::pow(p.G, p.Y) * std::expm1(p.Y * std::log1p(1.0 / p.G));
      lo_ = -p.G;
      hi_ = p.M;
      break;
    }
    case ModelKind::Merton: {
      const auto& p = std::get<MertonParams>(params_);
      c0_ = std::expm1(p.alpha + 0.5 * p.delta * p.delta);
      break;
    }
  }
}

}  // namespace ltsmile
