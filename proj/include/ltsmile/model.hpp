#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <type_traits>
#include <variant>

#include "ltsmile/errors.hpp"

namespace ltsmile {

enum class ModelKind { BS, Heston, VG, BG, CGMY, Merton };

struct BSParams {
  double v;  // annualized variance
  void validate() const;
};

struct HestonParams {
  double v_bar;
  double lambda;
  double eta;
  double rho;
  std::optional<double> v0;  // initial variance, defaults to v_bar
  void validate() const;
  double initial_variance() const { return v0.value_or(v_bar); }
};

struct VGParams {
  double sigma;
  double theta;
  double nu;
  void validate() const;
};

struct BGParams {
  double alpha_p;
  double alpha_m;
  double lambda_p;
  double lambda_m;
  void validate() const;
};

struct CGMYParams {
  double C;
  double G;
  double M;
  double Y;
  void validate() const;
};

struct MertonParams {
  double sigma;
  double lambda;
  double alpha;
  double delta;
  void validate() const;
};

namespace typical {
inline const BSParams bs{0.04};
inline const HestonParams heston{0.04, 1.0, 0.1, -0.7, std::nullopt};
inline const VGParams vg{0.12, -0.14, 0.17};
inline const BGParams bg{10.0, 0.6, 35.0, 5.0};
inline const CGMYParams cgmy{20.0, 80.0, 120.0, 0.25};
inline const MertonParams merton{0.1, 0.1, -0.4, 0.4};
}  // namespace typical

// Gamma(-y) for y in (0,1) through the reflection formula.
double gamma_neg(double y);

class ModelSpec {
 public:
  ModelSpec(const BSParams& p);
  ModelSpec(const HestonParams& p);
  ModelSpec(const VGParams& p);
  ModelSpec(const BGParams& p);
  ModelSpec(const CGMYParams& p);
  ModelSpec(const MertonParams& p);

  ModelKind kind() const { return static_cast<ModelKind>(params_.index()); }
  std::string name() const;
  bool is_levy() const { return kind() != ModelKind::Heston; }

  template <class P>
  const P& get() const {
    if (const P* p = std::get_if<P>(&params_)) return *p;
    throw UnsupportedModel("model is " + name());
  }

  // Open interval of ubar on which E[exp(ubar X_T)] stays finite.
  double ubar_lo() const { return lo_; }
  double ubar_hi() const { return hi_; }
  bool in_domain(double ubar) const { return ubar > lo_ && ubar < hi_; }

  // Large-time log moment generating function per unit time, Lambda(z).
  // Instantiated for double, std::complex<double> and autodiff types.
  template <class T>
  T log_mgf(const T& z) const;

 private:
  void init();

  std::variant<BSParams, HestonParams, VGParams, BGParams, CGMYParams, MertonParams> params_;
  double lo_ = -HUGE_VAL;
  double hi_ = HUGE_VAL;
  double c0_ = 0.0;
  double c1_ = 0.0;
};

template <class T>
T ModelSpec::log_mgf(const T& z) const {
  using std::exp;
  using std::log;
  using std::pow;
  using std::sqrt;
  switch (kind()) {
    case ModelKind::BS: {
      const auto& p = std::get<BSParams>(params_);
      return 0.5 * p.v * (z * z - z);
    }
    case ModelKind::Heston: {
      const auto& p = std::get<HestonParams>(params_);
      const double e2 = p.eta * p.eta;
      const T beta = p.lambda - p.rho * p.eta * z;
      return (p.lambda * p.v_bar / e2) * (beta - sqrt(beta * beta - e2 * (z * z - z)));
    }
    case ModelKind::VG: {
      const auto& p = std::get<VGParams>(params_);
      const double s2 = p.sigma * p.sigma;
      return (z * c0_ - log(1.0 - p.theta * p.nu * z - 0.5 * s2 * p.nu * z * z)) / p.nu;
    }
    case ModelKind::BG: {
      const auto& p = std::get<BGParams>(params_);
      return -p.alpha_p * log(1.0 - z / p.lambda_p) - p.alpha_m * log(1.0 + z / p.lambda_m) -
             z * c0_;
    }
    case ModelKind::CGMY: {
      const auto& p = std::get<CGMYParams>(params_);
      if constexpr (std::is_same_v<T, double>) {
        const double a = std::pow(p.M, p.Y) * std::expm1(p.Y * std::log1p(-z / p.M));
        const double b = std::pow(p.G, p.Y) * std::expm1(p.Y * std::log1p(z / p.G));
        return c0_ * (a + b - z * c1_);
      } else {
        return c0_ * (pow(p.M - z, p.Y) - std::pow(p.M, p.Y) + pow(p.G + z, p.Y) -
                      std::pow(p.G, p.Y) - z * c1_);
      }
    }
    case ModelKind::Merton: {
      const auto& p = std::get<MertonParams>(params_);
      const double d2 = p.delta * p.delta;
      return 0.5 * p.sigma * p.sigma * (z * z - z) +
             p.lambda * (exp(p.alpha * z + 0.5 * d2 * z * z) - 1.0 - z * c0_);
    }
  }
  return z;
}

}  // namespace ltsmile
