#include "ltsmile/charfn.hpp"

#include <boost/math/differentiation/autodiff.hpp>
#include <sstream>

namespace ltsmile {

namespace {

using boost::math::differentiation::make_fvar;

void check_strip(const ModelSpec& model, double re_z) {
  if (!model.in_domain(re_z)) {
    std::ostringstream os;
    os << model.name() << ": Re(i u) + shift = " << re_z << " outside moment interval ("
       << model.ubar_lo() << ", " << model.ubar_hi() << ")";
    throw DomainError(os.str());
  }
}

}  // namespace

cplx psi(const ModelSpec& model, cplx u) {
  const cplx z = cplx(0.0, 1.0) * u + 0.5;
  check_strip(model, z.real());
  return -model.log_mgf(z);
}

cplx heston_phi(const HestonParams& p, cplx u, double T) {
  const cplx z = cplx(0.0, 1.0) * u;
  const double e2 = p.eta * p.eta;
  const cplx alpha = 0.5 * (z * z - z);
  const cplx beta = p.lambda - p.rho * p.eta * z;
  const cplx d = std::sqrt(beta * beta - 2.0 * e2 * alpha);
  const cplx rm = (beta - d) / e2;
  const cplx rp = (beta + d) / e2;
  const cplx g = rm / rp;
  const cplx ed = std::exp(-d * T);
  const cplx C = p.lambda * (rm * T - (2.0 / e2) * std::log((1.0 - g * ed) / (1.0 - g)));
  const cplx D = rm * (1.0 - ed) / (1.0 - g * ed);
  return std::exp(C * p.v_bar + D * p.initial_variance());
}

cplx phi(const ModelSpec& model, cplx u, double T) {
  if (!(T > 0.0)) throw DomainError("phi: T must be positive");
  const cplx z = cplx(0.0, 1.0) * u;
  check_strip(model, z.real());
  if (model.kind() == ModelKind::Heston) return heston_phi(model.get<HestonParams>(), u, T);
  return std::exp(T * model.log_mgf(z));
}

double cumulant(const ModelSpec& model, double ubar) {
  check_strip(model, ubar);
  return model.log_mgf(ubar);
}

std::array<double, 5> cumulant_derivatives(const ModelSpec& model, double ubar) {
  check_strip(model, ubar);
  const auto y = model.log_mgf(make_fvar<double, 4>(ubar));
  return {model.log_mgf(ubar), y.derivative(1), y.derivative(2), y.derivative(3), y.derivative(4)};
}

std::array<double, 2> cumulant_slope(const ModelSpec& model, double ubar) {
  check_strip(model, ubar);
  const auto y = model.log_mgf(make_fvar<double, 2>(ubar));
  return {y.derivative(1), y.derivative(2)};
}

}  // namespace ltsmile
