#pragma once

#include <array>
#include <complex>

#include "ltsmile/model.hpp"

namespace ltsmile {

using cplx = std::complex<double>;

// psi(u) with phi_T(u - i/2) ~ exp(-psi(u) T); exact for Levy models.
cplx psi(const ModelSpec& model, cplx u);

// phi_T(u) = E[exp(i u X_T)]; Heston uses the full finite-T form.
cplx phi(const ModelSpec& model, cplx u, double T);

// kappa(ubar) = Lambda(ubar) = -psi(-i (ubar - 1/2)).
double cumulant(const ModelSpec& model, double ubar);

// kappa and its first four derivatives at ubar.
std::array<double, 5> cumulant_derivatives(const ModelSpec& model, double ubar);

// (kappa', kappa'') only; cheaper inner loop for root finding.
std::array<double, 2> cumulant_slope(const ModelSpec& model, double ubar);

cplx heston_phi(const HestonParams& p, cplx u, double T);

}  // namespace ltsmile
