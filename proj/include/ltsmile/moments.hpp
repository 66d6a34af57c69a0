#pragma once

#include <array>
#include <vector>

#include "ltsmile/model.hpp"

namespace ltsmile {

struct MomentExpansion {
  double psi0;   // omega(0) per unit time
  double ubar0;  // ATM Esscher shift
  double m2;
  double m3;
  double m4;
  std::array<double, 5> w_coeffs;  // w(k) = sum_n w_coeffs[n] k^n at T = 1
  double eval(double k) const;
};

struct LeeWings {
  double beta_minus;
  double beta_plus;
  double p_tilde;
  double q_tilde;
};

// Solves kappa'(ubar0) = 0.
double atm_esscher_shift(const ModelSpec& model);

// Central moments per unit time under the Esscher measure at ubar, indexed by order:
// [1, 0, m2, m3, m4] truncated at n_max.
std::vector<double> esscher_central_moments(const ModelSpec& model, double ubar, int n_max);

MomentExpansion w_expansion_coeffs(const ModelSpec& model);

// Wing slope of beta/8 + 1/(2 beta) = L, root in [0, 2]; 0 when L is infinite.
double lee_beta(double L);
LeeWings lee_wings(const ModelSpec& model);

}  // namespace ltsmile
