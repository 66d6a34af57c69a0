#pragma once

#include <vector>

#include "ltsmile/model.hpp"

namespace testsupport {

inline std::vector<ltsmile::ModelSpec> typical_models() {
  using namespace ltsmile;
  return {typical::bs, typical::heston, typical::vg, typical::bg, typical::cgmy, typical::merton};
}

inline std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = a + (b - a) * i / (n - 1);
  return out;
}

}  // namespace testsupport
