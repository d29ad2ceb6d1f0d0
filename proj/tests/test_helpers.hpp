#pragma once

#include <cmath>
#include <random>

#include "charger/model.hpp"

namespace charger::testing {

inline bool rel_close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b));
}

/// Resistances log-uniform in [1e-3, 1e2] ohm, reference L, C and f_s.
inline ChargerParams random_params(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> exp10(-3.0, 2.0);
  ChargerParams p = reference_charger();
  p.r_ds_on = std::pow(10.0, exp10(rng));
  p.r_l = std::pow(10.0, exp10(rng));
  p.r_c = std::pow(10.0, exp10(rng));
  p.r_b = std::pow(10.0, exp10(rng));
  return p;
}

}  // namespace charger::testing
