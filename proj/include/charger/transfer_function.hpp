#pragma once

#include <vector>

#include "charger/polynomial.hpp"

namespace charger {

/// Rational transfer function in gain/zero/pole (Bode) form:
///
///   G(s) = gain * prod_z f_z(s) / prod_p f_p(s),  f_r(s) = 1 - s/r for r != 0, s for r == 0
///
/// so `gain` is the DC gain when there are no roots at the origin, and the
/// low-frequency asymptote coefficient otherwise. Roots are in rad/s; complex
/// roots must appear in conjugate pairs.
struct RationalTransferFunction {
  double gain = 1.0;
  std::vector<Complex> zeros;
  std::vector<Complex> poles;

  static RationalTransferFunction constant(double k) { return {k, {}, {}}; }
  static RationalTransferFunction from_polynomials(const Polynomial& num, const Polynomial& den);

  Complex operator()(Complex s) const;
  Complex at_frequency(double f_hz) const;

  Polynomial numerator() const;
  Polynomial denominator() const;

  int origin_poles() const;
  bool is_proper() const noexcept { return zeros.size() <= poles.size(); }
};

/// Series connection.
RationalTransferFunction operator*(const RationalTransferFunction& a,
                                   const RationalTransferFunction& b);

}  // namespace charger
