#include "charger/transfer_function.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "charger/errors.hpp"

namespace charger {

namespace {

Complex factor(Complex root, Complex s) { return root == Complex(0.0) ? s : 1.0 - s / root; }

// prod over roots of f_r(s) as a real polynomial.
Polynomial factor_product(const std::vector<Complex>& roots) {
  Complex scale(1.0);
  for (const Complex& r : roots) {
    if (r != Complex(0.0)) scale *= -1.0 / r;
  }
  return scale.real() * Polynomial::from_roots(roots);
}

double lowest_nonzero(const Polynomial& p) {
  for (double c : p.coefficients()) {
    if (c != 0.0) return c;
  }
  return 0.0;
}

}  // namespace

RationalTransferFunction RationalTransferFunction::from_polynomials(const Polynomial& num,
                                                                    const Polynomial& den) {
  if (den.is_zero()) throw NumericError("transfer function denominator is zero");
  if (num.is_zero()) return constant(0.0);
  return {lowest_nonzero(num) / lowest_nonzero(den), num.roots(), den.roots()};
}

Complex RationalTransferFunction::operator()(Complex s) const {
  Complex v(gain);
  for (const Complex& z : zeros) v *= factor(z, s);
  for (const Complex& p : poles) v /= factor(p, s);
  return v;
}

Complex RationalTransferFunction::at_frequency(double f_hz) const {
  return (*this)(Complex(0.0, 2.0 * std::numbers::pi * f_hz));
}

Polynomial RationalTransferFunction::numerator() const { return gain * factor_product(zeros); }

Polynomial RationalTransferFunction::denominator() const { return factor_product(poles); }

int RationalTransferFunction::origin_poles() const {
  return static_cast<int>(
      std::count_if(poles.begin(), poles.end(), [](Complex p) { return p == Complex(0.0); }));
}

RationalTransferFunction operator*(const RationalTransferFunction& a,
                                   const RationalTransferFunction& b) {
  RationalTransferFunction out{a.gain * b.gain, a.zeros, a.poles};
  out.zeros.insert(out.zeros.end(), b.zeros.begin(), b.zeros.end());
  out.poles.insert(out.poles.end(), b.poles.begin(), b.poles.end());
  return out;
}

}  // namespace charger
