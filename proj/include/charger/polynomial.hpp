#pragma once

#include <complex>
#include <initializer_list>
#include <vector>

namespace charger {

using Complex = std::complex<double>;

/// Real polynomial with coefficients stored in ascending powers of s.
class Polynomial {
public:
  Polynomial() = default;
  Polynomial(std::initializer_list<double> ascending) : c_(ascending) { trim(); }
  explicit Polynomial(std::vector<double> ascending) : c_(std::move(ascending)) { trim(); }

  /// Monic polynomial with the given roots. Complex roots must come in conjugate pairs.
  static Polynomial from_roots(const std::vector<Complex>& roots);

  /// -1 for the zero polynomial.
  int degree() const noexcept { return static_cast<int>(c_.size()) - 1; }
  bool is_zero() const noexcept { return c_.empty(); }
  double coeff(int power) const noexcept;
  double leading() const noexcept { return c_.empty() ? 0.0 : c_.back(); }
  const std::vector<double>& coefficients() const noexcept { return c_; }

  Complex operator()(Complex s) const;
  double operator()(double s) const;
  Polynomial derivative() const;

  /// All complex roots. Companion-matrix eigenvalues (balanced) followed by
  /// Newton polishing on the original coefficients. Degrees 1 and 2 are solved
  /// in closed form.
  std::vector<Complex> roots() const;

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(double k, const Polynomial& a);

private:
  void trim();
  std::vector<double> c_;
};

/// Roots of a*s^2 + b*s + c using the cancellation-free form.
std::vector<Complex> quadratic_roots(double a, double b, double c);

}  // namespace charger
