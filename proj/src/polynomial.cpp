#include "charger/polynomial.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "charger/errors.hpp"

namespace charger {

void Polynomial::trim() {
  while (!c_.empty() && c_.back() == 0.0) c_.pop_back();
}

double Polynomial::coeff(int power) const noexcept {
  if (power < 0 || power >= static_cast<int>(c_.size())) return 0.0;
  return c_[static_cast<std::size_t>(power)];
}

Polynomial Polynomial::from_roots(const std::vector<Complex>& roots) {
  std::vector<Complex> acc{Complex(1.0)};
  for (const Complex& r : roots) {
    std::vector<Complex> next(acc.size() + 1, Complex(0.0));
    for (std::size_t i = 0; i < acc.size(); ++i) {
      next[i + 1] += acc[i];
      next[i] -= r * acc[i];
    }
    acc = std::move(next);
  }
  std::vector<double> re(acc.size());
  std::transform(acc.begin(), acc.end(), re.begin(), [](Complex v) { return v.real(); });
  return Polynomial(std::move(re));
}

Complex Polynomial::operator()(Complex s) const {
  Complex acc(0.0);
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * s + *it;
  return acc;
}

double Polynomial::operator()(double s) const {
  double acc = 0.0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * s + *it;
  return acc;
}

Polynomial Polynomial::derivative() const {
  if (c_.size() <= 1) return {};
  std::vector<double> d(c_.size() - 1);
  for (std::size_t i = 1; i < c_.size(); ++i) d[i - 1] = static_cast<double>(i) * c_[i];
  return Polynomial(std::move(d));
}

Polynomial operator+(const Polynomial& a, const Polynomial& b) {
  std::vector<double> out(std::max(a.c_.size(), b.c_.size()), 0.0);
  for (std::size_t i = 0; i < a.c_.size(); ++i) out[i] += a.c_[i];
  for (std::size_t i = 0; i < b.c_.size(); ++i) out[i] += b.c_[i];
  return Polynomial(std::move(out));
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  if (a.is_zero() || b.is_zero()) return {};
  std::vector<double> out(a.c_.size() + b.c_.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.c_.size(); ++i)
    for (std::size_t j = 0; j < b.c_.size(); ++j) out[i + j] += a.c_[i] * b.c_[j];
  return Polynomial(std::move(out));
}

Polynomial operator*(double k, const Polynomial& a) {
  std::vector<double> out = a.c_;
  for (double& v : out) v *= k;
  return Polynomial(std::move(out));
}

std::vector<Complex> quadratic_roots(double a, double b, double c) {
  if (a == 0.0) {
    if (b == 0.0) return {};
    return {Complex(-c / b)};
  }
  const double disc = b * b - 4.0 * a * c;
  if (disc >= 0.0) {
    const double sq = std::sqrt(disc);
    const double q = -0.5 * (b + std::copysign(sq, b));
    if (q == 0.0) return {Complex(0.0), Complex(0.0)};
    return {Complex(q / a), Complex(c / q)};
  }
  const double re = -b / (2.0 * a);
  const double im = std::sqrt(-disc) / (2.0 * std::abs(a));
  return {Complex(re, im), Complex(re, -im)};
}

namespace {

// Parlett-Reinsch balancing, radix 2. Similarity transform, eigenvalues unchanged.
void balance(Eigen::MatrixXd& m) {
  constexpr double kRadix = 2.0;
  constexpr double kRadix2 = kRadix * kRadix;
  const Eigen::Index n = m.rows();
  bool done = false;
  while (!done) {
    done = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      double col = 0.0, row = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        col += std::abs(m(j, i));
        row += std::abs(m(i, j));
      }
      if (col == 0.0 || row == 0.0) continue;
      const double total = col + row;
      double f = 1.0;
      double g = row / kRadix;
      while (col < g) {
        f *= kRadix;
        col *= kRadix2;
      }
      g = row * kRadix;
      while (col > g) {
        f /= kRadix;
        col /= kRadix2;
      }
      if ((col + row) / f < 0.95 * total) {
        done = false;
        m.row(i) /= f;
        m.col(i) *= f;
      }
    }
  }
}

Complex polish(const Polynomial& p, const Polynomial& dp, Complex r) {
  double best = std::abs(p(r));
  for (int it = 0; it < 8 && best > 0.0; ++it) {
    const Complex d = dp(r);
    if (d == Complex(0.0)) break;
    const Complex next = r - p(r) / d;
    const double val = std::abs(p(next));
    if (!(val < best)) break;
    best = val;
    r = next;
  }
  return r;
}

}  // namespace

std::vector<Complex> Polynomial::roots() const {
  const int n = degree();
  if (n <= 0) return {};
  // Roots at the origin are exact; peel them off first.
  int zeros_at_origin = 0;
  while (c_[static_cast<std::size_t>(zeros_at_origin)] == 0.0) ++zeros_at_origin;
  std::vector<Complex> out(static_cast<std::size_t>(zeros_at_origin), Complex(0.0));
  const Polynomial reduced(std::vector<double>(c_.begin() + zeros_at_origin, c_.end()));
  const int m = reduced.degree();
  if (m == 1) {
    out.emplace_back(-reduced.coeff(0) / reduced.coeff(1));
  } else if (m == 2) {
    for (const Complex& r : quadratic_roots(reduced.coeff(2), reduced.coeff(1), reduced.coeff(0)))
      out.push_back(r);
  } else if (m > 2) {
    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(m, m);
    const double lead = reduced.leading();
    for (int i = 0; i < m; ++i) comp(0, m - 1 - i) = -reduced.coeff(i) / lead;
    for (int i = 1; i < m; ++i) comp(i, i - 1) = 1.0;
    balance(comp);
    Eigen::EigenSolver<Eigen::MatrixXd> es(comp, false);
    if (es.info() != Eigen::Success) throw NumericError("polynomial root solve did not converge");
    const Polynomial dp = reduced.derivative();
    std::vector<Complex> found;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
      found.push_back(polish(reduced, dp, es.eigenvalues()(i)));
    }
    // Keep conjugate symmetry after polishing.
    for (Complex& r : found) {
      if (std::abs(r.imag()) <= 1e-12 * std::abs(r)) r = Complex(r.real(), 0.0);
    }
    out.insert(out.end(), found.begin(), found.end());
  }
  return out;
}

}  // namespace charger
