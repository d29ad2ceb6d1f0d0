#pragma once

namespace charger {

/// One classical 4-stage Runge-Kutta step of x' = f(t, x).
/// Vec is any vector type with + and scalar * (Eigen fixed or dynamic vectors).
template <typename Vec, typename F>
Vec rk4_step(F&& f, const Vec& x, double t, double h) {
  const double half = 0.5 * h;
  const Vec k1 = f(t, x);
  const Vec k2 = f(t + half, Vec(x + half * k1));
  const Vec k3 = f(t + half, Vec(x + half * k2));
  const Vec k4 = f(t + h, Vec(x + h * k3));
  return Vec(x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

}  // namespace charger
