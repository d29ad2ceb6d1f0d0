#include "charger/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "charger/errors.hpp"
#include "charger/rk4.hpp"

namespace charger {

// ---------------------------------------------------------------------------
// Efficiency

bool EfficiencyReport::printed_out_of_range() const {
  return !std::isfinite(eta_printed) || eta_printed < 0.0 || eta_printed > 1.0;
}

double printed_efficiency(const ChargerParams& p, double duty, double a_v1, double a_v2) {
  const double r_in = p.r_in();
  const double rb_par_rin = p.r_b * r_in / (p.r_b + r_in);
  const double common = a_v1 / rb_par_rin - duty / r_in;
  return p.r_b * common * (1.0 / ((a_v2 - 1.0) * duty));
}

EfficiencyReport efficiency(const ChargerParams& p, const OperatingPoint& op) {
  p.validate();
  if (!(op.duty > 0.0)) throw ValidationError("efficiency: duty must be > 0");
  if (!(op.v_d > 0.0)) throw ValidationError("efficiency: v_d must be > 0");
  EfficiencyReport r;
  r.a_v1 = op.v_c / op.v_d;
  r.a_v2 = op.v_c / op.v_ob;
  // Q1 conducts the inductor current for a fraction D of the period; at DC the
  // battery terminal node sits at V_C.
  r.p_in = op.duty * op.v_d * op.i_l;
  r.p_out_terminal = op.v_c * op.i_l;
  r.p_out_emf = op.v_ob * op.i_b;
  r.eta_physical = r.a_v1 / op.duty;
  r.eta_printed = printed_efficiency(p, op.duty, r.a_v1, r.a_v2);
  return r;
}

// ---------------------------------------------------------------------------
// Sizing

SizingResult min_inductance(const ChargerParams& p, const OperatingPoint& op, double delta_i_l) {
  p.validate();
  if (!(delta_i_l > 0.0)) throw ValidationError("min_inductance: delta_i_l must be > 0");
  SizingResult r;
  r.duty = op.duty;
  r.v_c = op.v_c;
  r.v_ob = op.v_ob;
  r.i_l = op.i_l;
  r.ripple_bound = delta_i_l;
  const double r_in = p.r_in();
  r.bracket = op.v_d - ((p.r_b + r_in) / p.r_b) * op.v_c + (r_in / p.r_b) * op.v_ob;
  r.value = 0.5 * (op.duty * p.t_s() / delta_i_l) * r.bracket;
  r.feasible = r.bracket >= 0.0;
  return r;
}

SizingResult min_capacitance(const ChargerParams& p, double v_c, double v_ob, double i_l,
                             double duty, double delta_v_c) {
  p.validate();
  if (!(delta_v_c > 0.0)) throw ValidationError("min_capacitance: delta_v_c must be > 0");
  SizingResult r;
  r.duty = duty;
  r.v_c = v_c;
  r.v_ob = v_ob;
  r.i_l = i_l;
  r.ripple_bound = delta_v_c;
  r.bracket = i_l - v_c / p.r_b + v_ob / p.r_b;
  // Charge balance makes the bracket vanish at equilibrium; clear the rounding residue.
  const double scale = std::abs(i_l) + std::abs(v_c / p.r_b) + std::abs(v_ob / p.r_b);
  if (std::abs(r.bracket) <= 1e-12 * scale) r.bracket = 0.0;
  const double to_vc = p.r_b / (p.r_b + p.r_c);  // (r_B||r_C)/r_C
  if (r.bracket > 0.0) {
    r.value = 0.5 * (duty * p.t_s() * to_vc / delta_v_c) * r.bracket;
    r.feasible = true;
  } else {
    r.value = 0.0;
    r.feasible = false;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Transfer functions

RationalTransferFunction siso_tf(const StateSpaceModel& m, int output, int input) {
  // For a 2x2 A: adj(sI - A) = sI + A - tr(A) I, det(sI - A) = s^2 - tr(A) s + det(A).
  const Eigen::Vector2d b = m.b.col(input);
  const Eigen::RowVector2d c = m.c.row(output);
  const double d = m.d(output, input);
  const double tr = m.a.trace();
  const double det = m.a.determinant();
  const Eigen::Matrix2d shifted = m.a - tr * Eigen::Matrix2d::Identity();

  const Polynomial num{(c * shifted * b)(0, 0) + d * det, (c * b)(0, 0) - d * tr, d};
  RationalTransferFunction tf;
  tf.poles = quadratic_roots(1.0, -tr, det);
  if (num.is_zero()) {
    tf.gain = 0.0;
    return tf;
  }
  tf.zeros = num.roots();
  // Bode gain: lowest nonzero numerator coefficient over the lowest nonzero
  // denominator coefficient (det(A) unless A is singular).
  double num_low = 0.0;
  for (double v : num.coefficients()) {
    if (v != 0.0) {
      num_low = v;
      break;
    }
  }
  const double den_low = det != 0.0 ? det : -tr;
  tf.gain = num_low / den_low;
  return tf;
}

RationalTransferFunction control_to_battery_tf(const StateSpaceModel& model) {
  return siso_tf(model, StateSpaceModel::kOutputIb, StateSpaceModel::kInputDuty);
}

double battery_gain_closed_form(const ChargerParams& p, double v_d, const StateSpaceModel& model) {
  return v_d / (p.inductance * p.capacitance * (p.r_b + p.r_c) * model.a.determinant());
}

FrequencyResponse frequency_response(const RationalTransferFunction& tf, double f_min,
                                     double f_max, int points_per_decade) {
  if (!(f_min > 0.0 && f_max > f_min)) {
    throw ValidationError("frequency_response: need 0 < f_min < f_max");
  }
  if (points_per_decade < 1) throw ValidationError("frequency_response: points_per_decade < 1");
  const double decades = std::log10(f_max / f_min);
  const int n = static_cast<int>(std::floor(decades * points_per_decade + 1e-9));
  std::vector<double> freqs;
  freqs.reserve(static_cast<std::size_t>(n) + 2);
  for (int i = 0; i <= n; ++i) {
    freqs.push_back(f_min * std::pow(10.0, static_cast<double>(i) / points_per_decade));
  }
  if (freqs.back() < f_max * (1.0 - 1e-12)) freqs.push_back(f_max);
  freqs.back() = std::min(freqs.back(), f_max);

  FrequencyResponse fr;
  fr.points.reserve(freqs.size());
  for (double f : freqs) {
    const Complex s(0.0, 2.0 * std::numbers::pi * f);
    // Phase as a sum of per-factor angles is continuous in f, so no unwrapping
    // ambiguity between sparse samples.
    double phase = tf.gain < 0.0 ? std::numbers::pi : 0.0;
    for (const Complex& z : tf.zeros) phase += std::arg(z == Complex(0.0) ? s : 1.0 - s / z);
    for (const Complex& p : tf.poles) phase -= std::arg(p == Complex(0.0) ? s : 1.0 - s / p);
    fr.points.push_back({f, 20.0 * std::log10(std::abs(tf(s))), phase * 180.0 / std::numbers::pi});
  }
  return fr;
}

Crossover crossover_frequency(const FrequencyResponse& fr) {
  const auto& pts = fr.points;
  if (pts.empty()) throw ValidationError("crossover_frequency: empty response");
  const bool flat = std::all_of(pts.begin(), pts.end(),
                                [](const FrequencyPoint& p) { return std::abs(p.mag_db) <= 1e-9; });
  if (flat) return {pts.front().f_hz, true};
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (pts[i].mag_db == 0.0) return {pts[i].f_hz, false};
    if (i + 1 < pts.size() && pts[i].mag_db * pts[i + 1].mag_db < 0.0) {
      const double l0 = std::log10(pts[i].f_hz);
      const double l1 = std::log10(pts[i + 1].f_hz);
      const double frac = pts[i].mag_db / (pts[i].mag_db - pts[i + 1].mag_db);
      return {std::pow(10.0, l0 + frac * (l1 - l0)), false};
    }
  }
  throw NumericError("crossover_frequency: magnitude never crosses 0 dB in range");
}

std::vector<LocusPoint> root_locus(const RationalTransferFunction& open_loop,
                                   std::vector<double> gain_grid) {
  if (!open_loop.is_proper()) throw ValidationError("root_locus: open loop is improper");
  for (double k : gain_grid) {
    if (!(k > 0.0)) throw ValidationError("root_locus: gains must be positive");
  }
  if (std::find(gain_grid.begin(), gain_grid.end(), 1.0) == gain_grid.end()) {
    gain_grid.push_back(1.0);
  }
  std::sort(gain_grid.begin(), gain_grid.end());

  const Polynomial num = open_loop.numerator();
  const Polynomial den = open_loop.denominator();
  std::vector<LocusPoint> out;
  out.reserve(gain_grid.size());
  for (double k : gain_grid) {
    if (num.degree() == den.degree()) {
      const double lead = den.leading() + k * num.leading();
      if (std::abs(lead) <= 1e-12 * std::max(std::abs(den.leading()), std::abs(k * num.leading()))) {
        throw NumericError("root_locus: leading coefficients cancel at K = " + std::to_string(k));
      }
    }
    out.push_back({k, (den + k * num).roots()});
  }
  return out;
}

RationalTransferFunction unity_feedback(const RationalTransferFunction& loop) {
  const Polynomial num = loop.numerator();
  const Polynomial den = loop.denominator() + num;
  if (den.is_zero() || den.degree() < num.degree()) {
    throw NumericError("unity_feedback: closed loop is improper");
  }
  return RationalTransferFunction::from_polynomials(num, den);
}

StepResponse step_response(const RationalTransferFunction& loop, double horizon, double dt) {
  if (!(dt > 0.0 && horizon > dt)) throw ValidationError("step_response: need horizon > dt > 0");
  const Polynomial num = loop.numerator();
  const Polynomial den = loop.denominator() + num;
  if (den.is_zero() || den.degree() < num.degree()) {
    throw NumericError("step_response: closed loop is improper");
  }

  StepResponse out;
  out.closed_loop_poles = den.roots();
  double lambda_max = 0.0;
  for (const Complex& p : out.closed_loop_poles) lambda_max = std::max(lambda_max, std::abs(p));
  for (const Complex& p : out.closed_loop_poles) {
    if (p.real() > 1e-12 * lambda_max) out.unstable = true;
  }

  // Controllable canonical form of num/den (den made monic).
  const int n = den.degree();
  const double lead = den.leading();
  const double feedthrough = num.coeff(n) / lead;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  Eigen::RowVectorXd c(n);
  for (int i = 0; i + 1 < n; ++i) a(i, i + 1) = 1.0;
  for (int i = 0; i < n; ++i) {
    const double ai = den.coeff(i) / lead;
    a(n - 1, i) = -ai;
    c(i) = num.coeff(i) / lead - feedthrough * ai;
  }

  out.substeps = std::max(1, static_cast<int>(std::ceil(dt * lambda_max / 0.5)));
  const double h = dt / out.substeps;
  const auto rhs = [&a, n](double, const Eigen::VectorXd& x) {
    Eigen::VectorXd dx = a * x;
    dx(n - 1) += 1.0;  // unit step input
    return dx;
  };

  const auto steps = static_cast<std::size_t>(std::llround(horizon / dt));
  out.samples.reserve(steps + 1);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  for (std::size_t k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    out.samples.push_back({t, n > 0 ? (c * x)(0) + feedthrough : feedthrough});
    if (k == steps) break;
    for (int j = 0; j < out.substeps; ++j) x = rk4_step(rhs, x, t + j * h, h);
    if (!x.allFinite()) throw DivergenceError(t, "step_response: state diverged");
  }
  return out;
}

double step_settling_time(const StepResponse& r, double band_fraction) {
  if (r.samples.empty()) return -1.0;
  const double final_value = r.samples.back().y;
  const double band = band_fraction * std::abs(final_value);
  double settled_at = -1.0;
  for (auto it = r.samples.rbegin(); it != r.samples.rend(); ++it) {
    if (std::abs(it->y - final_value) > band) break;
    settled_at = it->t;
  }
  return settled_at;
}

// ---------------------------------------------------------------------------
// Surfaces

SurfaceQuantity parse_surface_quantity(const std::string& name) {
  if (name == "v_c") return SurfaceQuantity::v_c;
  if (name == "l_min") return SurfaceQuantity::l_min;
  if (name == "c_min") return SurfaceQuantity::c_min;
  if (name == "eta") return SurfaceQuantity::eta;
  throw ValidationError("unknown surface quantity '" + name + "' (v_c | l_min | c_min | eta)");
}

std::string to_string(SurfaceQuantity q) {
  switch (q) {
    case SurfaceQuantity::v_c: return "v_c";
    case SurfaceQuantity::l_min: return "l_min";
    case SurfaceQuantity::c_min: return "c_min";
    case SurfaceQuantity::eta: return "eta";
  }
  return "?";
}

SurfaceAxis log_axis(std::string name, double lo, double hi, int points_per_decade) {
  if (!(lo > 0.0 && hi > lo)) throw ValidationError("log_axis: need 0 < lo < hi");
  if (points_per_decade < 1) throw ValidationError("log_axis: points_per_decade < 1");
  SurfaceAxis axis;
  axis.name = std::move(name);
  const int n = static_cast<int>(std::lround(std::log10(hi / lo) * points_per_decade));
  for (int i = 0; i <= n; ++i) {
    axis.samples.push_back(lo * std::pow(10.0, static_cast<double>(i) / points_per_decade));
  }
  axis.samples.back() = hi;
  return axis;
}

SurfaceFixed SurfaceFixed::defaults_for(SurfaceQuantity q) {
  SurfaceFixed f;
  if (q == SurfaceQuantity::l_min || q == SurfaceQuantity::c_min) f.v_c = 400.0;
  return f;
}

std::pair<std::string, std::string> default_surface_axes(SurfaceQuantity q) {
  if (q == SurfaceQuantity::c_min) return {"r_c", "r_l"};
  return {"r_ds_on", "r_l"};
}

namespace {

double& axis_field(ChargerParams& p, const std::string& name) {
  if (name == "r_ds_on") return p.r_ds_on;
  if (name == "r_l") return p.r_l;
  if (name == "r_c") return p.r_c;
  if (name == "r_b") return p.r_b;
  throw ValidationError("unknown surface axis '" + name + "' (r_ds_on | r_l | r_c | r_b)");
}

void check_axis(const SurfaceAxis& a) {
  if (a.samples.empty()) throw ValidationError("surface axis '" + a.name + "' is empty");
  for (std::size_t i = 1; i < a.samples.size(); ++i) {
    if (!(a.samples[i] > a.samples[i - 1])) {
      throw ValidationError("surface axis '" + a.name + "' is not strictly increasing");
    }
  }
}

struct PointValue {
  double value;
  bool feasible;
};

PointValue evaluate_point(SurfaceQuantity q, const ChargerParams& p, const SurfaceFixed& f) {
  switch (q) {
    case SurfaceQuantity::v_c:
      return {steady_state(p, f.duty, f.v_d, f.v_ob).v_c, true};
    case SurfaceQuantity::l_min: {
      OperatingPoint op = steady_state(p, f.duty, f.v_d, f.v_ob);
      if (f.v_c) op.v_c = *f.v_c;
      const auto r = min_inductance(p, op, f.delta_i_l);
      return {r.value, r.feasible};
    }
    case SurfaceQuantity::c_min: {
      const double v_c = f.v_c ? *f.v_c : steady_state(p, f.duty, f.v_d, f.v_ob).v_c;
      const auto r = min_capacitance(p, v_c, f.v_ob, f.i_b, f.duty, f.delta_v_c);
      return {r.value, r.feasible};
    }
    case SurfaceQuantity::eta: {
      const auto r = efficiency(p, steady_state(p, f.duty, f.v_d, f.v_ob));
      if (f.printed_efficiency) return {r.eta_printed, !r.printed_out_of_range()};
      return {r.eta_physical, true};
    }
  }
  return {0.0, false};
}

}  // namespace

SurfaceGrid surface(SurfaceQuantity q, const SurfaceAxis& x, const SurfaceAxis& y,
                    const SurfaceFixed& fixed) {
  check_axis(x);
  check_axis(y);
  if (x.name == y.name) throw ValidationError("surface axes must differ");
  {
    ChargerParams probe = fixed.params;
    (void)axis_field(probe, x.name);
    (void)axis_field(probe, y.name);
  }
  SurfaceGrid g{x, y, {}, {}};
  g.values.resize(x.samples.size() * y.samples.size());
  g.feasible.resize(g.values.size());
  for (std::size_t i = 0; i < x.samples.size(); ++i) {
    for (std::size_t j = 0; j < y.samples.size(); ++j) {
      ChargerParams p = fixed.params;
      axis_field(p, x.name) = x.samples[i];
      axis_field(p, y.name) = y.samples[j];
      const std::size_t idx = i * y.samples.size() + j;
      try {
        const auto v = evaluate_point(q, p, fixed);
        g.values[idx] = v.value;
        g.feasible[idx] = v.feasible ? 1 : 0;
      } catch (const std::exception&) {
        g.values[idx] = std::numeric_limits<double>::quiet_NaN();
        g.feasible[idx] = 0;
      }
    }
  }
  return g;
}

}  // namespace charger
