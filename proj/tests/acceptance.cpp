// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "charger/analysis.hpp"
#include "charger/control.hpp"
#include "charger/model.hpp"
#include "charger/serialize.hpp"
#include "charger/sim.hpp"

using namespace charger;

namespace {

using Clock = std::chrono::steady_clock;

int g_failures = 0;

void report(const char* id, bool ok, const std::string& detail) {
  std::printf("%s %s  %s\n", id, ok ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

ChargerParams random_params(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> exp10(-3.0, 2.0);
  ChargerParams p = reference_charger();
  p.r_ds_on = std::pow(10.0, exp10(rng));
  p.r_l = std::pow(10.0, exp10(rng));
  p.r_c = std::pow(10.0, exp10(rng));
  p.r_b = std::pow(10.0, exp10(rng));
  return p;
}

const ChargerParams kP = reference_charger();

RationalTransferFunction reference_plant() {
  return control_to_battery_tf(linearize(kP, steady_state(kP, 0.9, 800.0, 450.0)));
}

PiGains designed_gains() { return design_pi(reference_plant(), kP.f_s); }

// ---------------------------------------------------------------------------

void ac1() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> duty(0.0, 1.0), vob(0.0, 800.0);
  double worst_residual = 0.0, worst_solve = 0.0;
  for (int n = 0; n < 1000; ++n) {
    const auto p = random_params(rng);
    const double d = duty(rng), v_ob = vob(rng);
    const auto op = steady_state(p, d, 800.0, v_ob);
    worst_residual = std::max({worst_residual, op.volt_second_residual(p), op.charge_balance_residual(p)});
    // Generic dense solve of the same balance equations.
    const double rp = p.r_b * p.r_c / (p.r_b + p.r_c);
    Eigen::Matrix2d m;
    m << -(p.r_in() + rp), -rp / p.r_c, p.r_b, -1.0;
    const Eigen::Vector2d x = m.fullPivLu().solve(Eigen::Vector2d(-d * 800.0 + rp / p.r_b * v_ob, -v_ob));
    const double scale_i = std::abs(x(0)) + std::abs(x(1)) / p.r_b;
    worst_solve = std::max({worst_solve, std::abs(op.i_l - x(0)) / scale_i, rel_err(op.v_c, x(1))});
  }
  const double dt = seconds_since(t0);
  report("AC1", worst_residual < 1e-9 && worst_solve < 1e-12 && dt < 1.0,
         fmt("max balance residual %.2e (< 1e-9), max closed-form vs solve %.2e (< 1e-12), %.3f s (< 1 s)",
             worst_residual, worst_solve, dt));
}

double jacobian_error(const ChargerParams& p, const OperatingPoint& op) {
  const auto m = linearize(p, op);
  const Eigen::Matrix<double, 5, 1> z0{op.i_l, op.v_c, op.v_d, op.v_ob, op.duty};
  auto f = [&](const Eigen::Matrix<double, 5, 1>& z) {
    const auto d = rhs_averaged(p, {z(0), z(1)}, {z(2), z(3)}, z(4));
    return Eigen::Vector2d(d.di_l, d.dv_c);
  };
  Eigen::Matrix<double, 2, 5> analytic;
  analytic << m.a, m.b;
  double worst = 0.0;
  for (int k = 0; k < 5; ++k) {
    double h = 1e-6 * std::max(1.0, std::abs(z0(k)));
    if (k == 4) h = std::min(h, 0.5 * std::min(z0(4), 1.0 - z0(4)));
    auto zp = z0, zm = z0;
    zp(k) += h;
    zm(k) -= h;
    const Eigen::Vector2d fd = (f(zp) - f(zm)) / (2.0 * h);
    for (int r = 0; r < 2; ++r) {
      const double row_scale = analytic.row(r).cwiseAbs().maxCoeff();
      const double denom = std::max(std::abs(analytic(r, k)), 1e-6 * row_scale);
      worst = std::max(worst, std::abs(fd(r) - analytic(r, k)) / denom);
    }
  }
  return worst;
}

void ac2() {
  const auto t0 = Clock::now();
  double worst = jacobian_error(kP, steady_state(kP, 0.9, 800.0, 450.0));
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> duty(0.05, 0.95);
  for (int n = 0; n < 100; ++n) {
    const auto p = random_params(rng);
    worst = std::max(worst, jacobian_error(p, steady_state(p, duty(rng), 800.0, 450.0)));
  }
  const double dt = seconds_since(t0);
  report("AC2", worst < 1e-6 && dt < 1.0,
         fmt("max entrywise relative error vs central differences %.2e (< 1e-6), %.3f s (< 1 s)", worst, dt));
}

void ac3() {
  struct Regime {
    double i_b, v_ob, d_quoted, v_c_quoted;
  };
  // Quoted duties 0.64/0.66/0.54; quoted V_C 480 and 390 V, 490 V for the middle regime
  // follows from V_OB + r_B I_B.
  const Regime regimes[] = {{30.0, 450.0, 0.64, 480.0}, {40.0, 450.0, 0.66, 490.0}, {40.0, 350.0, 0.54, 390.0}};
  bool ok = true;
  std::string detail;
  for (const auto& r : regimes) {
    const auto op = duty_for_current(kP, r.i_b, 800.0, r.v_ob);
    ok = ok && std::abs(op.duty - r.d_quoted) <= 0.02 && std::abs(op.v_c - r.v_c_quoted) <= 2.0;
    detail += fmt("[%g A @ %g V: D=%.6f V_C=%.3f] ", r.i_b, r.v_ob, op.duty, op.v_c);
  }
  report("AC3", ok, detail + "(D +/-0.02, V_C +/-2 V)");
}

void ac4() {
  const auto m = linearize(kP, steady_state(kP, 0.9, 800.0, 450.0));
  const auto tf = control_to_battery_tf(m);
  const double k_closed = battery_gain_closed_form(kP, 800.0, m);
  const double gain_err = rel_err(tf.gain, k_closed);
  Eigen::EigenSolver<Eigen::Matrix2d> es(m.a, false);
  double pole_err = 0.0;
  for (int k = 0; k < 2; ++k) {
    double best = 1e300;
    for (const auto& p : tf.poles) best = std::min(best, std::abs(p - es.eigenvalues()(k)));
    pole_err = std::max(pole_err, best / std::abs(es.eigenvalues()(k)));
  }
  report("AC4", gain_err <= 1e-3 && pole_err <= 1e-9,
         fmt("k matrix %.9g, closed form %.9g, rel diff %.2e (<= 0.1%%); poles vs eig(A) %.2e (<= 1e-9)",
             tf.gain, k_closed, gain_err, pole_err));
}

void ac5() {
  const auto plant = reference_plant();
  const auto un = crossover_frequency(frequency_response(loop_gain(std::nullopt, plant, kP.v_m), 1.0, 1e8, 50));
  const auto comp =
      crossover_frequency(frequency_response(loop_gain(designed_gains(), plant, kP.v_m), 1.0, 1e8, 50));
  const bool ok = !un.degenerate && std::abs(un.f_hz - 13.2e3) <= 0.15 * 13.2e3;
  report("AC5", ok,
         fmt("uncompensated f_c %.1f Hz (13.2 kHz +/-15%%); compensated f_c %.4g Hz (published 29 kHz, not enforced)",
             un.f_hz, comp.f_hz));
}

struct TransientRuns {
  Scenario scenario;
  Trace switched;
  double switched_seconds = 0.0;
  Trace averaged;
};

TransientRuns run_reference_transient() {
  TransientRuns r;
  r.scenario = Scenario::reference(kP);
  const auto gains = designed_gains();
  const auto mod = ModulatorConfig::from(kP);
  const auto t0 = Clock::now();
  r.switched = run(kP, gains, mod, r.scenario);
  r.switched_seconds = seconds_since(t0);
  auto av = r.scenario;
  av.mode = SimMode::averaged;
  r.averaged = run(kP, gains, mod, av);
  return r;
}

void ac6(const TransientRuns& runs) {
  const auto seg = analyze_trace(runs.switched, runs.scenario);
  const double want[] = {30.0, 40.0, 40.0};
  bool means_ok = seg.size() == 3;
  std::string detail;
  for (std::size_t i = 0; i < seg.size() && i < 3; ++i) {
    const double err = (seg[i].means.i_b - seg[i].means.i_b_ref) / seg[i].means.i_b_ref;
    means_ok = means_ok && std::abs(seg[i].means.i_b - want[i]) <= 0.005 * want[i] && std::abs(err) < 0.005;
    detail += fmt("i_B=%.5g A (err %.3f%%) ", seg[i].means.i_b, 100.0 * err);
  }
  const auto& s0 = seg.at(0).settling;
  const auto& s1 = seg.at(1).settling;
  const bool startup_ok = s0.settled && std::abs(s0.settling_time - 0.030) <= 0.5 * 0.030;
  const bool step_ok = s1.settled && std::abs(s1.settling_time - 0.004) <= 0.5 * 0.004;
  const bool time_ok = runs.switched_seconds < 10.0;
  report("AC6", means_ok && startup_ok && step_ok && time_ok,
         detail + fmt("| startup settling %.3f ms (30 ms +/-50%%: %s), post-step settling %.3f ms (4 ms +/-50%%: %s) "
                      "| %.2f s (< 10 s)",
                      1e3 * s0.settling_time, startup_ok ? "ok" : "out", 1e3 * s1.settling_time,
                      step_ok ? "ok" : "out", runs.switched_seconds));
}

void ac7(const TransientRuns& runs) {
  const auto seg = analyze_trace(runs.switched, runs.scenario);
  bool ok = !seg.empty();
  std::string detail;
  for (const auto& s : seg) {
    ok = ok && s.ripple_valid && s.ripple.i_l_percent < 5.0 && s.ripple.v_c_percent < 5.0;
    detail += fmt("[i_L %.4f%%, v_C %.5f%%] ", s.ripple.i_l_percent, s.ripple.v_c_percent);
  }
  report("AC7", ok, detail + "(< 5%; published 0.16% / 2.4%, informational)");
}

void ac8(const TransientRuns& runs) {
  const auto avg = cycle_average(runs.switched);
  const auto seg = analyze_trace(runs.switched, runs.scenario);
  double ripple_il = 1e300, ripple_vc = 1e300;
  for (const auto& s : seg) {
    ripple_il = std::min(ripple_il, s.ripple.i_l_pp);
    ripple_vc = std::min(ripple_vc, s.ripple.v_c_pp);
  }
  // Both traces pass through the same one-period boxcar, so the comparison is
  // between like quantities at the same instants.
  const auto avg_ref = cycle_average(runs.averaged);
  const double t_skip = 5.0 * runs.switched.t_s;
  double dil = 0.0, dvc = 0.0, dib = 0.0;
  for (std::size_t k = 0; k < avg.samples.size() && k < avg_ref.samples.size(); ++k) {
    const auto& s = avg.samples[k];
    const auto& r = avg_ref.samples[k];
    if (s.t < t_skip) continue;
    dil = std::max(dil, std::abs(s.i_l - r.i_l));
    dvc = std::max(dvc, std::abs(s.v_c - r.v_c));
    dib = std::max(dib, std::abs(s.i_b - r.i_b));
  }
  const bool pointwise = dil <= ripple_il && dvc <= ripple_vc && dib <= ripple_il;

  const auto seg_av = analyze_trace(runs.averaged, runs.scenario);
  double worst_mean = 0.0;
  for (std::size_t i = 0; i < seg.size(); ++i)
    worst_mean = std::max({worst_mean, rel_err(seg[i].means.i_l, seg_av[i].means.i_l),
                           rel_err(seg[i].means.v_c, seg_av[i].means.v_c),
                           rel_err(seg[i].means.i_b, seg_av[i].means.i_b)});
  double worst_d = 0.0;
  for (std::size_t i = 0; i < seg.size(); ++i) worst_d = std::max(worst_d, rel_err(seg[i].means.d, seg_av[i].means.d));
  report("AC8", pointwise && worst_mean < 0.01,
         fmt("after 5 periods max |diff| i_L %.3g A, v_C %.3g V, i_B %.3g A vs ripple i_L %.3g A, v_C %.3g V; "
             "steady state means within %.3f%% (< 1%%); duty-command means differ by %.2f%% (informational)",
             dil, dvc, dib, ripple_il, ripple_vc, 100.0 * worst_mean, 100.0 * worst_d));
}

void ac9() {
  const auto loop = loop_gain(designed_gains(), reference_plant(), kP.v_m);
  const auto locus = root_locus(loop, {1e-15, 1e-12, 1e-9});
  double max_re = -1e300;
  std::vector<Complex> closed;
  for (const auto& pt : locus)
    if (pt.gain == 1.0) closed = pt.poles;
  for (const auto& p : closed) max_re = std::max(max_re, p.real());
  // Cross-check against the closed-loop transfer function's own poles.
  const auto cl = unity_feedback(loop);
  for (const auto& p : cl.poles) max_re = std::max(max_re, p.real());

  auto distance = [&](const LocusPoint& pt) {
    double worst = 0.0;
    for (const auto& pole : pt.poles) {
      double best = 1e300;
      for (const auto& q : loop.poles) best = std::min(best, std::abs(pole - q) / std::max(1.0, std::abs(q)));
      worst = std::max(worst, best);
    }
    return worst;
  };
  const double d15 = distance(locus[0]), d12 = distance(locus[1]), d9 = distance(locus[2]);
  const bool converges = d15 < d12 && d12 < d9 && d15 < 1e-3;
  std::string poles;
  for (const auto& p : closed) poles += fmt("%.5g%+.5gj ", p.real(), p.imag());
  report("AC9", !closed.empty() && max_re < 0.0 && converges,
         fmt("closed-loop poles %s(max Re %.4g < 0); K->0+ distance to open-loop poles %.2e, %.2e, %.2e",
             poles.c_str(), max_re, d9, d12, d15));
}

void ac10() {
  const auto [xn, yn] = default_surface_axes(SurfaceQuantity::eta);
  const auto x = log_axis(xn);
  const auto y = log_axis(yn);
  const auto eta = surface(SurfaceQuantity::eta, x, y, SurfaceFixed::defaults_for(SurfaceQuantity::eta));
  const auto vfix = SurfaceFixed::defaults_for(SurfaceQuantity::v_c);
  const auto vc = surface(SurfaceQuantity::v_c, x, y, vfix);
  const std::size_t nx = x.samples.size(), ny = y.samples.size();
  bool bounded = true, identity = true, monotone = true, strict = true;
  double best = -1.0;
  std::size_t bi = 0, bj = 0;
  for (std::size_t i = 0; i < nx; ++i)
    for (std::size_t j = 0; j < ny; ++j) {
      const double e = eta.value(i, j);
      bounded = bounded && e <= 1.0;
      identity = identity && std::abs(e - vc.value(i, j) / vfix.v_d / vfix.duty) <= 1e-12;
      if (e > best) best = e, bi = i, bj = j;
      if (i + 1 < nx) {
        monotone = monotone && eta.value(i + 1, j) <= e;
        strict = strict && vc.value(i + 1, j) < vc.value(i, j);
      }
      if (j + 1 < ny) {
        monotone = monotone && eta.value(i, j + 1) <= e;
        strict = strict && vc.value(i, j + 1) < vc.value(i, j);
      }
    }
  const bool corner = bi == 0 && bj == 0;
  const auto l = min_inductance(kP, steady_state(kP, 0.9, 800.0, 450.0), 0.14);
  const bool l_ok = std::abs(l.value - kP.inductance) <= 0.01 * kP.inductance;
  report("AC10", bounded && identity && monotone && strict && corner && l_ok,
         fmt("eta<=1 %s, eta=A_v1/D %s, max at minimal corner %s (%.9f), non-increasing %s, V_C strictly "
             "decreasing %s, L_min %.5g mH vs 9.5 mH (%.2f%%)",
             bounded ? "yes" : "no", identity ? "yes" : "no", corner ? "yes" : "no", best, monotone ? "yes" : "no",
             strict ? "yes" : "no", 1e3 * l.value, 100.0 * (l.value / kP.inductance - 1.0)));
}

void ac11(const TransientRuns& runs) {
  const auto gains = designed_gains();
  const auto mod = ModulatorConfig::from(kP);
  auto half = runs.scenario;
  half.h = runs.scenario.h / 2.0;
  const auto fine = run(kP, gains, mod, half);
  const auto a = analyze_trace(runs.switched, runs.scenario);
  const auto b = analyze_trace(fine, half);
  double worst = 0.0, worst_d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max({worst, rel_err(a[i].means.i_l, b[i].means.i_l), rel_err(a[i].means.v_c, b[i].means.v_c),
                      rel_err(a[i].means.i_b, b[i].means.i_b)});
    worst_d = std::max(worst_d, rel_err(a[i].means.d, b[i].means.d));
  }

  const auto again = run(kP, gains, mod, runs.scenario);
  std::ostringstream s1, s2;
  write_trace_csv(s1, runs.switched);
  write_trace_csv(s2, again);
  s1 << metrics_json(a, runs.switched);
  s2 << metrics_json(analyze_trace(again, runs.scenario), again);
  const bool identical = s1.str() == s2.str();
  report("AC11", worst < 1e-3 && worst_d < 1e-3 && identical,
         fmt("steady-window mean change with h/2: states %.4f%%, duty command %.4f%% (< 0.1%%); repeat run "
             "byte-identical %s (%zu bytes)",
             100.0 * worst, 100.0 * worst_d, identical ? "yes" : "no", s1.str().size()));
}

}  // namespace

int main() {
  ac1();
  ac2();
  ac3();
  ac4();
  ac5();
  const auto runs = run_reference_transient();
  ac6(runs);
  ac7(runs);
  ac8(runs);
  ac9();
  ac10();
  ac11(runs);
  std::printf("%d of 11 criteria failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
