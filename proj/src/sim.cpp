#include "charger/sim.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "charger/errors.hpp"
#include "charger/rk4.hpp"

namespace charger {

SimMode parse_sim_mode(const std::string& name) {
  if (name == "switched") return SimMode::switched;
  if (name == "averaged") return SimMode::averaged;
  throw ValidationError("scenario.mode must be 'switched' or 'averaged', got '" + name + "'");
}

std::string to_string(SimMode mode) {
  return mode == SimMode::switched ? "switched" : "averaged";
}

Scenario Scenario::reference(const ChargerParams& p) {
  Scenario s;
  s.h = p.t_s() / 200.0;
  return s;
}

namespace {

void check_schedule(const Schedule& s, const std::string& name) {
  if (s.empty()) throw ValidationError("scenario." + name + " is empty");
  if (s.front().t != 0.0) throw ValidationError("scenario." + name + " must start at t = 0");
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!std::isfinite(s[i].t) || !std::isfinite(s[i].value)) {
      throw ValidationError("scenario." + name + " has a non-finite entry");
    }
    if (i > 0 && !(s[i].t > s[i - 1].t)) {
      throw ValidationError("scenario." + name + " times must be strictly increasing");
    }
  }
}

double max_eigen_magnitude(const ChargerParams& p) {
  // A does not depend on the operating point.
  const auto model = linearize(p, OperatingPoint{});
  const Eigen::EigenSolver<Eigen::Matrix2d> es(model.a, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

// Number of grid steps per switching period, or 0 when h does not divide T_s.
long steps_per_period(double t_s, double h) {
  const double n = t_s / h;
  const double r = std::round(n);
  if (r < 1.0 || std::abs(n - r) > 1e-9 * n) return 0;
  return static_cast<long>(r);
}

std::size_t step_index(double t, double h) {
  return static_cast<std::size_t>(std::ceil(t / h - 1e-6));
}

// Schedule converted to grid indices at which each value takes effect.
struct IndexedSchedule {
  std::vector<std::size_t> index;
  std::vector<double> value;
  std::size_t next = 0;
  double current = 0.0;

  IndexedSchedule(const Schedule& s, double h) {
    for (const auto& step : s) {
      index.push_back(step_index(step.t, h));
      value.push_back(step.value);
    }
  }

  double at(std::size_t k) {
    while (next < index.size() && index[next] <= k) current = value[next++];
    return current;
  }
};

using Vec2 = Eigen::Vector2d;

template <typename Control>
Trace simulate(const ChargerParams& p, const Scenario& sc, const ModulatorConfig& mod,
               Control&& control) {
  p.validate();
  sc.validate(p);
  mod.validate();

  const double h = sc.h;
  const auto steps = static_cast<std::size_t>(std::llround(sc.duration / h));
  const long per_period = steps_per_period(mod.t_s, h);

  Trace trace;
  trace.h = h;
  trace.t_s = mod.t_s;
  trace.mode = sc.mode;
  trace.samples.reserve(steps + 1);

  IndexedSchedule ref(sc.ref_steps, h);
  IndexedSchedule vob(sc.vob_steps, h);
  Vec2 x(sc.initial.i_l, sc.initial.v_c);

  for (std::size_t k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * h;
    const double v_ob = vob.at(k);
    const double i_ref = ref.at(k);
    const ConverterState state{x(0), x(1)};
    const BranchOutputs node = output_node(p, state, v_ob);

    const double d = control(i_ref - node.i_b, h);
    const double v_carry =
        per_period > 0
            ? mod.v_m * static_cast<double>(static_cast<long>(k % static_cast<std::size_t>(per_period))) /
                  static_cast<double>(per_period)
            : carrier(t, mod);
    const SwitchState s = pwm_compare(d, v_carry, mod);
    const ExternalInputs u{sc.v_d, v_ob};

    TraceSample rec;
    rec.t = t;
    rec.i_l = x(0);
    rec.v_c = x(1);
    rec.i_b = node.i_b;
    rec.d = d;
    rec.s_f = s.value();
    rec.v_ob = v_ob;
    rec.i_b_ref = i_ref;
    rec.i_c = node.i_c;

    if (sc.mode == SimMode::switched) {
      rec.v_l = rhs_switched(p, state, u, s).outputs.v_l;
      trace.samples.push_back(rec);
      if (k == steps) break;
      x = rk4_step(
          [&](double, const Vec2& y) {
            const auto r = rhs_switched(p, {y(0), y(1)}, u, s);
            return Vec2(r.derivative.di_l, r.derivative.dv_c);
          },
          x, t, h);
    } else {
      rec.v_l = rhs_averaged(p, state, u, d).di_l * p.inductance;
      trace.samples.push_back(rec);
      if (k == steps) break;
      x = rk4_step(
          [&](double, const Vec2& y) {
            const auto r = rhs_averaged(p, {y(0), y(1)}, u, d);
            return Vec2(r.di_l, r.dv_c);
          },
          x, t, h);
    }
    if (!x.allFinite()) {
      throw DivergenceError(t + h, "simulation diverged at t = " + std::to_string(t + h) + " s");
    }
  }
  return trace;
}

}  // namespace

double schedule_value(const Schedule& s, double t) {
  double v = s.empty() ? 0.0 : s.front().value;
  for (const auto& step : s) {
    if (step.t <= t) v = step.value;
  }
  return v;
}

void Scenario::validate(const ChargerParams& p) const {
  if (!(duration > 0.0) || !std::isfinite(duration)) {
    throw ValidationError("scenario.duration must be > 0");
  }
  if (!(h > 0.0) || h > duration) throw ValidationError("scenario.h must be in (0, duration]");
  if (!std::isfinite(initial.i_l) || !std::isfinite(initial.v_c)) {
    throw ValidationError("scenario initial state must be finite");
  }
  if (!(v_d >= 0.0)) throw ValidationError("charger.v_d must be >= 0");
  check_schedule(ref_steps, "ref_steps");
  check_schedule(vob_steps, "vob_steps");
  if (mode == SimMode::switched) {
    const double t_s = p.t_s();
    if (h > t_s / 100.0 * (1.0 + 1e-12)) {
      throw ValidationError("scenario.h must be <= T_s/100 in switched mode");
    }
    if (steps_per_period(t_s, h) == 0) {
      throw ValidationError("scenario.h must divide T_s in switched mode");
    }
  }
  const double lambda = max_eigen_magnitude(p);
  if (h * lambda > 2.0) {
    throw ValidationError("scenario.h = " + std::to_string(h) + " s exceeds the explicit stability bound 2/|lambda_max| = " +
                          std::to_string(2.0 / lambda) + " s");
  }
}

Trace run(const ChargerParams& p, const PiGains& gains, const ModulatorConfig& modulator,
          const Scenario& scenario) {
  gains.validate();
  PiState pi;
  pi.d = modulator.d_min;
  return simulate(p, scenario, modulator, [&](double error, double h) {
    pi = pi_step(pi, gains, error, h, modulator);
    return pi.d;
  });
}

Trace run_open_loop(const ChargerParams& p, double duty, const Scenario& scenario) {
  if (!(duty >= 0.0 && duty <= 1.0)) throw ValidationError("run_open_loop: duty outside [0, 1]");
  return simulate(p, scenario, ModulatorConfig::from(p),
                  [duty](double, double) { return duty; });
}

// ---------------------------------------------------------------------------
// Metrics

namespace {

struct Range {
  std::size_t begin;
  std::size_t end;
};

Range window_range(const Trace& trace, Window w) {
  if (trace.samples.empty()) throw ValidationError("trace is empty");
  const double slack = 1e-9 * trace.h;
  if (!(w.t_end > w.t_start) || w.t_start < trace.t_begin() - slack ||
      w.t_end > trace.t_end() + trace.h + slack) {
    throw ValidationError("window [" + std::to_string(w.t_start) + ", " + std::to_string(w.t_end) +
                          ") is outside the trace");
  }
  const auto& s = trace.samples;
  const auto lo = std::lower_bound(s.begin(), s.end(), w.t_start - slack,
                                   [](const TraceSample& a, double t) { return a.t < t; });
  const auto hi = std::lower_bound(s.begin(), s.end(), w.t_end - slack,
                                   [](const TraceSample& a, double t) { return a.t < t; });
  const Range r{static_cast<std::size_t>(lo - s.begin()), static_cast<std::size_t>(hi - s.begin())};
  if (r.end <= r.begin) throw ValidationError("window contains no samples");
  return r;
}

}  // namespace

WindowMeans window_means(const Trace& trace, Window w) {
  const Range r = window_range(trace, w);
  WindowMeans m;
  m.window = w;
  for (std::size_t k = r.begin; k < r.end; ++k) {
    const auto& s = trace.samples[k];
    m.i_l += s.i_l;
    m.v_c += s.v_c;
    m.i_b += s.i_b;
    m.d += s.d;
    m.s_f += s.s_f;
    m.v_l += s.v_l;
    m.i_c += s.i_c;
    m.i_b_ref += s.i_b_ref;
    m.v_ob += s.v_ob;
  }
  const double n = static_cast<double>(r.end - r.begin);
  for (double* v : {&m.i_l, &m.v_c, &m.i_b, &m.d, &m.s_f, &m.v_l, &m.i_c, &m.i_b_ref, &m.v_ob}) {
    *v /= n;
  }
  return m;
}

RippleReport measure_ripple(const Trace& trace, Window w) {
  if (w.t_end - w.t_start < 10.0 * trace.t_s * (1.0 - 1e-9)) {
    throw ValidationError("ripple window must span at least 10 switching periods");
  }
  const Range r = window_range(trace, w);
  const auto first = trace.samples.begin() + static_cast<std::ptrdiff_t>(r.begin);
  const auto last = trace.samples.begin() + static_cast<std::ptrdiff_t>(r.end);
  const auto [il_lo, il_hi] = std::minmax_element(
      first, last, [](const TraceSample& a, const TraceSample& b) { return a.i_l < b.i_l; });
  const auto [vc_lo, vc_hi] = std::minmax_element(
      first, last, [](const TraceSample& a, const TraceSample& b) { return a.v_c < b.v_c; });
  const WindowMeans m = window_means(trace, w);
  RippleReport rep;
  rep.window = w;
  rep.i_l_pp = il_hi->i_l - il_lo->i_l;
  rep.v_c_pp = vc_hi->v_c - vc_lo->v_c;
  rep.i_l_percent = 100.0 * rep.i_l_pp / std::abs(m.i_l);
  rep.v_c_percent = 100.0 * rep.v_c_pp / std::abs(m.v_c);
  return rep;
}

SettlingReport settling_time(const Trace& trace, double event_t, double band_fraction,
                             std::optional<double> end_t) {
  if (!(band_fraction > 0.0 && band_fraction < 1.0)) {
    throw ValidationError("settling_time: band_fraction must be in (0, 1)");
  }
  const double end = end_t.value_or(trace.t_end() + trace.h);
  const Range r = window_range(trace, {event_t, end});
  const std::size_t n = r.end - r.begin;
  const std::size_t tail = std::max<std::size_t>(1, n / 10);

  SettlingReport rep;
  rep.event_t = event_t;
  for (std::size_t k = r.end - tail; k < r.end; ++k) rep.final_value += trace.samples[k].i_b;
  rep.final_value /= static_cast<double>(tail);

  const double band = band_fraction * std::abs(rep.final_value);
  double worst = -1.0;
  for (std::size_t k = r.begin; k < r.end; ++k) {
    const double dev = std::abs(trace.samples[k].i_b - rep.final_value);
    if (dev > worst) {
      worst = dev;
      rep.peak_value = trace.samples[k].i_b;
      rep.peak_time = trace.samples[k].t;
    }
  }

  std::size_t first_inside = r.end;
  for (std::size_t k = r.end; k-- > r.begin;) {
    if (std::abs(trace.samples[k].i_b - rep.final_value) > band) break;
    first_inside = k;
  }
  if (first_inside == r.end) {
    rep.settled = false;
    rep.settling_time = std::numeric_limits<double>::quiet_NaN();
  } else {
    rep.settled = true;
    rep.settling_time = first_inside == r.begin ? 0.0 : trace.samples[first_inside].t - event_t;
  }
  return rep;
}

Trace cycle_average(const Trace& trace) {
  const long per = steps_per_period(trace.t_s, trace.h);
  if (per == 0) throw ValidationError("cycle_average: trace grid is not aligned to T_s");
  const auto n = static_cast<std::size_t>(per);
  Trace out;
  out.h = trace.t_s;
  out.t_s = trace.t_s;
  out.mode = trace.mode;
  const auto& s = trace.samples;
  for (std::size_t start = 0; start + n <= s.size(); start += n) {
    TraceSample avg;
    for (std::size_t k = start; k < start + n; ++k) {
      avg.i_l += s[k].i_l;
      avg.v_c += s[k].v_c;
      avg.i_b += s[k].i_b;
      avg.d += s[k].d;
      avg.s_f += s[k].s_f;
      avg.v_ob += s[k].v_ob;
      avg.i_b_ref += s[k].i_b_ref;
      avg.v_l += s[k].v_l;
      avg.i_c += s[k].i_c;
    }
    for (double* v : {&avg.i_l, &avg.v_c, &avg.i_b, &avg.d, &avg.s_f, &avg.v_ob, &avg.i_b_ref,
                      &avg.v_l, &avg.i_c}) {
      *v /= static_cast<double>(n);
    }
    avg.t = s[start].t + trace.t_s;
    out.samples.push_back(avg);
  }
  return out;
}

std::vector<SegmentMetrics> analyze_trace(const Trace& trace, const Scenario& scenario) {
  std::vector<double> bounds{0.0};
  for (const auto& s : scenario.ref_steps) bounds.push_back(s.t);
  for (const auto& s : scenario.vob_steps) bounds.push_back(s.t);
  bounds.push_back(scenario.duration);
  std::sort(bounds.begin(), bounds.end());
  bounds.erase(std::unique(bounds.begin(), bounds.end()), bounds.end());
  while (!bounds.empty() && bounds.back() > scenario.duration) bounds.pop_back();

  std::vector<SegmentMetrics> out;
  for (std::size_t i = 0; i + 1 < bounds.size(); ++i) {
    SegmentMetrics m;
    m.segment = {bounds[i], bounds[i + 1]};
    const double width = std::min(0.010, 0.5 * (bounds[i + 1] - bounds[i]));
    const Window steady{bounds[i + 1] - width, bounds[i + 1]};
    m.means = window_means(trace, steady);
    if (width >= 10.0 * trace.t_s) {
      m.ripple = measure_ripple(trace, steady);
      m.ripple_valid = true;
    } else {
      m.ripple.window = steady;
    }
    m.settling = settling_time(trace, bounds[i], 0.02, bounds[i + 1]);
    out.push_back(m);
  }
  return out;
}

}  // namespace charger
