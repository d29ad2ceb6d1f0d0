#pragma once

// Fixed-step closed-loop simulation of the charger (switched or averaged plant)
// and the metrics computed on the resulting traces.

#include <optional>
#include <string>
#include <vector>

#include "charger/control.hpp"
#include "charger/model.hpp"

namespace charger {

enum class SimMode { switched, averaged };

SimMode parse_sim_mode(const std::string& name);
std::string to_string(SimMode mode);

/// A piecewise-constant input: value holds from t until the next step.
struct ScheduleStep {
  double t = 0.0;
  double value = 0.0;
  bool operator==(const ScheduleStep&) const = default;
};

using Schedule = std::vector<ScheduleStep>;

struct Scenario {
  double duration = 0.12;
  ConverterState initial{0.0, 400.0};
  double v_d = 800.0;
  Schedule ref_steps{{0.0, 30.0}, {0.06, 40.0}};
  Schedule vob_steps{{0.0, 450.0}, {0.09, 350.0}};
  SimMode mode = SimMode::switched;
  double h = 1.0 / (27e3 * 200.0);

  /// The reference transient: 30 A reference stepping to 40 A at 60 ms, battery
  /// EMF dropping from 450 V to 350 V at 90 ms, h = T_s / 200.
  static Scenario reference(const ChargerParams& p);

  /// Throws ValidationError. In switched mode h must divide T_s (1e-9 relative)
  /// and be at most T_s / 100; in both modes h |lambda_max(A)| <= 2.
  void validate(const ChargerParams& p) const;

  bool operator==(const Scenario&) const = default;
};

/// Value of a schedule at time t.
double schedule_value(const Schedule& s, double t);

struct TraceSample {
  double t = 0.0;
  double i_l = 0.0;
  double v_c = 0.0;
  double i_b = 0.0;
  double d = 0.0;
  double s_f = 0.0;  // 0/1 in raw traces, on-fraction after cycle averaging
  double v_ob = 0.0;
  double i_b_ref = 0.0;
  double v_l = 0.0;
  double i_c = 0.0;
};

struct Trace {
  double h = 0.0;    // sampling interval
  double t_s = 0.0;  // switching period of the run
  SimMode mode = SimMode::switched;
  std::vector<TraceSample> samples;

  double t_begin() const { return samples.empty() ? 0.0 : samples.front().t; }
  double t_end() const { return samples.empty() ? 0.0 : samples.back().t; }
};

/// Runs the scenario. Each step: scheduled inputs, error i_b_ref - i_b, PI
/// update, carrier comparison, then one RK4 step with s_f (or d) held.
/// Throws DivergenceError on a non-finite state.
Trace run(const ChargerParams& p, const PiGains& gains, const ModulatorConfig& modulator,
          const Scenario& scenario);

/// Open-loop variant used for checks: duty held constant, controller bypassed.
Trace run_open_loop(const ChargerParams& p, double duty, const Scenario& scenario);

struct Window {
  double t_start = 0.0;
  double t_end = 0.0;
};

struct WindowMeans {
  Window window;
  double i_l = 0.0;
  double v_c = 0.0;
  double i_b = 0.0;
  double d = 0.0;
  double s_f = 0.0;
  double v_l = 0.0;
  double i_c = 0.0;
  double i_b_ref = 0.0;
  double v_ob = 0.0;
};

/// Means over samples with t in [t_start, t_end). Throws ValidationError if the
/// window is empty or outside the trace.
WindowMeans window_means(const Trace& trace, Window w);

struct RippleReport {
  Window window;
  double i_l_pp = 0.0;
  double i_l_percent = 0.0;
  double v_c_pp = 0.0;
  double v_c_percent = 0.0;
};

/// Peak-to-peak ripple of i_l and v_c over the window, percent of window means.
/// The window must lie inside the trace and span at least 10 switching periods.
RippleReport measure_ripple(const Trace& trace, Window w);

struct SettlingReport {
  double event_t = 0.0;
  double final_value = 0.0;
  double settling_time = 0.0;  // relative to event_t; meaningless when !settled
  bool settled = false;
  double peak_value = 0.0;     // i_b sample furthest from final_value
  double peak_time = 0.0;
};

/// First time after event_t beyond which i_b stays inside final +/- band |final|
/// until end_t (default: trace end). The final value is the i_b mean over the
/// last 10 % of the segment.
SettlingReport settling_time(const Trace& trace, double event_t, double band_fraction = 0.02,
                             std::optional<double> end_t = std::nullopt);

/// Boxcar average over each switching period, one sample per period stamped at
/// the period end. Throws ValidationError when t_s is not a multiple of h.
Trace cycle_average(const Trace& trace);

/// Metrics per constant-input segment of a scenario.
struct SegmentMetrics {
  Window segment;
  WindowMeans means;    // steady window: the last min(10 ms, half segment)
  RippleReport ripple;  // same window; zero-width reports when it spans < 10 T_s
  bool ripple_valid = false;
  SettlingReport settling;
};

std::vector<SegmentMetrics> analyze_trace(const Trace& trace, const Scenario& scenario);

}  // namespace charger
