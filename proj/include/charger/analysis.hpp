#pragma once

// Steady-state figures of merit, L/C sizing, transfer-function extraction and
// the frequency/time-domain analyses built on it, and parameter surfaces.

#include <optional>
#include <string>
#include <vector>

#include "charger/model.hpp"
#include "charger/transfer_function.hpp"

namespace charger {

struct EfficiencyReport {
  double eta_physical = 0.0;  // terminal power over switched input power = a_v1 / D
  double eta_printed = 0.0;   // the published closed-form expression, kept verbatim
  double p_in = 0.0;
  double p_out_terminal = 0.0;
  double p_out_emf = 0.0;
  double a_v1 = 0.0;  // V_C / V_d
  double a_v2 = 0.0;  // V_C / V_OB
  /// eta_printed lies outside [0, 1] or is not finite.
  bool printed_out_of_range() const;
};

/// Throws ValidationError when op.duty <= 0.
EfficiencyReport efficiency(const ChargerParams& p, const OperatingPoint& op);

/// The published efficiency expression. Returns NaN/Inf where it is undefined (R_in = 0).
double printed_efficiency(const ChargerParams& p, double duty, double a_v1, double a_v2);

struct SizingResult {
  /// L_min (H) or C_min (F). For an infeasible inductor point this holds the
  /// signed (negative) value.
  double value = 0.0;
  /// False when the bracket is negative (L) or nonpositive (C, degenerate point).
  bool feasible = true;
  double bracket = 0.0;  // V for L, A for C
  double duty = 0.0;
  double v_c = 0.0;
  double v_ob = 0.0;
  double i_l = 0.0;
  double ripple_bound = 0.0;  // ΔI_L in A or ΔV_C in V
};

/// Inductance needed to keep the inductor peak-to-peak ripple under delta_i_l,
/// from the on-interval current slope.
SizingResult min_inductance(const ChargerParams& p, const OperatingPoint& op, double delta_i_l);

/// Capacitance needed to keep the capacitor ripple under delta_v_c. V_C, V_OB
/// and I_L are taken as given; at an exact equilibrium the bracket vanishes.
SizingResult min_capacitance(const ChargerParams& p, double v_c, double v_ob, double i_l,
                             double duty, double delta_v_c);

/// i_b / d entry of C (sI - A)^-1 B + D, in gain/zero/pole form.
RationalTransferFunction control_to_battery_tf(const StateSpaceModel& model);

/// General 2-state SISO extraction for a chosen (output, input) pair.
RationalTransferFunction siso_tf(const StateSpaceModel& model, int output, int input);

/// DC gain from the closed-form expression V_d / (L C (r_B + r_C) p1 p2), with
/// p1 p2 = det(A). Cross-check for the matrix route.
double battery_gain_closed_form(const ChargerParams& p, double v_d, const StateSpaceModel& model);

struct FrequencyPoint {
  double f_hz = 0.0;
  double mag_db = 0.0;
  double phase_deg = 0.0;
};

struct FrequencyResponse {
  std::vector<FrequencyPoint> points;
};

/// Log-spaced samples from f_min to f_max inclusive.
FrequencyResponse frequency_response(const RationalTransferFunction& tf, double f_min,
                                     double f_max, int points_per_decade);

struct Crossover {
  double f_hz = 0.0;
  bool degenerate = false;  // magnitude is 0 dB over the whole range
};

/// Lowest 0 dB crossing, log-linear interpolation between bracketing samples.
/// Throws NumericError when the magnitude never crosses 0 dB.
Crossover crossover_frequency(const FrequencyResponse& fr);

struct LocusPoint {
  double gain = 0.0;
  std::vector<Complex> poles;
};

/// Roots of den(s) + K num(s) for each K. K = 1 is always included.
std::vector<LocusPoint> root_locus(const RationalTransferFunction& open_loop,
                                   std::vector<double> gain_grid);

/// T / (1 + T).
RationalTransferFunction unity_feedback(const RationalTransferFunction& loop);

struct StepSample {
  double t = 0.0;
  double y = 0.0;
};

struct StepResponse {
  std::vector<StepSample> samples;
  std::vector<Complex> closed_loop_poles;
  bool unstable = false;
  int substeps = 1;  // internal RK4 steps per output sample
};

/// Unit-step response of the unity-feedback closed loop of `loop`, integrated
/// with RK4 on a controllable-canonical realization. Output every dt; the
/// integrator sub-steps so that h |lambda_max| <= 0.5.
StepResponse step_response(const RationalTransferFunction& loop, double horizon, double dt);

/// Time after which |y - y_final| stays within band * |y_final|. Negative if never.
double step_settling_time(const StepResponse& r, double band_fraction = 0.02);

// ---------------------------------------------------------------------------
// Parameter surfaces

enum class SurfaceQuantity { v_c, l_min, c_min, eta };

SurfaceQuantity parse_surface_quantity(const std::string& name);
std::string to_string(SurfaceQuantity q);

struct SurfaceAxis {
  std::string name;  // one of r_ds_on, r_l, r_c, r_b
  std::string unit = "ohm";
  std::vector<double> samples;
};

/// Logarithmic axis from lo to hi inclusive with the given density.
SurfaceAxis log_axis(std::string name, double lo = 1e-6, double hi = 1e3,
                     int points_per_decade = 10);

/// Fixed quantities for a sweep. Defaults are the published sweep tables.
struct SurfaceFixed {
  ChargerParams params = reference_charger();
  double v_d = 800.0;
  double v_ob = 450.0;
  double duty = 0.9;
  double delta_i_l = 0.14;  // A
  double delta_v_c = 0.02;  // V
  double i_b = 30.0;        // A, used as I_L for the capacitor sizing
  /// Held V_C for the sizing surfaces. Empty: use the equilibrium at each point.
  std::optional<double> v_c;
  bool printed_efficiency = false;

  static SurfaceFixed defaults_for(SurfaceQuantity q);
};

struct SurfaceGrid {
  SurfaceAxis x;
  SurfaceAxis y;
  std::vector<double> values;  // row-major, value(i, j) at (x_i, y_j)
  std::vector<char> feasible;  // same layout

  double value(std::size_t i, std::size_t j) const { return values[i * y.samples.size() + j]; }
  bool is_feasible(std::size_t i, std::size_t j) const {
    return feasible[i * y.samples.size() + j] != 0;
  }
};

/// Default swept axes: (r_ds_on, r_l), or (r_c, r_l) for c_min.
std::pair<std::string, std::string> default_surface_axes(SurfaceQuantity q);

SurfaceGrid surface(SurfaceQuantity q, const SurfaceAxis& x, const SurfaceAxis& y,
                    const SurfaceFixed& fixed);

}  // namespace charger
