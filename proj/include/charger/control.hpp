#pragma once

// Current-loop compensation: PI synthesis from the plant DC gain, the runtime
// PI with clamping and conditional-integration anti-windup, and the
// trailing-edge sawtooth PWM modulator.

#include <optional>

#include "charger/model.hpp"
#include "charger/transfer_function.hpp"

namespace charger {

struct PiGains {
  double k_p = 1.0;    // duty per ampere of error
  double tau_i = 1.0;  // s; +inf gives a pure proportional controller

  void validate() const;
  bool operator==(const PiGains&) const = default;
};

struct PiState {
  double integrator = 0.0;
  double d = 0.0;
  bool saturated = false;
};

struct ModulatorConfig {
  double v_m = 1.0;   // carrier peak, V
  double t_s = 1.0 / 27e3;
  double d_min = 0.0;
  double d_max = 1.0;

  void validate() const;
  static ModulatorConfig from(const ChargerParams& p, double d_min = 0.0, double d_max = 1.0) {
    return {p.v_m, p.t_s(), d_min, d_max};
  }
};

/// How the switching frequency enters the gain rule: omega_s = 2 pi f_s, or the
/// raw f_s value (kept for sensitivity studies).
enum class OmegaConvention { two_pi_fs, fs };

double design_omega(double f_s, OmegaConvention convention);

/// k_p = omega_s / k, tau_i = 100 / omega_s, with k the plant DC gain.
/// Throws ValidationError when the plant gain is not positive.
PiGains design_pi(const RationalTransferFunction& plant, double f_s,
                  OmegaConvention convention = OmegaConvention::two_pi_fs);

/// High-frequency approximation of the compensated loop magnitude, k k_p / omega.
/// Equals one at omega = omega_s for designed gains.
double high_frequency_loop_magnitude(double plant_gain, const PiGains& gains, double omega);

/// One forward-Euler PI update. The integrator is frozen when the unclamped
/// output already exceeds a limit and the error pushes further past it.
PiState pi_step(const PiState& state, const PiGains& gains, double error, double h,
                const ModulatorConfig& config);

/// Rising sawtooth v_m * frac(t / t_s). Phases within 1e-9 of a period boundary snap to 0.
double carrier(double t, const ModulatorConfig& config);

/// s_f = 1 while d * v_m exceeds the carrier.
SwitchState pwm_compare(double d, double v_carry, const ModulatorConfig& config);

/// PI transfer function k_p (1 + 1 / (tau_i s)).
RationalTransferFunction pi_transfer_function(const PiGains& gains);

/// Loop gain G_c(s) (1 / V_M) plant(s); with no gains the compensator is unity.
RationalTransferFunction loop_gain(const std::optional<PiGains>& gains,
                                   const RationalTransferFunction& plant, double v_m);

}  // namespace charger
