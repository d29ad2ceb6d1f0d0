#include "charger/control.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "charger/errors.hpp"

namespace charger {

void PiGains::validate() const {
  if (!(k_p > 0.0) || !std::isfinite(k_p)) throw ValidationError("control.k_p must be > 0");
  if (!(tau_i > 0.0)) throw ValidationError("control.tau_i must be > 0");
}

void ModulatorConfig::validate() const {
  if (!(v_m > 0.0)) throw ValidationError("modulator v_m must be > 0");
  if (!(t_s > 0.0)) throw ValidationError("modulator t_s must be > 0");
  if (!(d_min >= 0.0 && d_min < d_max && d_max <= 1.0)) {
    throw ValidationError("control.d_min/d_max must satisfy 0 <= d_min < d_max <= 1");
  }
}

double design_omega(double f_s, OmegaConvention convention) {
  return convention == OmegaConvention::two_pi_fs ? 2.0 * std::numbers::pi * f_s : f_s;
}

PiGains design_pi(const RationalTransferFunction& plant, double f_s, OmegaConvention convention) {
  if (!(plant.gain > 0.0)) throw ValidationError("design_pi: plant DC gain must be positive");
  if (plant.origin_poles() != 0) throw ValidationError("design_pi: plant has poles at the origin");
  if (!(f_s > 0.0)) throw ValidationError("design_pi: f_s must be > 0");
  const double omega_s = design_omega(f_s, convention);
  return {omega_s / plant.gain, 100.0 / omega_s};
}

double high_frequency_loop_magnitude(double plant_gain, const PiGains& gains, double omega) {
  return plant_gain * gains.k_p / omega;
}

PiState pi_step(const PiState& state, const PiGains& gains, double error, double h,
                const ModulatorConfig& config) {
  if (!(h > 0.0)) throw ValidationError("pi_step: h must be > 0");
  PiState next = state;
  const double proportional = gains.k_p * error;
  const double unclamped = proportional + state.integrator;
  const bool push_high = unclamped > config.d_max && error > 0.0;
  const bool push_low = unclamped < config.d_min && error < 0.0;
  if (!push_high && !push_low && std::isfinite(gains.tau_i)) {
    next.integrator += (gains.k_p / gains.tau_i) * error * h;
  }
  const double raw = proportional + next.integrator;
  next.d = std::clamp(raw, config.d_min, config.d_max);
  next.saturated = raw > config.d_max || raw < config.d_min;
  return next;
}

double carrier(double t, const ModulatorConfig& config) {
  const double phase = t / config.t_s;
  const double nearest = std::round(phase);
  if (std::abs(phase - nearest) <= 1e-9 * std::max(1.0, std::abs(phase))) return 0.0;
  return config.v_m * (phase - std::floor(phase));
}

SwitchState pwm_compare(double d, double v_carry, const ModulatorConfig& config) {
  return SwitchState(d * config.v_m > v_carry ? 1 : 0);
}

RationalTransferFunction pi_transfer_function(const PiGains& gains) {
  gains.validate();
  if (std::isinf(gains.tau_i)) return RationalTransferFunction::constant(gains.k_p);
  // k_p (tau_i s + 1) / (tau_i s) in Bode form: gain k_p / tau_i, zero -1/tau_i, pole 0.
  return {gains.k_p / gains.tau_i, {Complex(-1.0 / gains.tau_i)}, {Complex(0.0)}};
}

RationalTransferFunction loop_gain(const std::optional<PiGains>& gains,
                                   const RationalTransferFunction& plant, double v_m) {
  if (!(v_m > 0.0)) throw ValidationError("loop_gain: v_m must be > 0");
  RationalTransferFunction t = plant;
  t.gain /= v_m;
  if (gains) t = pi_transfer_function(*gains) * t;
  return t;
}

}  // namespace charger
