#pragma once

// Plant model of the two-level (buck-type) battery charger: a half-bridge with
// on-resistance R_DS(on), inductor L with ESR r_L, output capacitor C with
// ESR r_C, and a Thevenin battery (EMF v_OB behind r_B).
//
// The battery branch and the capacitor branch meet at one node, so the r_B/r_C
// parallel combination shows up everywhere. All ratios involving it are
// evaluated in the division-free forms
//   (r_B||r_C)/r_C = r_B/(r_B+r_C),  (r_B||r_C)/r_B = r_C/(r_B+r_C),
//   (r_B||r_C)/(r_B r_C) = 1/(r_B+r_C)
// which stay finite when one of the two resistances is zero.

#include <Eigen/Dense>

namespace charger {

struct ChargerParams {
  double r_ds_on = 0.035;     // Ω
  double r_l = 1.0;           // Ω
  double r_c = 1.5;           // Ω
  double r_b = 1.0;           // Ω
  double inductance = 9.5e-3; // H
  double capacitance = 100e-9;// F
  double f_s = 27e3;          // Hz
  double v_m = 1.0;           // modulator carrier peak, V

  double r_in() const noexcept { return r_ds_on + r_l; }
  double t_s() const noexcept { return 1.0 / f_s; }

  /// Throws ValidationError naming the offending field.
  void validate() const;

  /// Returns *this after validate().
  const ChargerParams& validated() const {
    validate();
    return *this;
  }

  bool operator==(const ChargerParams&) const = default;
};

/// Reference charger with r_c = 1.5 Ω, r_b = 1 Ω and C = 100 nF.
ChargerParams reference_charger();

struct ConverterState {
  double i_l = 0.0;  // A
  double v_c = 0.0;  // V
  bool operator==(const ConverterState&) const = default;
};

struct StateDerivative {
  double di_l = 0.0;  // A/s
  double dv_c = 0.0;  // V/s
};

struct ExternalInputs {
  double v_d = 0.0;   // V
  double v_ob = 0.0;  // V
};

/// Switching function. Q1 follows s_f, Q2 is its complement.
class SwitchState {
public:
  constexpr SwitchState() = default;
  constexpr explicit SwitchState(int s) : s_(s != 0 ? 1 : 0) {}
  static constexpr SwitchState on() { return SwitchState(1); }
  static constexpr SwitchState off() { return SwitchState(0); }

  constexpr int value() const noexcept { return s_; }
  constexpr bool q1_closed() const noexcept { return s_ == 1; }
  constexpr bool q2_closed() const noexcept { return s_ == 0; }
  constexpr bool operator==(const SwitchState&) const = default;

private:
  int s_ = 0;
};

struct BranchOutputs {
  double i_b = 0.0;  // battery current, positive when charging
  double v_l = 0.0;  // inductor voltage
  double i_c = 0.0;  // capacitor current
};

struct SwitchedRhs {
  StateDerivative derivative;
  BranchOutputs outputs;
};

struct OperatingPoint {
  double duty = 0.0;
  double v_d = 0.0;
  double v_ob = 0.0;
  double i_l = 0.0;
  double v_c = 0.0;
  double i_b = 0.0;

  /// Residual of the inductor volt-second balance, relative to its largest term.
  double volt_second_residual(const ChargerParams& p) const;
  /// Residual of the capacitor charge balance, relative to its largest term.
  double charge_balance_residual(const ChargerParams& p) const;
};

/// Small-signal model. Inputs ordered (v_d, v_ob, d); outputs (i_l, v_c, i_b).
struct StateSpaceModel {
  Eigen::Matrix2d a;
  Eigen::Matrix<double, 2, 3> b;
  Eigen::Matrix<double, 3, 2> c;
  Eigen::Matrix3d d;

  static constexpr int kInputVd = 0;
  static constexpr int kInputVob = 1;
  static constexpr int kInputDuty = 2;
  static constexpr int kOutputIl = 0;
  static constexpr int kOutputVc = 1;
  static constexpr int kOutputIb = 2;
};

/// r1*r2/(r1+r2). Throws ValidationError for negative inputs or r1 = r2 = 0.
double parallel(double r1, double r2);

/// Battery current and capacitor current at the output node. Switch independent.
BranchOutputs output_node(const ChargerParams& p, const ConverterState& x, double v_ob);

SwitchedRhs rhs_switched(const ChargerParams& p, const ConverterState& x,
                         const ExternalInputs& u, SwitchState s);

/// Averaged model: the switch is replaced by the duty ratio d in [0, 1].
StateDerivative rhs_averaged(const ChargerParams& p, const ConverterState& x,
                             const ExternalInputs& u, double d);

/// DC equilibrium for a given duty. Requires r_b > 0.
OperatingPoint steady_state(const ChargerParams& p, double duty, double v_d, double v_ob);

/// Duty that makes the equilibrium battery current equal i_b_target.
/// Throws InfeasibleOperatingPoint when that duty falls outside [0, 1].
OperatingPoint duty_for_current(const ChargerParams& p, double i_b_target, double v_d,
                                double v_ob);

StateSpaceModel linearize(const ChargerParams& p, const OperatingPoint& op);

}  // namespace charger
