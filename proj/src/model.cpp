#include "charger/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "charger/errors.hpp"

namespace charger {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw ValidationError(msg);
}

bool finite(double v) { return std::isfinite(v); }

// Coupling ratios of the r_B/r_C node (see header).
struct NodeRatios {
  double to_vc;    // (r_B||r_C)/r_C
  double to_vob;   // (r_B||r_C)/r_B
  double g_sum;    // (r_B||r_C)/(r_B r_C) = 1/(r_B+r_C)
  double r_par;    // r_B||r_C
};

NodeRatios node_ratios(const ChargerParams& p) {
  const double sum = p.r_b + p.r_c;
  return {p.r_b / sum, p.r_c / sum, 1.0 / sum, parallel(p.r_b, p.r_c)};
}

double relative_residual(double residual, std::initializer_list<double> terms) {
  double scale = 0.0;
  for (double t : terms) scale = std::max(scale, std::abs(t));
  return scale > 0.0 ? std::abs(residual) / scale : std::abs(residual);
}

}  // namespace

void ChargerParams::validate() const {
  require(finite(r_ds_on) && r_ds_on >= 0.0, "charger.r_ds_on must be >= 0");
  require(finite(r_l) && r_l >= 0.0, "charger.r_l must be >= 0");
  require(finite(r_c) && r_c >= 0.0, "charger.r_c must be >= 0");
  require(finite(r_b) && r_b >= 0.0, "charger.r_b must be >= 0");
  require(r_b + r_c > 0.0, "charger.r_b and charger.r_c cannot both be zero");
  require(finite(inductance) && inductance > 0.0, "charger.l must be > 0");
  require(finite(capacitance) && capacitance > 0.0, "charger.c must be > 0");
  require(finite(f_s) && f_s > 0.0, "charger.f_s must be > 0");
  require(finite(v_m) && v_m > 0.0, "charger.v_m must be > 0");
}

ChargerParams reference_charger() { return ChargerParams{}; }

double OperatingPoint::volt_second_residual(const ChargerParams& p) const {
  const auto n = node_ratios(p);
  const double t1 = duty * v_d;
  const double t2 = n.to_vc * v_c;
  const double t3 = n.to_vob * v_ob;
  const double t4 = (p.r_in() + n.r_par) * i_l;
  return relative_residual(t1 - t2 - t3 - t4, {t1, t2, t3, t4});
}

double OperatingPoint::charge_balance_residual(const ChargerParams& p) const {
  const double t1 = p.r_b * i_l;
  return relative_residual(t1 - v_c + v_ob, {t1, v_c, v_ob});
}

double parallel(double r1, double r2) {
  require(r1 >= 0.0 && r2 >= 0.0, "parallel: resistances must be >= 0");
  require(r1 + r2 > 0.0, "parallel: both resistances are zero");
  return r1 * r2 / (r1 + r2);
}

BranchOutputs output_node(const ChargerParams& p, const ConverterState& x, double v_ob) {
  const auto n = node_ratios(p);
  BranchOutputs out;
  out.i_c = n.to_vc * x.i_l - n.g_sum * (x.v_c - v_ob);
  out.i_b = x.i_l - out.i_c;
  return out;
}

namespace {

// Inductor voltage with the source term already scaled by s_f or d.
double inductor_voltage(const ChargerParams& p, const ConverterState& x, double v_source,
                        double v_ob) {
  const auto n = node_ratios(p);
  return v_source - n.to_vc * x.v_c - n.to_vob * v_ob - (p.r_in() + n.r_par) * x.i_l;
}

}  // namespace

SwitchedRhs rhs_switched(const ChargerParams& p, const ConverterState& x,
                         const ExternalInputs& u, SwitchState s) {
  SwitchedRhs r;
  r.outputs = output_node(p, x, u.v_ob);
  r.outputs.v_l = inductor_voltage(p, x, s.value() * u.v_d, u.v_ob);
  r.derivative.di_l = r.outputs.v_l / p.inductance;
  r.derivative.dv_c = r.outputs.i_c / p.capacitance;
  return r;
}

StateDerivative rhs_averaged(const ChargerParams& p, const ConverterState& x,
                             const ExternalInputs& u, double d) {
  if (!(d >= 0.0 && d <= 1.0)) throw ValidationError("rhs_averaged: duty outside [0, 1]");
  const auto node = output_node(p, x, u.v_ob);
  return {inductor_voltage(p, x, d * u.v_d, u.v_ob) / p.inductance,
          node.i_c / p.capacitance};
}

OperatingPoint steady_state(const ChargerParams& p, double duty, double v_d, double v_ob) {
  p.validate();
  require(duty >= 0.0 && duty <= 1.0, "steady_state: duty outside [0, 1]");
  require(p.r_b > 0.0, "steady_state: r_b must be > 0");
  OperatingPoint op{duty, v_d, v_ob, 0.0, 0.0, 0.0};
  const double r_in = p.r_in();
  op.v_c = (duty * v_d * p.r_b + r_in * v_ob) / (p.r_b + r_in);
  op.i_l = (op.v_c - v_ob) / p.r_b;
  op.i_b = op.i_l;
  return op;
}

OperatingPoint duty_for_current(const ChargerParams& p, double i_b_target, double v_d,
                                double v_ob) {
  p.validate();
  require(p.r_b > 0.0, "duty_for_current: r_b must be > 0");
  const auto n = node_ratios(p);
  const double v_c = v_ob + p.r_b * i_b_target;
  const double needed = n.to_vc * v_c + n.to_vob * v_ob + (p.r_in() + n.r_par) * i_b_target;
  if (!(v_d > 0.0)) {
    throw InfeasibleOperatingPoint("duty_for_current: v_d must be > 0");
  }
  const double duty = needed / v_d;
  if (!(duty >= 0.0 && duty <= 1.0)) {
    throw InfeasibleOperatingPoint("duty_for_current: required duty " + std::to_string(duty) +
                                   " is outside [0, 1] for i_b = " +
                                   std::to_string(i_b_target) + " A");
  }
  return {duty, v_d, v_ob, i_b_target, v_c, i_b_target};
}

StateSpaceModel linearize(const ChargerParams& p, const OperatingPoint& op) {
  p.validate();
  const auto n = node_ratios(p);
  const double L = p.inductance;
  const double C = p.capacitance;

  StateSpaceModel m;
  m.a << -(p.r_in() + n.r_par) / L, -n.to_vc / L,
          n.to_vc / C,              -n.g_sum / C;
  m.b << op.duty / L, -n.to_vob / L,   op.v_d / L,
         0.0,          n.g_sum / C,    0.0;
  m.c << 1.0, 0.0,
         0.0, 1.0,
         n.to_vob, n.g_sum;
  m.d.setZero();
  m.d(StateSpaceModel::kOutputIb, StateSpaceModel::kInputVob) = -n.g_sum;
  return m;
}

}  // namespace charger
