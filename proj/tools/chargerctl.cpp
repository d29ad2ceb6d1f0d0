// chargerctl: command-line front end for the battery-charger toolkit.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "charger/analysis.hpp"
#include "charger/config.hpp"
#include "charger/control.hpp"
#include "charger/errors.hpp"
#include "charger/model.hpp"
#include "charger/serialize.hpp"
#include "charger/sim.hpp"

using namespace charger;

namespace {

struct OperatingPointOptions {
  std::optional<double> duty;
  std::optional<double> current;
  std::optional<double> v_ob;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--duty", duty, "Duty ratio of the operating point");
    cmd->add_option("--current", current, "Battery current of the operating point (A)");
    cmd->add_option("--v-ob", v_ob, "Battery EMF (V); default: first scheduled value");
  }

  OperatingPoint resolve(const LoadedConfig& cfg) const {
    if (duty && current) throw ValidationError("--duty and --current are mutually exclusive");
    const double vob = v_ob.value_or(cfg.scenario.vob_steps.front().value);
    if (duty) return steady_state(cfg.params, *duty, cfg.scenario.v_d, vob);
    const double i_b = current.value_or(cfg.scenario.ref_steps.front().value);
    return duty_for_current(cfg.params, i_b, cfg.scenario.v_d, vob);
  }
};

void emit(const std::optional<std::string>& out, const std::function<void(std::ostream&)>& fill) {
  if (out) {
    write_file_atomic(*out, fill);
  } else {
    fill(std::cout);
  }
}

std::string complex_text(Complex z) {
  if (z.imag() == 0.0) return format_number(z.real());
  return format_number(z.real()) + (z.imag() < 0 ? "-" : "+") + format_number(std::abs(z.imag())) + "j";
}

void print_matrix(const std::string& name, const Eigen::MatrixXd& m) {
  std::cout << name << " =\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::cout << "  [";
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      std::cout << (j ? ", " : "") << format_number(m(i, j));
    }
    std::cout << "]\n";
  }
}

RationalTransferFunction plant_tf(const LoadedConfig& cfg, const OperatingPoint& op) {
  return control_to_battery_tf(linearize(cfg.params, op));
}

PiGains gains_for(const LoadedConfig& cfg, const RationalTransferFunction& plant) {
  if (cfg.gains) return *cfg.gains;
  return design_pi(plant, cfg.params.f_s, cfg.omega);
}

std::string khz(double f) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.4g kHz", f / 1e3);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-level battery charger: models, analysis, PI design and simulation"};
  app.require_subcommand(1);
  std::optional<std::string> config_path;
  app.add_option("--config", config_path, "YAML config (default: built-in reference charger)");

  OperatingPointOptions op_opts;

  auto* steady = app.add_subcommand("steady-state", "DC operating point");
  op_opts.add_to(steady);
  auto* lin = app.add_subcommand("linearize", "Small-signal state-space matrices");
  op_opts.add_to(lin);
  auto* tf = app.add_subcommand("tf", "Control-to-battery-current transfer function");
  op_opts.add_to(tf);
  auto* design = app.add_subcommand("design", "PI gains and loop crossovers");
  op_opts.add_to(design);

  auto* bode = app.add_subcommand("bode", "Loop-gain frequency response CSV");
  bool compensated = false;
  double f_min = 1.0, f_max = 1e8;
  int ppd = 50;
  std::optional<std::string> bode_out;
  bode->add_flag("--compensated", compensated, "Include the PI compensator");
  bode->add_option("--fmin", f_min, "Lowest frequency (Hz)");
  bode->add_option("--fmax", f_max, "Highest frequency (Hz)");
  bode->add_option("--ppd", ppd, "Points per decade");
  bode->add_option("--out", bode_out, "Output CSV (default stdout)");

  auto* locus = app.add_subcommand("rootlocus", "Closed-loop poles of 1 + K T(s)");
  double k_min = 1e-3, k_max = 1e3;
  int k_points = 61;
  std::optional<std::string> locus_out;
  locus->add_option("--kmin", k_min, "Smallest gain");
  locus->add_option("--kmax", k_max, "Largest gain");
  locus->add_option("--points", k_points, "Log-spaced gain samples");
  locus->add_option("--out", locus_out, "Output CSV (default stdout)");

  auto* step = app.add_subcommand("step", "Closed-loop unit-step response CSV");
  double horizon = 0.05, dt = 1e-6;
  std::optional<std::string> step_out;
  step->add_option("--horizon", horizon, "Simulated time (s)");
  step->add_option("--dt", dt, "Output interval (s)");
  step->add_option("--out", step_out, "Output CSV (default stdout)");

  auto* sim = app.add_subcommand("simulate", "Closed-loop time-domain simulation");
  std::string trace_out = "trace.csv";
  std::string metrics_out = "metrics.json";
  std::optional<std::string> mode_override;
  std::size_t stride = 1;
  sim->add_option("--out", trace_out, "Trace CSV");
  sim->add_option("--metrics", metrics_out, "Metrics JSON");
  sim->add_option("--mode", mode_override, "switched | averaged (overrides config)");
  sim->add_option("--stride", stride, "Write every n-th sample");

  auto* sizing = app.add_subcommand("sizing", "Minimum L and C for the ripple budget");
  op_opts.add_to(sizing);
  std::optional<double> size_vc, size_il;
  sizing->add_option("--v-c", size_vc, "Override V_C used by both formulas (V)");
  sizing->add_option("--i-l", size_il, "Override I_L used by the C formula (A)");

  auto* sweep = app.add_subcommand("sweep", "Parameter surface CSV");
  std::string quantity;
  std::optional<std::string> sweep_out;
  double axis_lo = 1e-6, axis_hi = 1e3;
  int axis_ppd = 10;
  bool printed = false;
  sweep->add_option("--quantity", quantity, "v_c | l_min | c_min | eta")->required();
  sweep->add_option("--out", sweep_out, "Output CSV (default stdout)");
  sweep->add_option("--min", axis_lo, "Lowest resistance on both axes (ohm)");
  sweep->add_option("--max", axis_hi, "Highest resistance on both axes (ohm)");
  sweep->add_option("--ppd", axis_ppd, "Axis points per decade");
  sweep->add_flag("--printed", printed, "eta: use the published closed-form expression");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    const LoadedConfig cfg = config_path ? load_config(*config_path) : resolve(reference_config());

    if (*steady) {
      const auto op = op_opts.resolve(cfg);
      std::cout << operating_point_listing(op) << operating_point_json(op) << '\n';
    } else if (*lin) {
      const auto m = linearize(cfg.params, op_opts.resolve(cfg));
      print_matrix("A", m.a);
      print_matrix("B", m.b);
      print_matrix("C", m.c);
      print_matrix("D", m.d);
    } else if (*tf) {
      const auto op = op_opts.resolve(cfg);
      const auto model = linearize(cfg.params, op);
      const auto g = control_to_battery_tf(model);
      const double k_closed = battery_gain_closed_form(cfg.params, op.v_d, model);
      std::cout << "k=" << format_number(g.gain) << '\n';
      for (const auto& z : g.zeros) std::cout << "zero=" << complex_text(z) << '\n';
      for (const auto& p : g.poles) std::cout << "pole=" << complex_text(p) << '\n';
      std::cout << "k_closed_form=" << format_number(k_closed) << '\n'
                << "k_relative_difference=" << format_number(std::abs(k_closed - g.gain) / std::abs(g.gain))
                << '\n';
    } else if (*design) {
      const auto op = op_opts.resolve(cfg);
      const auto plant = plant_tf(cfg, op);
      const auto gains = design_pi(plant, cfg.params.f_s, cfg.omega);
      const auto fu = crossover_frequency(
          frequency_response(loop_gain(std::nullopt, plant, cfg.params.v_m), 1.0, 1e9, 200));
      const auto fc = crossover_frequency(
          frequency_response(loop_gain(gains, plant, cfg.params.v_m), 1.0, 1e9, 200));
      std::cout << "k_p=" << format_number(gains.k_p) << '\n'
                << "tau_i=" << format_number(gains.tau_i) << '\n'
                << "plant_gain=" << format_number(plant.gain) << '\n'
                << "uncompensated_crossover_hz=" << format_number(fu.f_hz) << '\n'
                << "compensated_crossover_hz=" << format_number(fc.f_hz) << '\n';
      std::cout << "# uncompensated f_c " << khz(fu.f_hz) << ", compensated f_c " << khz(fc.f_hz)
                << " (design target f_s = " << khz(cfg.params.f_s) << ")\n";
    } else if (*bode) {
      const auto plant = plant_tf(cfg, op_opts.resolve(cfg));
      const std::optional<PiGains> g =
          compensated ? std::optional<PiGains>(gains_for(cfg, plant)) : std::nullopt;
      const auto fr = frequency_response(loop_gain(g, plant, cfg.params.v_m), f_min, f_max, ppd);
      emit(bode_out, [&](std::ostream& os) { write_bode_csv(os, fr); });
    } else if (*locus) {
      if (!(k_min > 0.0 && k_max > k_min) || k_points < 2) {
        throw ValidationError("rootlocus: need 0 < kmin < kmax and points >= 2");
      }
      const auto plant = plant_tf(cfg, op_opts.resolve(cfg));
      const auto loop = loop_gain(gains_for(cfg, plant), plant, cfg.params.v_m);
      std::vector<double> grid;
      for (int i = 0; i < k_points; ++i) {
        grid.push_back(k_min * std::pow(k_max / k_min, static_cast<double>(i) / (k_points - 1)));
      }
      const auto pts = root_locus(loop, grid);
      emit(locus_out, [&](std::ostream& os) { write_root_locus_csv(os, pts); });
    } else if (*step) {
      const auto plant = plant_tf(cfg, op_opts.resolve(cfg));
      const auto loop = loop_gain(gains_for(cfg, plant), plant, cfg.params.v_m);
      const auto r = step_response(loop, horizon, dt);
      if (r.unstable) std::cerr << "warning: closed loop has right-half-plane poles\n";
      emit(step_out, [&](std::ostream& os) { write_step_csv(os, r); });
      const double ts = step_settling_time(r);
      std::cerr << "settling (2 %): " << (ts >= 0 ? format_number(ts * 1e3) + " ms" : "not settled") << '\n';
    } else if (*sim) {
      Scenario sc = cfg.scenario;
      if (mode_override) sc.mode = parse_sim_mode(*mode_override);
      const auto op0 = duty_for_current(cfg.params, sc.ref_steps.front().value, sc.v_d,
                                        sc.vob_steps.front().value);
      const auto gains = gains_for(cfg, plant_tf(cfg, op0));
      const Trace trace = run(cfg.params, gains, cfg.modulator, sc);
      const auto metrics = analyze_trace(trace, sc);
      write_file_atomic(trace_out, [&](std::ostream& os) { write_trace_csv(os, trace, stride); });
      write_file_atomic(metrics_out, [&](std::ostream& os) { os << metrics_json(metrics, trace); });
      for (const auto& m : metrics) {
        std::printf("[%.1f, %.1f) ms: i_B=%.4g A  d=%.4g  v_C=%.5g V  settle=%s\n",
                    m.segment.t_start * 1e3, m.segment.t_end * 1e3, m.means.i_b, m.means.d, m.means.v_c,
                    m.settling.settled ? (format_number(m.settling.settling_time * 1e3) + " ms").c_str()
                                       : "unsettled");
      }
    } else if (*sizing) {
      auto op = op_opts.resolve(cfg);
      if (size_vc) op.v_c = *size_vc;
      const double i_l = size_il.value_or(op.i_l);
      const auto l = min_inductance(cfg.params, op, cfg.delta_i_l);
      const auto c = min_capacitance(cfg.params, op.v_c, op.v_ob, i_l, op.duty, cfg.delta_v_c);
      std::cout << "l_min=" << format_number(l.value) << '\n'
                << "l_feasible=" << (l.feasible ? "true" : "false") << '\n'
                << "l_bracket=" << format_number(l.bracket) << '\n'
                << "delta_i_l=" << format_number(l.ripple_bound) << '\n'
                << "c_min=" << format_number(c.value) << '\n'
                << "c_feasible=" << (c.feasible ? "true" : "false") << '\n'
                << "c_bracket=" << format_number(c.bracket) << '\n'
                << "delta_v_c=" << format_number(c.ripple_bound) << '\n';
      std::cout << "# L_min " << format_number(l.value * 1e3) << " mH at D=" << format_number(op.duty)
                << ", V_C=" << format_number(op.v_c) << " V\n";
    } else if (*sweep) {
      const auto q = parse_surface_quantity(quantity);
      SurfaceFixed fixed = SurfaceFixed::defaults_for(q);
      fixed.params = cfg.params;
      fixed.v_d = cfg.scenario.v_d;
      fixed.printed_efficiency = printed;
      const auto [xn, yn] = default_surface_axes(q);
      const auto g = surface(q, log_axis(xn, axis_lo, axis_hi, axis_ppd),
                             log_axis(yn, axis_lo, axis_hi, axis_ppd), fixed);
      emit(sweep_out, [&](std::ostream& os) { write_surface_csv(os, g); });
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
