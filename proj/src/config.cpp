#include "charger/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "charger/errors.hpp"

namespace charger {

namespace {

std::string where(const YAML::Node& node, const std::string& source) {
  const auto mark = node.Mark();
  if (mark.line < 0) return source;
  return source + ":" + std::to_string(mark.line + 1);
}

void reject_unknown(const YAML::Node& section, const std::string& prefix,
                    const std::set<std::string>& allowed, const std::string& source) {
  for (const auto& kv : section) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) {
      throw ConfigError(where(kv.first, source) + ": unknown key '" + prefix + key + "'");
    }
  }
}

double as_number(const YAML::Node& node, const std::string& key, const std::string& source) {
  if (!node.IsScalar()) throw ConfigError(where(node, source) + ": '" + key + "' must be a number");
  const std::string text = node.Scalar();
  double v = 0.0;
  std::size_t used = 0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || !std::isfinite(v)) {
    throw ConfigError(where(node, source) + ": '" + key + "' is not a finite number: '" + text + "'");
  }
  return v;
}

double required(const YAML::Node& section, const std::string& name, const std::string& prefix,
                const std::string& source) {
  const auto node = section[name];
  if (!node) throw ConfigError(source + ": missing required key '" + prefix + name + "'");
  return as_number(node, prefix + name, source);
}

void optional_number(const YAML::Node& section, const std::string& name, const std::string& prefix,
                     const std::string& source, double& out) {
  if (const auto node = section[name]) out = as_number(node, prefix + name, source);
}

Schedule as_schedule(const YAML::Node& node, const std::string& key, const std::string& source) {
  if (!node.IsSequence()) {
    throw ConfigError(where(node, source) + ": '" + key + "' must be a list of [t, value] pairs");
  }
  Schedule out;
  for (const auto& item : node) {
    if (!item.IsSequence() || item.size() != 2) {
      throw ConfigError(where(item, source) + ": '" + key + "' entries must be [t, value] pairs");
    }
    out.push_back({as_number(item[0], key, source), as_number(item[1], key, source)});
  }
  return out;
}

RippleSpec as_ripple(const YAML::Node& node, const std::string& key, const std::string& abs_unit,
                     const std::string& source) {
  if (!node.IsScalar()) {
    throw ConfigError(where(node, source) + ": '" + key + "' must be a string like \"5 %\"");
  }
  const std::string text = node.Scalar();
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  std::string unit = used ? text.substr(used) : "";
  unit.erase(0, unit.find_first_not_of(' '));
  unit.erase(unit.find_last_not_of(' ') + 1);
  if (used == 0 || !std::isfinite(v)) {
    throw ConfigError(where(node, source) + ": '" + key + "' has no numeric value: '" + text + "'");
  }
  if (unit == "%") return {v, true};
  if (unit == abs_unit) return {v, false};
  throw ConfigError(where(node, source) + ": '" + key + "' unit must be '" + abs_unit +
                    "' or '%', got '" + unit + "'");
}

YAML::Node section(const YAML::Node& root, const std::string& name, const std::string& source) {
  const auto node = root[name];
  if (node && !node.IsMap()) throw ConfigError(where(node, source) + ": '" + name + "' must be a mapping");
  return node;
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string schedule_text(const Schedule& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ", ";
    out += "[" + num(s[i].t) + ", " + num(s[i].value) + "]";
  }
  return out + "]";
}

}  // namespace

ConfigDocument parse_config(const std::string& text, const std::string& source) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(source + ":" + std::to_string(e.mark.line + 1) + ": parse error: " + e.msg);
  }
  if (!root.IsMap()) throw ConfigError(source + ": top level must be a mapping with a 'charger' section");
  reject_unknown(root, "", {"charger", "control", "scenario", "sizing"}, source);

  ConfigDocument doc;
  const auto ch = section(root, "charger", source);
  if (!ch) throw ConfigError(source + ": missing required section 'charger'");
  reject_unknown(ch, "charger.", {"v_d", "r_ds_on", "r_l", "r_c", "r_b", "l", "c", "f_s", "v_m"}, source);
  doc.v_d = required(ch, "v_d", "charger.", source);
  doc.charger.r_ds_on = required(ch, "r_ds_on", "charger.", source);
  doc.charger.r_l = required(ch, "r_l", "charger.", source);
  doc.charger.r_c = required(ch, "r_c", "charger.", source);
  doc.charger.r_b = required(ch, "r_b", "charger.", source);
  doc.charger.inductance = required(ch, "l", "charger.", source);
  doc.charger.capacitance = required(ch, "c", "charger.", source);
  doc.charger.f_s = required(ch, "f_s", "charger.", source);
  optional_number(ch, "v_m", "charger.", source, doc.charger.v_m);

  if (const auto ctl = section(root, "control", source)) {
    reject_unknown(ctl, "control.", {"k_p", "tau_i", "d_min", "d_max", "omega_convention"}, source);
    if (const auto n = ctl["k_p"]) doc.k_p = as_number(n, "control.k_p", source);
    if (const auto n = ctl["tau_i"]) doc.tau_i = as_number(n, "control.tau_i", source);
    optional_number(ctl, "d_min", "control.", source, doc.d_min);
    optional_number(ctl, "d_max", "control.", source, doc.d_max);
    if (const auto n = ctl["omega_convention"]) {
      const auto v = n.as<std::string>();
      if (v == "2pi_fs") {
        doc.omega = OmegaConvention::two_pi_fs;
      } else if (v == "fs") {
        doc.omega = OmegaConvention::fs;
      } else {
        throw ConfigError(where(n, source) + ": 'control.omega_convention' must be \"2pi_fs\" or \"fs\"");
      }
    }
  }

  if (const auto sc = section(root, "scenario", source)) {
    reject_unknown(sc, "scenario.",
                   {"duration", "h", "i_l0", "v_c0", "ref_steps", "vob_steps", "mode"}, source);
    optional_number(sc, "duration", "scenario.", source, doc.duration);
    if (const auto n = sc["h"]) doc.h = as_number(n, "scenario.h", source);
    optional_number(sc, "i_l0", "scenario.", source, doc.i_l0);
    optional_number(sc, "v_c0", "scenario.", source, doc.v_c0);
    if (const auto n = sc["ref_steps"]) doc.ref_steps = as_schedule(n, "scenario.ref_steps", source);
    if (const auto n = sc["vob_steps"]) doc.vob_steps = as_schedule(n, "scenario.vob_steps", source);
    if (const auto n = sc["mode"]) {
      try {
        doc.mode = parse_sim_mode(n.as<std::string>());
      } catch (const ValidationError& e) {
        throw ConfigError(where(n, source) + ": " + e.what());
      }
    }
  }

  if (const auto sz = section(root, "sizing", source)) {
    reject_unknown(sz, "sizing.", {"delta_il", "delta_vc"}, source);
    if (const auto n = sz["delta_il"]) doc.delta_il = as_ripple(n, "sizing.delta_il", "A", source);
    if (const auto n = sz["delta_vc"]) doc.delta_vc = as_ripple(n, "sizing.delta_vc", "V", source);
  }
  return doc;
}

ConfigDocument read_config_document(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path);
}

std::string write_config(const ConfigDocument& doc) {
  std::ostringstream os;
  const auto& c = doc.charger;
  os << "charger:\n"
     << "  v_d: " << num(doc.v_d) << "\n"
     << "  r_ds_on: " << num(c.r_ds_on) << "\n"
     << "  r_l: " << num(c.r_l) << "\n"
     << "  r_c: " << num(c.r_c) << "\n"
     << "  r_b: " << num(c.r_b) << "\n"
     << "  l: " << num(c.inductance) << "\n"
     << "  c: " << num(c.capacitance) << "\n"
     << "  f_s: " << num(c.f_s) << "\n"
     << "  v_m: " << num(c.v_m) << "\n";
  os << "control:\n";
  if (doc.k_p) os << "  k_p: " << num(*doc.k_p) << "\n";
  if (doc.tau_i) os << "  tau_i: " << num(*doc.tau_i) << "\n";
  os << "  d_min: " << num(doc.d_min) << "\n"
     << "  d_max: " << num(doc.d_max) << "\n"
     << "  omega_convention: " << (doc.omega == OmegaConvention::two_pi_fs ? "2pi_fs" : "fs") << "\n";
  os << "scenario:\n"
     << "  duration: " << num(doc.duration) << "\n";
  if (doc.h) os << "  h: " << num(*doc.h) << "\n";
  os << "  i_l0: " << num(doc.i_l0) << "\n"
     << "  v_c0: " << num(doc.v_c0) << "\n"
     << "  ref_steps: " << schedule_text(doc.ref_steps) << "\n"
     << "  vob_steps: " << schedule_text(doc.vob_steps) << "\n"
     << "  mode: " << to_string(doc.mode) << "\n";
  os << "sizing:\n"
     << "  delta_il: \"" << num(doc.delta_il.value) << (doc.delta_il.percent ? " %" : " A") << "\"\n"
     << "  delta_vc: \"" << num(doc.delta_vc.value) << (doc.delta_vc.percent ? " %" : " V") << "\"\n";
  return os.str();
}

LoadedConfig resolve(const ConfigDocument& doc) {
  LoadedConfig out;
  out.params = doc.charger;
  try {
    out.params.validate();
  } catch (const ValidationError& e) {
    throw ConfigError(e.what());
  }
  if (!(doc.v_d > 0.0)) throw ConfigError("charger.v_d must be > 0");

  if (doc.k_p.has_value() != doc.tau_i.has_value()) {
    throw ConfigError("control.k_p and control.tau_i must be given together (or both omitted)");
  }
  if (doc.k_p) {
    out.gains = PiGains{*doc.k_p, *doc.tau_i};
    try {
      out.gains->validate();
    } catch (const ValidationError& e) {
      throw ConfigError(e.what());
    }
  }
  out.modulator = ModulatorConfig::from(out.params, doc.d_min, doc.d_max);
  try {
    out.modulator.validate();
  } catch (const ValidationError& e) {
    throw ConfigError(e.what());
  }
  out.omega = doc.omega;

  Scenario& sc = out.scenario;
  sc.duration = doc.duration;
  sc.h = doc.h.value_or(out.params.t_s() / 200.0);
  sc.initial = {doc.i_l0, doc.v_c0};
  sc.v_d = doc.v_d;
  sc.ref_steps = doc.ref_steps;
  sc.vob_steps = doc.vob_steps;
  sc.mode = doc.mode;
  try {
    sc.validate(out.params);
  } catch (const ValidationError& e) {
    throw ConfigError(e.what());
  }

  const double i_ref = sc.ref_steps.front().value;
  const double v_c_ref = sc.vob_steps.front().value + out.params.r_b * i_ref;
  out.delta_i_l = doc.delta_il.percent ? doc.delta_il.value / 100.0 * std::abs(i_ref) : doc.delta_il.value;
  out.delta_v_c = doc.delta_vc.percent ? doc.delta_vc.value / 100.0 * std::abs(v_c_ref) : doc.delta_vc.value;
  if (!(out.delta_i_l > 0.0)) throw ConfigError("sizing.delta_il must resolve to a positive current");
  if (!(out.delta_v_c > 0.0)) throw ConfigError("sizing.delta_vc must resolve to a positive voltage");
  return out;
}

LoadedConfig load_config(const std::string& path) { return resolve(read_config_document(path)); }

ConfigDocument reference_config() { return ConfigDocument{}; }

}  // namespace charger
