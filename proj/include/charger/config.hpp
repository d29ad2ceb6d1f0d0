#pragma once

// Configuration documents (YAML). Sections and keys:
//
//   charger:  v_d r_ds_on r_l r_c r_b l c f_s [v_m]        (SI units)
//   control:  [k_p tau_i] d_min d_max omega_convention     ("2pi_fs" | "fs")
//   scenario: duration h i_l0 v_c0 ref_steps vob_steps mode
//   sizing:   delta_il ("<x> A" | "<x> %"), delta_vc ("<x> V" | "<x> %")
//
// Only `charger` is required; the other sections fall back to the reference
// transient and a 5 % ripple budget. Unknown keys are rejected.

#include <optional>
#include <string>

#include "charger/control.hpp"
#include "charger/errors.hpp"
#include "charger/model.hpp"
#include "charger/sim.hpp"

namespace charger {

/// Thrown for malformed or invalid configuration; carries the key path and,
/// when known, the source line.
class ConfigError : public ValidationError {
public:
  using ValidationError::ValidationError;
};

struct RippleSpec {
  double value = 5.0;
  bool percent = true;
  bool operator==(const RippleSpec&) const = default;
};

struct ConfigDocument {
  ChargerParams charger;
  double v_d = 800.0;
  std::optional<double> k_p;
  std::optional<double> tau_i;
  double d_min = 0.0;
  double d_max = 1.0;
  OmegaConvention omega = OmegaConvention::two_pi_fs;
  /// Absent h means T_s / 200.
  std::optional<double> h;
  double duration = 0.12;
  double i_l0 = 0.0;
  double v_c0 = 400.0;
  Schedule ref_steps{{0.0, 30.0}, {0.06, 40.0}};
  Schedule vob_steps{{0.0, 450.0}, {0.09, 350.0}};
  SimMode mode = SimMode::switched;
  RippleSpec delta_il;
  RippleSpec delta_vc;

  bool operator==(const ConfigDocument&) const = default;
};

/// Validated domain objects.
struct LoadedConfig {
  ChargerParams params;
  std::optional<PiGains> gains;  // empty: design automatically
  ModulatorConfig modulator;
  OmegaConvention omega = OmegaConvention::two_pi_fs;
  Scenario scenario;
  double delta_i_l = 0.0;  // A
  double delta_v_c = 0.0;  // V
};

ConfigDocument parse_config(const std::string& text, const std::string& source = "<config>");
ConfigDocument read_config_document(const std::string& path);
std::string write_config(const ConfigDocument& doc);

/// Validates and converts. Percent ripple bounds are resolved against the
/// operating point of the first reference: I_L = I_B*, V_C = V_OB + r_B I_B*.
LoadedConfig resolve(const ConfigDocument& doc);

LoadedConfig load_config(const std::string& path);

/// Document reproducing the reference charger and transient.
ConfigDocument reference_config();

}  // namespace charger
