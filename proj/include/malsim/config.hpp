#pragma once

#include <optional>
#include <string>
#include <vector>

#include "malsim/params.hpp"

namespace malsim {

enum class RunMode { simulate, r0, equilibria, stability, sweep, compare_ode };

struct GridBlock {
  double da = 0.05;
  double dt = 0.05;
  double a_max = 100.0;
  double t_end = 100.0;
  bool operator==(const GridBlock&) const = default;
};

struct InitBlock {
  bool pfe_profile = true; // humans start on the infection-free age profile
  std::vector<double> i_v0;
  double s_v0 = -1.0; // negative: default to lambda_v / mu_v
  // Optional tabulated human profiles overriding pfe_profile.
  std::optional<AgeFunction> s_profile, i_profile, r_profile;
  bool operator==(const InitBlock&) const = default;
};

struct OutputBlock {
  std::string directory = "out";
  int sample_stride = 20;
  std::vector<double> snapshot_times;
  bool log_scale = false;
  bool svg = true;
  bool operator==(const OutputBlock&) const = default;
};

struct RunConfig {
  RunMode mode = RunMode::simulate;
  ModelParams params;
  // Serialization provenance: set when [params] used `preset = baseline`.
  bool baseline_preset = false;
  double preset_lambda_v = 0.0;
  // Age-function keys explicitly given on top of the preset (serialization
  // re-emits exactly these).
  std::vector<std::string> param_overrides;
  std::vector<double> sweep_lambda_v; // sweep mode only
  GridBlock grid;
  InitBlock init;
  OutputBlock output;
  bool operator==(const RunConfig&) const = default;
};

// Sectioned key-value configuration text:
//
//   mode = simulate
//   [params]
//   preset = baseline
//   lambda_v = 5e6
//   [grid]
//   da = 0.05
//   dt = 0.05
//   a_max = 100
//   t_end = 200
//   [init]
//   pfe_profile = true
//   i_v0 = [1e3, 1e4]
//   [output]
//   directory = out/endemic
//
// Age functions use named families: constant(value=...),
// exp_sum(coef=[...], rate=[...]), logistic(sup=..., shape=..., rate=...),
// gamma_shape(scale=..., rate=...),
// gamma_power(scale=..., power=..., inner_scale=..., inner_rate=...),
// table(ages=[...], values=[...]). A bare number is shorthand for constant.
// Unknown sections/keys, duplicates, malformed values, and grid constraint
// violations raise ConfigError with 1-based line/column.
RunConfig parse_config(const std::string& text);

// Canonical mode word as written in config text (e.g. "compare-ode").
std::string mode_name(RunMode mode);

// Inverse of parse_config: parse(serialize(c)) == c. Used for the provenance
// copy written next to results and for round-trip tests.
std::string serialize_config(const RunConfig& config);

} // namespace malsim
