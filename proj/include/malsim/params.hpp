#pragma once

#include <string>
#include <vector>

#include "malsim/age_function.hpp"
#include "malsim/grid.hpp"

namespace malsim {

// Full parameter set of the age-structured host / homogeneous vector model.
// Units: recruitments in individuals/year, rates in 1/year; beta_h converts a
// host infection density into a per-mosquito infection rate, beta_v converts
// an infected-mosquito count into a per-host infection rate.
struct ModelParams {
  double lambda_h = 0.0; // host recruitment
  double lambda_v = 0.0; // vector recruitment
  double mu_v = 0.0;     // vector death rate
  AgeFunction mu_h;      // host death rate
  AgeFunction delta;     // disease-induced host death rate
  AgeFunction r1;        // recovery (infected -> immune)
  AgeFunction r2;        // immunity waning (immune -> susceptible)
  AgeFunction beta_h;    // host-to-vector transmission kernel
  AgeFunction beta_v;    // vector-to-host transmission kernel

  bool operator==(const ModelParams&) const = default;
};

// All-constant specialization used by the aggregated 5-compartment ODE and the
// closed-form equilibrium/stability results.
struct ConstParams {
  double lambda_h = 0.0, lambda_v = 0.0, mu_v = 0.0;
  double mu_h = 0.0, delta = 0.0, r1 = 0.0, r2 = 0.0;
  double beta_h = 0.0, beta_v = 0.0;
};

ModelParams to_age_structured(const ConstParams& p);
// Throws std::invalid_argument unless every age function is a ConstantFn.
ConstParams to_const(const ModelParams& p);

// Built-in reference malaria parameter set (Burkina-Faso-style demography,
// seasonality-free). Only the vector recruitment is free. Deterministic:
// equal lambda_v gives bitwise-identical descriptors.
ModelParams baseline_params(double lambda_v);

// Normalization constants behind the baseline transmission kernels.
struct BaselineDerived {
  double d_norm;        // host population normalization D
  double d_tail_bound;  // analytic bound on the truncated part of D
  double exposure_sup;  // max of the raw exposure shape 22.7*a*exp(-0.0934a)
  double exposure_argmax;
  double theta;         // biting rate (1/year)
  double beta_v_tilde;  // per-bite vector infection probability
};
BaselineDerived baseline_derived();

// Per-cell means (1/da) * integral over K_j, one row per rate function.
struct CellAverages {
  std::vector<double> mu_h, delta, r1, r2, beta_h, beta_v;
  double da = 0.0;
};

// 5-point Gauss-Legendre mean on each cell. Throws std::invalid_argument on a
// non-finite evaluation.
std::vector<double> cell_average(const AgeFunction& f, const Grid& grid);
CellAverages cell_averages(const ModelParams& p, const Grid& grid);

// Report-only checks of the standing assumptions (positivity of the scalars,
// mu0 = inf mu_h > 0, boundedness, and the transmission-cycle ("mixing")
// integral being positive). mu_v >= mu0 is advisory only.
struct ValidationReport {
  double mu0 = 0.0;
  double sup_mu_h = 0.0, sup_delta = 0.0, sup_r1 = 0.0, sup_r2 = 0.0;
  double sup_beta_h = 0.0, sup_beta_v = 0.0;
  double mixing_integral = 0.0;
  bool positivity_ok = false;
  bool mu0_positive = false;
  bool bounded_ok = false;
  bool nonnegative_ok = false;
  bool mixing_ok = false;
  bool mosquito_rate_dominates = false; // mu_v >= mu0 (warning when false)
  std::vector<std::string> messages;
  bool ok() const {
    return positivity_ok && mu0_positive && bounded_ok && nonnegative_ok &&
           mixing_ok;
  }
};
ValidationReport validate(const ModelParams& p, double a_max);

} // namespace malsim
