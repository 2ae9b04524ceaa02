#pragma once

#include <complex>
#include <string>
#include <utility>
#include <vector>

#include "malsim/grid.hpp"
#include "malsim/params.hpp"
#include "malsim/state.hpp"

namespace malsim {

// Quadrature controls shared by the report-producing operations. `h` is the
// lattice step (years) of the cumulative/backward recurrences; Richardson
// error estimates compare h against h/2.
struct QuadSettings {
  double h = 0.05;
};

struct R0Report {
  double r0 = 0.0;
  double r0_squared = 0.0;
  double quadrature_error_estimate = 0.0; // |R0(h) - R0(h/2)|
  bool accuracy_warning = false;          // estimate above 1e-6 * max(1, R0)
  double a_max = 0.0;
  double tail_bound = 0.0; // bound on the mass dropped by truncation
};

// Basic reproduction number: R0^2 = (S_v0/mu_v) * double integral of
// beta_h(xi+s) beta_v(xi) s_h0(xi) exp(-int_xi^{xi+s} (mu_h+delta+r1)).
// Evaluated via a backward recurrence for the inner survival integral on a
// lattice of step h over [0, 2*a_max] (all exponents kept <= 0 for
// overflow-safety) and a Simpson rule over the outer variable.
R0Report r0(const ModelParams& p, double a_max = 100.0,
            const QuadSettings& qs = {});

// Closed form for constant parameters:
// sqrt(beta_h * S_v0 * beta_v * S_h0 / ((mu_h+delta+r1) * mu_v)).
double r0_closed_form(const ConstParams& cp);

enum class EquilibriumKind { parasite_free, endemic_ode, endemic_pde_r2zero };

struct EquilibriumReport {
  EquilibriumKind kind = EquilibriumKind::parasite_free;
  bool exists = true; // false: endemic kind requested but R0 <= 1

  // Age profiles on `ages` (parasite_free and endemic_pde_r2zero kinds).
  std::vector<double> ages, s, i, r;
  // Host scalars (endemic_ode kind).
  double s_h = 0.0, i_h = 0.0, r_h = 0.0;
  // Vector scalars (all kinds).
  double s_v = 0.0, i_v = 0.0;

  // Root data (endemic_pde_r2zero): x = integral of beta_h * i.
  double root_x = 0.0, bracket_lo = 0.0, bracket_hi = 0.0;

  double residual = 0.0; // max-norm residual of the defining equations
  double r0_value = 0.0;
};

struct StabilityReport {
  // Cubic certificate coefficients (leading coefficient normalized to 1)
  // and the Routh column entries; populated only when routh_available.
  double a3 = 1.0, a2 = 0.0, a1 = 0.0, a0 = 0.0;
  double b1 = 0.0, c0 = 0.0;
  bool routh_available = false; // requires r2 == 0

  enum class Verdict { las, unstable, inconclusive };
  Verdict verdict = Verdict::inconclusive;

  // Dense eigensolve of the 5x5 Jacobian at the equilibrium: the deciding
  // certificate. A disagreement with the Routh sign conditions is flagged
  // and resolved in favor of the spectrum.
  double spectrum_max_real = 0.0;
  std::vector<std::complex<double>> eigenvalues;
  bool certificates_disagree = false;
  std::string note;
};

// Infection-free steady state: s(a) = lambda_h * exp(-int_0^a mu_h) on a
// lattice of step qs.h, S_v = lambda_v / mu_v.
EquilibriumReport pfe(const ModelParams& p, double a_max = 100.0,
                      const QuadSettings& qs = {});

// Constant-parameter endemic steady state in closed form; exists iff R0 > 1.
// The stability report carries the Routh certificate when r2 == 0 and the
// Jacobian spectrum always (when the equilibrium exists).
std::pair<EquilibriumReport, StabilityReport> endemic_ode(const ConstParams& cp);

// Age-structured endemic steady state for r2 == 0: solves f(x) = 1 for
// x = integral of beta_h * i by bisection on [0, sup beta_h * lambda_h / mu0]
// (f is decreasing with f(0) = R0^2), then reconstructs the profiles.
EquilibriumReport endemic_pde_r2zero(const ModelParams& p, double a_max = 100.0,
                                     const QuadSettings& qs = {});

// Weighted infection mass + vector divergence functional. psi solves
// psi(a) = int_a^inf beta_h(s) exp(-int_a^s (mu_h+delta+r1)) ds, truncated at
// grid.a_max and tabulated once per (params, grid) at the cell centers.
struct LyapunovL0 {
  std::vector<double> psi; // per cell center
  double s_v0 = 0.0;
  double da = 0.0;

  // da * sum psi_j i_j + g(S_v/S_v0) + I_v/S_v0, g(x) = x - ln x - 1.
  // Throws std::domain_error when state.s_v <= 0.
  double operator()(const SystemState& state) const;
};

LyapunovL0 make_lyapunov(const ModelParams& p, const Grid& grid);

// Characteristic function of the linearization at the infection-free state:
// g(lambda) = (S_v0/mu_v) * int beta_h(a) int_0^a beta_v(s) s_h0(s)
//             exp(-int_s^a (mu_h+delta+r1+lambda)) ds da.
// Strictly decreasing in lambda; the threshold g(0) <=> 1 matches R0^2 <=> 1.
// Requires lambda > -inf(mu_h) for integrability; throws std::domain_error.
double characteristic_g(double lambda, const ModelParams& p,
                        double a_max = 100.0, const QuadSettings& qs = {});

// Cubic sign certificate for the constant-parameter endemic state with
// r2 == 0 (throws std::invalid_argument otherwise), plus the Jacobian
// spectrum cross-check described on StabilityReport.
StabilityReport routh_hurwitz(const ConstParams& cp,
                              const EquilibriumReport& endemic);

} // namespace malsim
