#pragma once

#include <functional>
#include <vector>

#include "malsim/grid.hpp"
#include "malsim/params.hpp"
#include "malsim/state.hpp"

namespace malsim {

// Semi-implicit upwind finite-volume integrator for the age-structured
// host/vector system. The update order is load-bearing: S_v first (using the
// old host infection sum), then I_v (using the new S_v), then s, i, r (each
// cell update implicit in its own losses, sources taken at the stage the
// scheme prescribes). Summing the two vector updates gives the exact balance
// (S_v + I_v)^{n+1} (1 + mu_v dt) = (S_v + I_v)^n + lambda_v dt.

// Stationary profile of the susceptible update at zero infection:
// s_j = s_{j-1} / (1 + da * mu_h_j) with ghost value lambda_h. Exact fixed
// point of step() together with i = r = 0, I_v = 0, S_v = lambda_v / mu_v.
SystemState discrete_pfe(const ModelParams& p, const Grid& grid,
                         const CellAverages& cells);

// One time step. Throws BlowupError on NaN/overflow (carries cell index).
SystemState step(const SystemState& state, const CellAverages& cells,
                 const ModelParams& p, const Grid& grid);

struct RunOptions {
  int sample_every = 1;
  std::vector<double> snapshot_times; // each matched to the nearest step
  // Optional per-sample functional (e.g. the Lyapunov value from analysis);
  // samples get NaN when absent.
  std::function<double(const SystemState&)> sample_functional;
};

// Integrate n_t steps from init, sampling every `sample_every` steps plus
// always t=0 and t=t_end. init.t is taken as time zero.
Trajectory run(const ModelParams& p, const Grid& grid, const SystemState& init,
               const RunOptions& opt = {});

// Host L1 aggregates helper: da * sum(v).
double l1(const std::vector<double>& v, double da);
// Host infection pressure on mosquitoes: da * sum beta_h[j]*i[j].
double infection_pressure(const SystemState& st, const CellAverages& cells);

// Initial condition builders.
// Cell averages of the continuum profile lambda_h * exp(-int_0^a mu_h), the
// host part of the infection-free equilibrium, with vector compartments
// (s_v0, i_v0).
SystemState pfe_profile_state(const ModelParams& p, const Grid& grid,
                              double s_v0, double i_v0);

// Independent cross-check: evaluates the along-characteristic integral form
// of the same model on the lattice of cell centers (requires dt == da so
// characteristics pass through lattice points; throws std::invalid_argument
// otherwise). The age transport is integrated exactly along characteristics
// with per-interval Gauss rate integrals and trapezoidal source terms; the
// vector block uses integrating factors and the exact total-population decay;
// the coupling is resolved by plain fixed-point sweeps to 1e-8 (cap 200,
// OracleError on failure). Deliberately shares no code with step().
SystemState characteristics_oracle(const ModelParams& p, const Grid& grid,
                                   const SystemState& init, double t_eval);

} // namespace malsim
