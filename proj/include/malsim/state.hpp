#pragma once

#include <vector>

namespace malsim {

// Cell-averaged host densities plus the two vector compartments.
struct SystemState {
  std::vector<double> s; // susceptible hosts per year of age, length n_a
  std::vector<double> i; // infected
  std::vector<double> r; // immune
  double s_v = 0.0;      // susceptible mosquitoes
  double i_v = 0.0;      // infected mosquitoes
  double t = 0.0;
};

struct TrajectorySample {
  double t = 0.0;
  double s_l1 = 0.0, i_l1 = 0.0, r_l1 = 0.0; // da * sum over cells
  double s_v = 0.0, i_v = 0.0;
  double lambda_v = 0.0;  // da * sum beta_h[j] * i[j]
  double lyapunov = 0.0;  // NaN when no evaluator was attached
};

struct Trajectory {
  std::vector<TrajectorySample> samples;       // strictly increasing times
  std::vector<SystemState> snapshots;          // at requested times
  SystemState final_state;
  double tail_bound = 0.0; // lambda_h * e^{-mu0*a_max}/mu0, age truncation
};

} // namespace malsim
