#pragma once

#include <vector>

#include "malsim/params.hpp"

namespace malsim {

// Constant-parameter 5-compartment reduction of the age-structured system.
struct OdeState {
  double s_h = 0.0, i_h = 0.0, r_h = 0.0;
  double s_v = 0.0, i_v = 0.0;
  double t = 0.0;
};

struct OdeDerivative {
  double s_h = 0.0, i_h = 0.0, r_h = 0.0;
  double s_v = 0.0, i_v = 0.0;
};

// Mass-action right-hand side. Transfer terms (recovery, waning, infection)
// are computed once and reused, so compartment sums cancel them exactly:
// d(s_h+i_h+r_h) == lambda_h - mu_h*(s_h+i_h+r_h) - delta*i_h to the last bit.
OdeDerivative ode_rhs(const OdeState& st, const ConstParams& cp);

enum class OdeMethod {
  // Replicates the finite-volume update order on the 5 scalars (vector block
  // first with the old host pressure, then hosts, each implicit in its own
  // losses). Shares the discretization-error structure of the age solver and
  // its exact vector-balance identity; positivity-preserving for any dt.
  matched_semi_implicit,
  // Classical 4th-order Runge-Kutta, used as the accuracy baseline.
  rk4_reference,
};

struct OdeSample {
  double t = 0.0;
  double s_h = 0.0, i_h = 0.0, r_h = 0.0;
  double s_v = 0.0, i_v = 0.0;
};

struct OdeTrajectory {
  std::vector<OdeSample> samples;
  OdeState final_state;
};

// Integrate from init to init.t + t_end, sampling every `sample_every` steps
// plus the first and last states. Throws BlowupError on non-finite values.
OdeTrajectory ode_run(const ConstParams& cp, const OdeState& init, double dt,
                      double t_end, OdeMethod method, int sample_every = 1);

} // namespace malsim
