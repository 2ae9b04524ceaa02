#pragma once

namespace malsim {

// Uniform age/time mesh. Cells K_j = [(j-1)da, j*da) for j = 1..n_a with
// centers (j - 1/2)*da; arrays are 0-based, so cell j (0-based) has center
// (j + 1/2)*da. Construction rounds a_max and t_end up to whole cells/steps.
struct Grid {
  double da = 0.0;
  double dt = 0.0;
  double a_max = 0.0; // effective: n_a * da
  double t_end = 0.0; // effective: n_t * dt
  int n_a = 0;
  int n_t = 0;

  // Throws std::invalid_argument on: nonpositive steps, a_max < 10*da,
  // t_end < dt, or dt > da (the upwind coefficient 1 - dt/da must be >= 0).
  static Grid make(double da, double dt, double a_max, double t_end);

  double cell_center(int j) const { return (j + 0.5) * da; }
  double cell_left(int j) const { return j * da; }
};

} // namespace malsim
