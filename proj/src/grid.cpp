#include "malsim/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace malsim {

Grid Grid::make(double da, double dt, double a_max, double t_end) {
  if (!(da > 0.0) || !(dt > 0.0))
    throw std::invalid_argument("grid: da and dt must be > 0");
  if (dt > da * (1.0 + 1e-12))
    throw std::invalid_argument(
        "grid: dt must be <= da (upwind coefficient 1 - dt/da would be "
        "negative)");
  if (a_max < 10.0 * da)
    throw std::invalid_argument("grid: a_max must be >= 10*da");
  if (t_end < dt) throw std::invalid_argument("grid: t_end must be >= dt");

  Grid g;
  g.da = da;
  g.dt = dt;
  g.n_a = static_cast<int>(std::ceil(a_max / da - 1e-9));
  g.n_t = static_cast<int>(std::ceil(t_end / dt - 1e-9));
  g.a_max = g.n_a * da;
  g.t_end = g.n_t * dt;
  return g;
}

} // namespace malsim
