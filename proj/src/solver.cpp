#include "malsim/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "malsim/errors.hpp"
#include "malsim/quadrature.hpp"

namespace malsim {

double l1(const std::vector<double>& v, double da) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return da * acc;
}

double infection_pressure(const SystemState& st, const CellAverages& cells) {
  double acc = 0.0;
  for (std::size_t j = 0; j < st.i.size(); ++j) acc += cells.beta_h[j] * st.i[j];
  return cells.da * acc;
}

SystemState discrete_pfe(const ModelParams& p, const Grid& grid,
                         const CellAverages& cells) {
  SystemState st;
  st.s.assign(grid.n_a, 0.0);
  st.i.assign(grid.n_a, 0.0);
  st.r.assign(grid.n_a, 0.0);
  double prev = p.lambda_h; // ghost cell
  for (int j = 0; j < grid.n_a; ++j) {
    st.s[j] = prev / (1.0 + grid.da * cells.mu_h[j]);
    prev = st.s[j];
  }
  st.s_v = p.lambda_v / p.mu_v;
  st.i_v = 0.0;
  st.t = 0.0;
  return st;
}

namespace {

// One in-place update. Descending j so the j-1 upwind neighbour is still the
// old value when cell j is written.
void step_inplace(SystemState& st, const CellAverages& c, const ModelParams& p,
                  const Grid& g) {
  const int n = g.n_a;
  const double dt = g.dt;
  const double up = dt / g.da;
  const double keep = 1.0 - up;

  double pressure = 0.0; // uses i^n, before the host update
  for (int j = 0; j < n; ++j) pressure += c.beta_h[j] * st.i[j];
  pressure *= g.da;

  const double sv_new =
      (st.s_v + p.lambda_v * dt) / (1.0 + dt * pressure + p.mu_v * dt);
  const double iv_new =
      (st.i_v + dt * pressure * sv_new) / (1.0 + dt * p.mu_v);
  if (!std::isfinite(sv_new) || !std::isfinite(iv_new))
    throw BlowupError("vector update produced a non-finite value", -1, st.t);

  for (int j = n - 1; j >= 0; --j) {
    const double left = (j > 0) ? st.s[j - 1] : p.lambda_h;
    const double v = (st.s[j] * keep + up * left + c.r2[j] * st.r[j] * dt) /
                     (1.0 + dt * c.beta_v[j] * iv_new + dt * c.mu_h[j]);
    if (!std::isfinite(v))
      throw BlowupError("susceptible update produced a non-finite value", j,
                        st.t);
    st.s[j] = v;
  }
  for (int j = n - 1; j >= 0; --j) {
    const double left = (j > 0) ? st.i[j - 1] : 0.0;
    const double v =
        (st.i[j] * keep + up * left + dt * c.beta_v[j] * iv_new * st.s[j]) /
        (1.0 + dt * (c.mu_h[j] + c.delta[j] + c.r1[j]));
    if (!std::isfinite(v))
      throw BlowupError("infected update produced a non-finite value", j, st.t);
    st.i[j] = v;
  }
  for (int j = n - 1; j >= 0; --j) {
    const double left = (j > 0) ? st.r[j - 1] : 0.0;
    const double v = (st.r[j] * keep + up * left + c.r1[j] * st.i[j] * dt) /
                     (1.0 + dt * (c.r2[j] + c.mu_h[j]));
    if (!std::isfinite(v))
      throw BlowupError("immune update produced a non-finite value", j, st.t);
    st.r[j] = v;
  }

  st.s_v = sv_new;
  st.i_v = iv_new;
  st.t += dt;
}

} // namespace

SystemState step(const SystemState& state, const CellAverages& cells,
                 const ModelParams& p, const Grid& grid) {
  if (static_cast<int>(state.s.size()) != grid.n_a ||
      static_cast<int>(state.i.size()) != grid.n_a ||
      static_cast<int>(state.r.size()) != grid.n_a)
    throw std::invalid_argument("step: state arrays do not match grid");
  SystemState out = state;
  step_inplace(out, cells, p, grid);
  return out;
}

Trajectory run(const ModelParams& p, const Grid& grid, const SystemState& init,
               const RunOptions& opt) {
  const CellAverages cells = cell_averages(p, grid);
  const int stride = std::max(1, opt.sample_every);

  // Age-truncation tail mass bound, reported as run metadata.
  const double mu0 = inf_on(p.mu_h, 0.0, grid.a_max, 8192);
  Trajectory traj;
  traj.tail_bound =
      mu0 > 0.0 ? p.lambda_h * std::exp(-mu0 * grid.a_max) / mu0
                : std::numeric_limits<double>::infinity();

  std::vector<int> snap_steps;
  for (double ts : opt.snapshot_times) {
    int k = static_cast<int>(std::lround((ts - init.t) / grid.dt));
    snap_steps.push_back(std::clamp(k, 0, grid.n_t));
  }
  std::sort(snap_steps.begin(), snap_steps.end());
  snap_steps.erase(std::unique(snap_steps.begin(), snap_steps.end()),
                   snap_steps.end());

  SystemState st = init;
  auto sample = [&] {
    TrajectorySample smp;
    smp.t = st.t;
    smp.s_l1 = l1(st.s, grid.da);
    smp.i_l1 = l1(st.i, grid.da);
    smp.r_l1 = l1(st.r, grid.da);
    smp.s_v = st.s_v;
    smp.i_v = st.i_v;
    smp.lambda_v = infection_pressure(st, cells);
    smp.lyapunov = opt.sample_functional
                       ? opt.sample_functional(st)
                       : std::numeric_limits<double>::quiet_NaN();
    traj.samples.push_back(smp);
  };
  // Snapshots are captured at their own steps, independent of the stride.
  auto snapshot = [&](int n) {
    if (std::binary_search(snap_steps.begin(), snap_steps.end(), n))
      traj.snapshots.push_back(st);
  };

  sample();
  snapshot(0);
  for (int n = 1; n <= grid.n_t; ++n) {
    step_inplace(st, cells, p, grid);
    if (n % stride == 0 || n == grid.n_t) sample();
    snapshot(n);
  }
  traj.final_state = std::move(st);
  return traj;
}

SystemState pfe_profile_state(const ModelParams& p, const Grid& grid,
                              double s_v0, double i_v0) {
  auto mu_f = [&p](double a) { return eval(p.mu_h, a); };
  // Fine prefix table (4 subintervals per cell) so the per-cell Gauss nodes
  // see an accurate cumulative integral.
  const int fine = 4 * grid.n_a;
  quad::CumulativeIntegral m(mu_f, grid.a_max / fine, fine);
  SystemState st;
  st.s.assign(grid.n_a, 0.0);
  st.i.assign(grid.n_a, 0.0);
  st.r.assign(grid.n_a, 0.0);
  auto surv = [&](double a) { return std::exp(-m.at(a)); };
  for (int j = 0; j < grid.n_a; ++j)
    st.s[j] = p.lambda_h *
              quad::gauss5(surv, grid.cell_left(j), grid.cell_left(j + 1)) /
              grid.da;
  st.s_v = s_v0;
  st.i_v = i_v0;
  st.t = 0.0;
  return st;
}

} // namespace malsim
