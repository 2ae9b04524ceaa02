#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "malsim/errors.hpp"
#include "malsim/grid.hpp"
#include "malsim/params.hpp"
#include "malsim/solver.hpp"
#include "support/oracles.hpp"

using namespace malsim;
using testsupport::rel_err;

namespace {

SystemState random_state(std::mt19937& rng, const Grid& g, double scale) {
  std::uniform_real_distribution<double> u(0.0, scale);
  SystemState st;
  st.s.resize(g.n_a);
  st.i.resize(g.n_a);
  st.r.resize(g.n_a);
  for (int j = 0; j < g.n_a; ++j) {
    st.s[j] = u(rng);
    st.i[j] = u(rng);
    st.r[j] = u(rng);
  }
  st.s_v = u(rng) * 10.0;
  st.i_v = u(rng) * 10.0;
  st.t = 0.0;
  return st;
}

} // namespace

TEST_CASE("discrete parasite-free profile is the scheme's exact fixed point") {
  ModelParams p = baseline_params(5e6);
  Grid g = Grid::make(0.1, 0.1, 100.0, 1.0);
  CellAverages cells = cell_averages(p, g);
  SystemState pfe = discrete_pfe(p, g, cells);
  CHECK(pfe.i_v == 0.0);
  CHECK(rel_err(pfe.s_v, p.lambda_v / p.mu_v) < 1e-15);

  SystemState next = step(pfe, cells, p, g);
  for (int j = 0; j < g.n_a; ++j)
    CHECK(std::abs(next.s[j] - pfe.s[j]) <= 1e-13 * pfe.s[j]);
  CHECK(next.i_v == 0.0);
  CHECK(rel_err(next.s_v, pfe.s_v) < 1e-14);
}

TEST_CASE("first cell of the discrete profile solves the stationarity equation") {
  ConstParams cp{3.37e4, 5e6, 18.25, 0.25, 0.0, 1.0, 0.1, 1e-5, 1e-5};
  ModelParams p = to_age_structured(cp);
  Grid g = Grid::make(0.2, 0.2, 60.0, 1.0);
  CellAverages cells = cell_averages(p, g);
  SystemState pfe = discrete_pfe(p, g, cells);
  CHECK(rel_err(pfe.s[0], cp.lambda_h / (1.0 + g.da * cp.mu_h)) < 1e-15);
  CHECK(rel_err(pfe.s[1], pfe.s[0] / (1.0 + g.da * cp.mu_h)) < 1e-15);
}

TEST_CASE("discrete profile converges first-order to the continuum profile") {
  ModelParams p = baseline_params(5e6);
  double prev_gap = 0.0;
  std::vector<double> gaps;
  for (double d : {0.1, 0.05, 0.025}) {
    Grid g = Grid::make(d, d, 50.0, 1.0);
    CellAverages cells = cell_averages(p, g);
    SystemState disc = discrete_pfe(p, g, cells);
    SystemState cont = pfe_profile_state(p, g, p.lambda_v / p.mu_v, 0.0);
    double gap = 0.0;
    for (int j = 0; j < g.n_a; ++j)
      gap = std::max(gap, std::abs(disc.s[j] - cont.s[j]));
    gaps.push_back(gap / p.lambda_h);
    prev_gap = gap;
  }
  (void)prev_gap;
  CHECK(gaps[0] / gaps[1] > 1.7);
  CHECK(gaps[0] / gaps[1] < 2.3);
  CHECK(gaps[1] / gaps[2] > 1.7);
  CHECK(gaps[1] / gaps[2] < 2.3);
}

TEST_CASE("step preserves nonnegativity on random states") {
  ModelParams p = baseline_params(5e6);
  Grid g = Grid::make(0.25, 0.2, 50.0, 1.0); // dt < da also allowed
  CellAverages cells = cell_averages(p, g);
  std::mt19937 rng(20240811u);
  for (int trial = 0; trial < 20; ++trial) {
    SystemState st = random_state(rng, g, 1e4);
    SystemState next = step(st, cells, p, g);
    for (int j = 0; j < g.n_a; ++j) {
      CHECK(next.s[j] >= 0.0);
      CHECK(next.i[j] >= 0.0);
      CHECK(next.r[j] >= 0.0);
    }
    CHECK(next.s_v >= 0.0);
    CHECK(next.i_v >= 0.0);
  }
}

TEST_CASE("vector totals obey the exact per-step balance identity") {
  ModelParams p = baseline_params(5e6);
  Grid g = Grid::make(0.05, 0.05, 100.0, 1.0);
  CellAverages cells = cell_averages(p, g);
  std::mt19937 rng(77u);
  SystemState st = random_state(rng, g, 5e3);
  double worst = 0.0;
  for (int n = 0; n < 400; ++n) {
    SystemState next = step(st, cells, p, g);
    const double lhs = (next.s_v + next.i_v) * (1.0 + p.mu_v * g.dt);
    const double rhs = st.s_v + st.i_v + p.lambda_v * g.dt;
    worst = std::max(worst, std::abs(lhs - rhs) / rhs);
    st = next;
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("human total stays below the recruitment bound") {
  ModelParams p = baseline_params(1.5e6);
  Grid g = Grid::make(0.05, 0.05, 100.0, 30.0);
  SystemState init = pfe_profile_state(p, g, p.lambda_v / p.mu_v, 1e4);
  RunOptions opt;
  opt.sample_every = 10;
  Trajectory tr = run(p, g, init, opt);
  const double mu0 = validate(p, g.a_max).mu0;
  const double n0 = l1(init.s, g.da) + l1(init.i, g.da) + l1(init.r, g.da);
  const double bound = std::max(p.lambda_h / mu0, n0) * (1.0 + 1e-6);
  for (const auto& s : tr.samples)
    CHECK(s.s_l1 + s.i_l1 + s.r_l1 <= bound);
}

TEST_CASE("susceptible vectors never drop below the recruitment floor") {
  ModelParams p = baseline_params(5e6);
  Grid g = Grid::make(0.05, 0.05, 100.0, 40.0);
  SystemState init = pfe_profile_state(p, g, p.lambda_v / p.mu_v, 2e5);
  RunOptions opt;
  opt.sample_every = 5;
  Trajectory tr = run(p, g, init, opt);
  const ValidationReport v = validate(p, g.a_max);
  const double c_h =
      std::max(p.lambda_h / v.mu0,
               l1(init.s, g.da) + l1(init.i, g.da) + l1(init.r, g.da));
  const double floor = p.lambda_v / (p.mu_v + v.sup_beta_h * c_h);
  for (const auto& s : tr.samples)
    CHECK(s.s_v >= floor * (1.0 - 1e-12));
}

TEST_CASE("susceptible update is monotone: profiles below the fixed point stay below") {
  ModelParams p = baseline_params(5e6);
  Grid g = Grid::make(0.1, 0.1, 80.0, 1.0);
  CellAverages cells = cell_averages(p, g);
  SystemState pfe = discrete_pfe(p, g, cells);
  SystemState st = pfe;
  for (double& v : st.s) v *= 0.5;
  st.i_v = 0.0;
  for (int n = 0; n < 300; ++n) {
    st = step(st, cells, p, g);
    for (int j = 0; j < g.n_a; ++j) CHECK(st.s[j] <= pfe.s[j] * (1.0 + 1e-14));
  }
}

TEST_CASE("joint grid refinement shrinks the final-state error first-order") {
  ModelParams p = baseline_params(5e6);
  const double T = 10.0;
  // reference grid 8x finer than the finest tested level, so the reference
  // bias shifts the expected ratio by only ~7%; restriction onto coarser
  // cells is exact averaging thanks to cell-average semantics
  std::vector<double> ds = {0.1, 0.05, 0.025, 0.003125};
  std::vector<SystemState> finals;
  std::vector<Grid> grids;
  for (double d : ds) {
    Grid g = Grid::make(d, d, 100.0, T);
    SystemState init = pfe_profile_state(p, g, p.lambda_v / p.mu_v, 1e4);
    RunOptions opt;
    opt.sample_every = 1 << 20;
    finals.push_back(run(p, g, init, opt).final_state);
    grids.push_back(g);
  }
  auto restrict_to = [&](const std::vector<double>& fine, int factor) {
    std::vector<double> out(fine.size() / factor, 0.0);
    for (size_t j = 0; j < out.size(); ++j) {
      double acc = 0.0;
      for (int k = 0; k < factor; ++k) acc += fine[j * factor + k];
      out[j] = acc / factor;
    }
    return out;
  };
  std::vector<double> errs;
  const std::vector<int> factors = {32, 16, 8};
  for (size_t lvl = 0; lvl + 1 < ds.size(); ++lvl) {
    std::vector<double> ref_i = restrict_to(finals.back().i, factors[lvl]);
    double err = 0.0;
    for (size_t j = 0; j < ref_i.size(); ++j)
      err += std::abs(finals[lvl].i[j] - ref_i[j]) * grids[lvl].da;
    err += std::abs(finals[lvl].i_v - finals.back().i_v);
    errs.push_back(err);
  }
  // err(d) ~ C*(d - d_ref): expected ratios 2.07 and 2.14
  CHECK(errs[0] / errs[1] > 1.7);
  CHECK(errs[0] / errs[1] < 2.3);
  CHECK(errs[1] / errs[2] > 1.7);
  CHECK(errs[1] / errs[2] < 2.3);
}

TEST_CASE("run with zero infection stays exactly parasite-free") {
  ModelParams p = baseline_params(5e6);
  Grid g = Grid::make(0.1, 0.1, 100.0, 5.0);
  SystemState init = pfe_profile_state(p, g, p.lambda_v / p.mu_v, 0.0);
  Trajectory tr = run(p, g, init);
  for (const auto& s : tr.samples) {
    CHECK(s.i_l1 == 0.0);
    CHECK(s.i_v == 0.0);
    CHECK(s.lambda_v == 0.0);
  }
}

TEST_CASE("trajectory sampling includes endpoints, increases strictly, snapshots land") {
  ModelParams p = baseline_params(5e6);
  Grid g = Grid::make(0.1, 0.1, 50.0, 3.0);
  SystemState init = pfe_profile_state(p, g, p.lambda_v / p.mu_v, 1e3);
  RunOptions opt;
  opt.sample_every = 7;
  opt.snapshot_times = {1.0, 2.5};
  Trajectory tr = run(p, g, init, opt);
  CHECK(tr.samples.front().t == 0.0);
  CHECK(rel_err(tr.samples.back().t, 3.0) < 1e-12);
  for (size_t k = 1; k < tr.samples.size(); ++k)
    CHECK(tr.samples[k].t > tr.samples[k - 1].t);
  REQUIRE(tr.snapshots.size() == 2);
  CHECK(rel_err(tr.snapshots[0].t, 1.0) < 1e-9);
  CHECK(rel_err(tr.snapshots[1].t, 2.5) < 1e-9);
  CHECK(tr.tail_bound > 0.0);
}

TEST_CASE("non-finite cells raise a blowup error naming the cell") {
  ModelParams p = baseline_params(5e6);
  Grid g = Grid::make(0.1, 0.1, 50.0, 1.0);
  CellAverages cells = cell_averages(p, g);
  SystemState st = pfe_profile_state(p, g, p.lambda_v / p.mu_v, 1e3);
  // poison the last cell: nothing downstream reads it, so the failure index
  // is deterministic
  st.s[g.n_a - 1] = std::numeric_limits<double>::quiet_NaN();
  try {
    (void)step(st, cells, p, g);
    FAIL("expected BlowupError");
  } catch (const BlowupError& e) {
    CHECK(e.cell == g.n_a - 1);
  }
}

TEST_CASE("state size mismatches are rejected") {
  ModelParams p = baseline_params(5e6);
  Grid g = Grid::make(0.1, 0.1, 50.0, 1.0);
  CellAverages cells = cell_averages(p, g);
  SystemState st = pfe_profile_state(p, g, p.lambda_v / p.mu_v, 0.0);
  st.i.pop_back();
  CHECK_THROWS_AS((void)step(st, cells, p, g), std::invalid_argument);
}
