// Constant-parameter compartment model: right-hand side identities, the
// structure-matching integrator, the Runge-Kutta baseline, and their
// convergence orders.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "malsim/analysis.hpp"
#include "malsim/errors.hpp"
#include "malsim/grid.hpp"
#include "malsim/ode_model.hpp"
#include "malsim/params.hpp"
#include "malsim/solver.hpp"
#include "support/oracles.hpp"

using namespace malsim;
using testsupport::rel_err;

namespace {

// Fixed admissible parameter set with the mosquito-to-human rate chosen to
// hit a requested reproduction number exactly (closed form).
ConstParams make_cp(double r0_target, double r2) {
  ConstParams cp{1e4, 5e6, 12.0, 0.4, 0.05, 2.0, r2, 3e-5, 0.0};
  const double q = cp.mu_h + cp.delta + cp.r1;
  cp.beta_v = r0_target * r0_target * q * cp.mu_v * cp.mu_v * cp.mu_h /
              (cp.beta_h * cp.lambda_v * cp.lambda_h);
  return cp;
}

OdeState seeded_init(const ConstParams& cp, double i_v0) {
  OdeState st;
  st.s_h = cp.lambda_h / cp.mu_h;
  st.s_v = cp.lambda_v / cp.mu_v - i_v0;
  st.i_v = i_v0;
  return st;
}

double final_gap(const OdeState& a, const OdeState& b) {
  double g = 0.0;
  g += std::abs(a.s_h - b.s_h) / std::max(1.0, std::abs(b.s_h));
  g += std::abs(a.i_h - b.i_h) / std::max(1.0, std::abs(b.i_h));
  g += std::abs(a.r_h - b.r_h) / std::max(1.0, std::abs(b.r_h));
  g += std::abs(a.s_v - b.s_v) / std::max(1.0, std::abs(b.s_v));
  g += std::abs(a.i_v - b.i_v) / std::max(1.0, std::abs(b.i_v));
  return g;
}

} // namespace

TEST_CASE("right-hand side conserves hosts and vectors up to the stated sinks") {
  std::mt19937 rng(321u);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 25; ++trial) {
    const ConstParams cp = testsupport::random_const_params(rng, 0.5, 3.0);
    OdeState st;
    st.s_h = 1e5 * u(rng);
    st.i_h = 1e5 * u(rng);
    st.r_h = 1e5 * u(rng);
    st.s_v = 1e6 * u(rng);
    st.i_v = 1e6 * u(rng);
    const OdeDerivative d = ode_rhs(st, cp);

    const double n_h = st.s_h + st.i_h + st.r_h;
    const double host_sum = d.s_h + d.i_h + d.r_h;
    const double host_expect = cp.lambda_h - cp.mu_h * n_h - cp.delta * st.i_h;
    const double host_scale = cp.lambda_h + cp.mu_h * n_h +
                              cp.delta * st.i_h +
                              cp.beta_v * st.i_v * st.s_h +
                              cp.r1 * st.i_h + cp.r2 * st.r_h + 1.0;
    CHECK(std::abs(host_sum - host_expect) <= 1e-13 * host_scale);

    const double vec_sum = d.s_v + d.i_v;
    const double vec_expect = cp.lambda_v - cp.mu_v * (st.s_v + st.i_v);
    const double vec_scale = cp.lambda_v + cp.mu_v * (st.s_v + st.i_v) +
                             cp.beta_h * st.s_v * st.i_h + 1.0;
    CHECK(std::abs(vec_sum - vec_expect) <= 1e-13 * vec_scale);
  }
}

TEST_CASE("right-hand side vanishes at the infection-free state") {
  std::mt19937 rng(654u);
  for (int trial = 0; trial < 10; ++trial) {
    const ConstParams cp = testsupport::random_const_params(rng, 0.5, 3.0);
    OdeState st;
    st.s_h = cp.lambda_h / cp.mu_h;
    st.s_v = cp.lambda_v / cp.mu_v;
    const OdeDerivative d = ode_rhs(st, cp);
    const double scale = cp.lambda_h + cp.lambda_v;
    CHECK(std::abs(d.s_h) <= 1e-12 * scale);
    CHECK(std::abs(d.i_h) == 0.0);
    CHECK(std::abs(d.r_h) == 0.0);
    CHECK(std::abs(d.s_v) <= 1e-12 * scale);
    CHECK(std::abs(d.i_v) == 0.0);
  }
}

TEST_CASE("right-hand side vanishes at the computed endemic state") {
  std::mt19937 rng(987u);
  for (int trial = 0; trial < 10; ++trial) {
    const ConstParams cp = testsupport::random_const_params(rng, 1.1, 3.0);
    const auto [eq, st_rep] = endemic_ode(cp);
    REQUIRE(eq.exists);
    OdeState st;
    st.s_h = eq.s_h;
    st.i_h = eq.i_h;
    st.r_h = eq.r_h;
    st.s_v = eq.s_v;
    st.i_v = eq.i_v;
    const OdeDerivative d = ode_rhs(st, cp);
    const double host_scale = cp.lambda_h + cp.mu_h * (st.s_h + st.i_h + st.r_h);
    const double vec_scale = cp.lambda_v + cp.mu_v * (st.s_v + st.i_v);
    CHECK(std::abs(d.s_h) <= 1e-9 * host_scale);
    CHECK(std::abs(d.i_h) <= 1e-9 * host_scale);
    CHECK(std::abs(d.r_h) <= 1e-9 * host_scale);
    CHECK(std::abs(d.s_v) <= 1e-9 * vec_scale);
    CHECK(std::abs(d.i_v) <= 1e-9 * vec_scale);
  }
}

TEST_CASE("structure-matching integrator satisfies the exact vector balance") {
  const ConstParams cp = make_cp(1.8, 0.5);
  OdeState init = seeded_init(cp, 1e4);
  init.i_h = 500.0; // start off-equilibrium on the host side too
  const double dt = 0.2;
  const OdeTrajectory tr =
      ode_run(cp, init, dt, 10.0, OdeMethod::matched_semi_implicit, 1);
  REQUIRE(tr.samples.size() >= 2);
  for (std::size_t k = 1; k < tr.samples.size(); ++k) {
    const auto& a = tr.samples[k - 1];
    const auto& b = tr.samples[k];
    const double lhs = (b.s_v + b.i_v) * (1.0 + cp.mu_v * dt);
    const double rhs = (a.s_v + a.i_v) + cp.lambda_v * dt;
    CHECK(std::abs(lhs - rhs) <= 1e-12 * (std::abs(lhs) + std::abs(rhs)));
  }
}

TEST_CASE("structure-matching integrator stays nonnegative at large steps") {
  const ConstParams cp = make_cp(2.5, 0.5);
  OdeState init = seeded_init(cp, 2e5);
  init.i_h = 4e4;
  const OdeTrajectory tr =
      ode_run(cp, init, 10.0, 1000.0, OdeMethod::matched_semi_implicit, 1);
  const double nv_cap = std::max(cp.lambda_v / cp.mu_v, init.s_v + init.i_v);
  for (const auto& s : tr.samples) {
    CHECK(s.s_h >= 0.0);
    CHECK(s.i_h >= 0.0);
    CHECK(s.r_h >= 0.0);
    CHECK(s.s_v >= 0.0);
    CHECK(s.i_v >= 0.0);
    CHECK(s.s_v + s.i_v <= nv_cap * (1.0 + 1e-9));
  }
}

TEST_CASE("structure-matching integrator telescopes the age-structured aggregates") {
  // With constant parameters the cell-summed finite-volume update collapses
  // onto the 5-compartment recurrence, up to the age-boundary outflow, which
  // is below machine precision when mortality makes a_max unreachable.
  const ConstParams cp = make_cp(1.8, 0.5);
  const ModelParams p = to_age_structured(cp);
  const Grid g = Grid::make(0.05, 0.05, 100.0, 5.0);
  const SystemState init =
      pfe_profile_state(p, g, cp.lambda_v / cp.mu_v, 1e3);
  const Trajectory fv = run(p, g, init);

  OdeState oi;
  oi.s_h = l1(init.s, g.da);
  oi.i_h = l1(init.i, g.da);
  oi.r_h = l1(init.r, g.da);
  oi.s_v = init.s_v;
  oi.i_v = init.i_v;
  const OdeTrajectory ode =
      ode_run(cp, oi, g.dt, 5.0, OdeMethod::matched_semi_implicit, 1);

  REQUIRE(ode.samples.size() == fv.samples.size());
  double worst = 0.0;
  for (std::size_t k = 0; k < ode.samples.size(); ++k) {
    const auto& a = fv.samples[k];
    const auto& b = ode.samples[k];
    const double scale =
        std::max({1.0, b.s_h, b.i_h, b.r_h, b.s_v, b.i_v});
    worst = std::max(worst, std::abs(a.s_l1 - b.s_h) / scale);
    worst = std::max(worst, std::abs(a.i_l1 - b.i_h) / scale);
    worst = std::max(worst, std::abs(a.r_l1 - b.r_h) / scale);
    worst = std::max(worst, std::abs(a.s_v - b.s_v) / scale);
    worst = std::max(worst, std::abs(a.i_v - b.i_v) / scale);
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("integrator convergence orders: first for matched, fourth for the baseline") {
  const ConstParams cp = make_cp(1.8, 0.5);
  const OdeState init = seeded_init(cp, 1e4);
  const double t_end = 5.0;
  const OdeState ref =
      ode_run(cp, init, 0.003125, t_end, OdeMethod::rk4_reference, 1 << 20)
          .final_state;

  // Each method gets steps inside its own asymptotic range: the mosquito
  // turnover rate (12/yr) dominates stiffness, so dt*mu_v stays below ~0.6.
  const std::vector<double> dts_matched = {0.0125, 0.00625, 0.003125};
  const std::vector<double> dts_rk4 = {0.04, 0.02, 0.01};
  std::vector<double> e_matched, e_rk4;
  for (double dt : dts_matched)
    e_matched.push_back(final_gap(
        ode_run(cp, init, dt, t_end, OdeMethod::matched_semi_implicit, 1 << 20)
            .final_state,
        ref));
  for (double dt : dts_rk4)
    e_rk4.push_back(final_gap(
        ode_run(cp, init, dt, t_end, OdeMethod::rk4_reference, 1 << 20)
            .final_state,
        ref));
  for (std::size_t k = 1; k < e_matched.size(); ++k) {
    const double ratio_matched = e_matched[k - 1] / e_matched[k];
    CHECK(ratio_matched > 1.7);
    CHECK(ratio_matched < 2.3);
  }
  for (std::size_t k = 1; k < e_rk4.size(); ++k) {
    const double ratio_rk4 = e_rk4[k - 1] / e_rk4[k];
    CHECK(ratio_rk4 > 10.0);
    CHECK(ratio_rk4 < 22.0);
  }
}

TEST_CASE("long runs converge to the computed endemic state above threshold") {
  const ConstParams cp = make_cp(1.8, 0.5);
  const auto [eq, st] = endemic_ode(cp);
  REQUIRE(eq.exists);
  const OdeState fin =
      ode_run(cp, seeded_init(cp, 1e3), 0.05, 200.0, OdeMethod::rk4_reference,
              1 << 20)
          .final_state;
  CHECK(rel_err(fin.s_h, eq.s_h) < 1e-6);
  CHECK(rel_err(fin.i_h, eq.i_h) < 1e-6);
  CHECK(rel_err(fin.r_h, eq.r_h) < 1e-6);
  CHECK(rel_err(fin.s_v, eq.s_v) < 1e-6);
  CHECK(rel_err(fin.i_v, eq.i_v) < 1e-6);
}

TEST_CASE("infection dies out below threshold") {
  const ConstParams cp = make_cp(0.6, 0.0);
  const OdeTrajectory tr = ode_run(cp, seeded_init(cp, 1e3), 0.05, 100.0,
                                   OdeMethod::rk4_reference, 20);
  const auto& fin = tr.final_state;
  CHECK(fin.i_v < 1e-6 * 1e3);
  CHECK(fin.i_h < 1e-3);
  // Monotone decay of the infected pools once the initial transient passed.
  double prev_iv = -1.0, prev_ih = -1.0;
  for (const auto& s : tr.samples) {
    if (s.t < 5.0) continue;
    if (prev_iv >= 0.0) {
      CHECK(s.i_v <= prev_iv * (1.0 + 1e-12));
      CHECK(s.i_h <= prev_ih * (1.0 + 1e-12));
    }
    prev_iv = s.i_v;
    prev_ih = s.i_h;
  }
}

TEST_CASE("sampling covers both endpoints and reports the final state") {
  const ConstParams cp = make_cp(1.5, 0.5);
  const OdeState init = seeded_init(cp, 1e4);
  const OdeTrajectory tr =
      ode_run(cp, init, 0.125, 10.0, OdeMethod::matched_semi_implicit, 7);
  REQUIRE(!tr.samples.empty());
  CHECK(tr.samples.front().t == init.t);
  CHECK(tr.samples.back().t == doctest::Approx(init.t + 10.0).epsilon(1e-12));
  for (std::size_t k = 1; k < tr.samples.size(); ++k)
    CHECK(tr.samples[k].t > tr.samples[k - 1].t);
  CHECK(tr.samples.back().i_v == tr.final_state.i_v);
  CHECK(tr.samples.back().s_h == tr.final_state.s_h);
}

TEST_CASE("explicit integrator reports blowup instead of returning garbage") {
  const ConstParams cp = make_cp(1.8, 0.5);
  CHECK_THROWS_AS((void)ode_run(cp, seeded_init(cp, 1e4), 50.0, 1000.0,
                                OdeMethod::rk4_reference, 1),
                  BlowupError);
}
