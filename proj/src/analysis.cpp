#include "malsim/analysis.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "malsim/quadrature.hpp"

namespace malsim {

namespace {

using Fn = std::function<double(double)>;

// Uniform lattice over [0, a_max] with an even interval count (Simpson).
struct Lattice {
  double h;
  int n;
  double x(int k) const { return k * h; }
};

Lattice make_lattice(double a_max, double h_hint) {
  int n = static_cast<int>(std::ceil(a_max / h_hint - 1e-9));
  n = std::max(n, 2);
  if (n % 2) ++n;
  return {a_max / n, n};
}

// Tail-weighted survival table on increasing points x_0 < ... < x_N:
//   out[k] = integral over [x_k, x_N] of w(a) * exp(-int_{x_k}^{a} rate),
// built by a backward recurrence so every exponent is <= 0 (no overflow for
// strongly damped rates, where the naive exp(+int rate) form blows up).
std::vector<double> backward_tail(const Fn& w, const Fn& rate,
                                  const std::vector<double>& x) {
  const int n = static_cast<int>(x.size()) - 1;
  std::vector<double> out(n + 1, 0.0);
  for (int k = n - 1; k >= 0; --k) {
    const double lo = x[k], hi = x[k + 1];
    const double damp = std::exp(-quad::gauss5(rate, lo, hi));
    const double local = quad::gauss5(
        [&](double a) { return w(a) * std::exp(-quad::gauss5(rate, lo, a)); },
        lo, hi);
    out[k] = local + damp * out[k + 1];
  }
  return out;
}

std::vector<double> lattice_points(const Lattice& L, int n_intervals) {
  std::vector<double> x(n_intervals + 1);
  for (int k = 0; k <= n_intervals; ++k) x[k] = L.x(k);
  return x;
}

Fn make_eval(const AgeFunction& f) {
  return [&f](double a) { return eval(f, a); };
}

Fn loss_rate(const ModelParams& p) {
  return [&p](double a) {
    return eval(p.mu_h, a) + eval(p.delta, a) + eval(p.r1, a);
  };
}

// R0^2 at one lattice resolution. The inner integral over the infectious-age
// offset is folded into the tail table psi on [0, 2*a_max]; the outer
// integral over the age of acquisition uses Simpson on the same lattice.
double r0_squared_at(const ModelParams& p, double a_max, double h_hint) {
  const Lattice L = make_lattice(a_max, h_hint);
  const auto pts2 = lattice_points(L, 2 * L.n);
  const auto psi = backward_tail(make_eval(p.beta_h), loss_rate(p), pts2);
  quad::CumulativeIntegral m(make_eval(p.mu_h), L.h, L.n);
  std::vector<double> y(L.n + 1);
  for (int k = 0; k <= L.n; ++k)
    y[k] = eval(p.beta_v, L.x(k)) * p.lambda_h * std::exp(-m.edge(k)) * psi[k];
  const double s_v0 = p.lambda_v / p.mu_v;
  return (s_v0 / p.mu_v) * quad::simpson_table(y, L.h);
}

} // namespace

R0Report r0(const ModelParams& p, double a_max, const QuadSettings& qs) {
  R0Report rep;
  rep.a_max = a_max;
  const double coarse = r0_squared_at(p, a_max, qs.h);
  const double fine = r0_squared_at(p, a_max, qs.h / 2);
  rep.r0_squared = fine;
  rep.r0 = std::sqrt(std::max(0.0, fine));
  rep.quadrature_error_estimate =
      std::abs(std::sqrt(std::max(0.0, coarse)) - rep.r0);
  rep.accuracy_warning =
      rep.quadrature_error_estimate > 1e-6 * std::max(1.0, rep.r0);

  // Truncation accounting: the outer integral drops ages > a_max and the
  // tail table drops offsets landing beyond 2*a_max; both tails decay at
  // least like exp(-rate * a).
  const double mu0 = inf_on(p.mu_h, 0.0, a_max, 8192);
  double q0 = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= 8192; ++k) {
    const double a = 2.0 * a_max * k / 8192.0;
    q0 = std::min(q0, eval(p.mu_h, a) + eval(p.delta, a) + eval(p.r1, a));
  }
  const double bh = sup_on(p.beta_h, 0.0, 2 * a_max, 8192);
  const double bv = sup_on(p.beta_v, 0.0, a_max, 8192);
  const double s_v0 = p.lambda_v / p.mu_v;
  if (mu0 > 0.0 && q0 > 0.0) {
    const double psi_sup = bh / q0;
    // Susceptible density surviving to a_max under the true cumulative
    // mortality; beyond a_max it keeps decaying at least at rate mu0.
    quad::CumulativeIntegral m_full(make_eval(p.mu_h), a_max / 4096.0, 4096);
    const double s_h0_end = p.lambda_h * std::exp(-m_full.edge(4096));
    const double outer_tail = bv * s_h0_end / mu0 * psi_sup;
    const double inner_tail = bv * p.lambda_h / mu0 * psi_sup *
                              std::exp(-q0 * a_max);
    rep.tail_bound = (s_v0 / p.mu_v) * (outer_tail + inner_tail);
  } else {
    rep.tail_bound = std::numeric_limits<double>::infinity();
  }
  return rep;
}

double r0_closed_form(const ConstParams& cp) {
  const double q = cp.mu_h + cp.delta + cp.r1;
  const double s_h0 = cp.lambda_h / cp.mu_h;
  const double s_v0 = cp.lambda_v / cp.mu_v;
  return std::sqrt(cp.beta_h * s_v0 * cp.beta_v * s_h0 / (q * cp.mu_v));
}

EquilibriumReport pfe(const ModelParams& p, double a_max,
                      const QuadSettings& qs) {
  const Lattice L = make_lattice(a_max, qs.h);
  quad::CumulativeIntegral m(make_eval(p.mu_h), L.h, L.n);
  EquilibriumReport eq;
  eq.kind = EquilibriumKind::parasite_free;
  eq.ages.resize(L.n + 1);
  eq.s.resize(L.n + 1);
  eq.i.assign(L.n + 1, 0.0);
  eq.r.assign(L.n + 1, 0.0);
  for (int k = 0; k <= L.n; ++k) {
    eq.ages[k] = L.x(k);
    eq.s[k] = p.lambda_h * std::exp(-m.edge(k));
  }
  eq.s_v = p.lambda_v / p.mu_v;
  eq.i_v = 0.0;
  // Residual of the along-age propagator, with the interval integral redone
  // at a finer subdivision than the table used.
  double worst = std::abs(p.lambda_v - p.mu_v * eq.s_v) / p.lambda_v;
  for (int k = 0; k < L.n; ++k) {
    const double m_loc =
        quad::composite_gauss5(make_eval(p.mu_h), L.x(k), L.x(k + 1), 3);
    worst = std::max(
        worst, std::abs(eq.s[k + 1] - eq.s[k] * std::exp(-m_loc)) / p.lambda_h);
  }
  eq.residual = worst;
  return eq;
}

namespace {

// Residual of the five constant-parameter balance equations, each normalized
// by the sum of its term magnitudes.
double ode_equilibrium_residual(const ConstParams& cp,
                                const EquilibriumReport& eq) {
  const double q = cp.mu_h + cp.delta + cp.r1;
  const double inf_h = cp.beta_v * eq.i_v * eq.s_h;
  const double inf_v = cp.beta_h * eq.s_v * eq.i_h;
  struct Row {
    double value, scale;
  };
  const Row rows[5] = {
      {cp.lambda_h - inf_h - cp.mu_h * eq.s_h + cp.r2 * eq.r_h,
       cp.lambda_h + inf_h + cp.mu_h * eq.s_h + cp.r2 * eq.r_h},
      {inf_h - q * eq.i_h, inf_h + q * eq.i_h},
      {cp.r1 * eq.i_h - (cp.r2 + cp.mu_h) * eq.r_h,
       cp.r1 * eq.i_h + (cp.r2 + cp.mu_h) * eq.r_h},
      {cp.lambda_v - inf_v - cp.mu_v * eq.s_v,
       cp.lambda_v + inf_v + cp.mu_v * eq.s_v},
      {inf_v - cp.mu_v * eq.i_v, inf_v + cp.mu_v * eq.i_v},
  };
  double worst = 0.0;
  for (const Row& row : rows)
    worst = std::max(worst, std::abs(row.value) / std::max(1.0, row.scale));
  return worst;
}

StabilityReport stability_at(const ConstParams& cp,
                             const EquilibriumReport& eq) {
  StabilityReport st;
  const double q = cp.mu_h + cp.delta + cp.r1;

  Eigen::Matrix<double, 5, 5> jac = Eigen::Matrix<double, 5, 5>::Zero();
  // State order (S_h, I_h, R_h, S_v, I_v).
  jac(0, 0) = -(cp.beta_v * eq.i_v + cp.mu_h);
  jac(0, 2) = cp.r2;
  jac(0, 4) = -cp.beta_v * eq.s_h;
  jac(1, 0) = cp.beta_v * eq.i_v;
  jac(1, 1) = -q;
  jac(1, 4) = cp.beta_v * eq.s_h;
  jac(2, 1) = cp.r1;
  jac(2, 2) = -(cp.r2 + cp.mu_h);
  jac(3, 1) = -cp.beta_h * eq.s_v;
  jac(3, 3) = -(cp.beta_h * eq.i_h + cp.mu_v);
  jac(4, 1) = cp.beta_h * eq.s_v;
  jac(4, 3) = cp.beta_h * eq.i_h;
  jac(4, 4) = -cp.mu_v;

  Eigen::EigenSolver<Eigen::Matrix<double, 5, 5>> solver(jac);
  double max_real = -std::numeric_limits<double>::infinity();
  double max_mod = 0.0;
  st.eigenvalues.resize(5);
  for (int k = 0; k < 5; ++k) {
    const std::complex<double> ev = solver.eigenvalues()[k];
    st.eigenvalues[k] = ev;
    max_real = std::max(max_real, ev.real());
    max_mod = std::max(max_mod, std::abs(ev));
  }
  st.spectrum_max_real = max_real;

  const double eps = 1e-10 * std::max(1.0, max_mod);
  if (max_real < -eps)
    st.verdict = StabilityReport::Verdict::las;
  else if (max_real > eps)
    st.verdict = StabilityReport::Verdict::unstable;
  else
    st.verdict = StabilityReport::Verdict::inconclusive;

  if (cp.r2 == 0.0) {
    st.routh_available = true;
    const double av = cp.mu_v + cp.beta_h * eq.i_h;
    const double ah = cp.mu_h + cp.beta_v * eq.i_v;
    const double cross = cp.beta_h * cp.beta_v * eq.s_h * eq.s_v;
    st.a3 = 1.0;
    st.a2 = q + av + ah;
    st.a1 = q * av + q * ah + av * ah - cross;
    st.a0 = q * av * ah - cp.mu_h * cross;
    if (st.a1 != 0.0) {
      st.b1 = st.a2 - st.a3 * st.a0 / st.a1;
      st.c0 = st.a0;
      const bool routh_las = st.a2 > 0.0 && st.a1 > 0.0 && st.a0 > 0.0 &&
                             st.b1 > 0.0 && st.c0 > 0.0;
      const bool spectrum_las = st.verdict == StabilityReport::Verdict::las;
      if (routh_las != spectrum_las &&
          st.verdict != StabilityReport::Verdict::inconclusive) {
        st.certificates_disagree = true;
        st.note = "sign certificate and spectrum disagree; spectrum kept";
      }
    } else {
      st.verdict = StabilityReport::Verdict::inconclusive;
      st.note = "degenerate certificate: a1 = 0";
    }
  }
  return st;
}

} // namespace

std::pair<EquilibriumReport, StabilityReport> endemic_ode(
    const ConstParams& cp) {
  EquilibriumReport eq;
  eq.kind = EquilibriumKind::endemic_ode;
  const double r0v = r0_closed_form(cp);
  eq.r0_value = r0v;

  if (!(r0v > 1.0)) {
    eq.exists = false;
    eq.s_h = cp.lambda_h / cp.mu_h;
    eq.s_v = cp.lambda_v / cp.mu_v;
    StabilityReport st;
    st.note = "no endemic state: R0 <= 1";
    return {eq, st};
  }

  const double q = cp.mu_h + cp.delta + cp.r1;
  const double wane = cp.mu_h + cp.r2;
  const double den = cp.beta_v * cp.mu_v * q * wane +
                     cp.lambda_h * cp.beta_v * cp.beta_h * wane -
                     cp.beta_v * cp.mu_v * cp.r1 * cp.r2;
  if (!(den > 0.0))
    throw std::invalid_argument(
        "endemic_ode: nonpositive scaling denominator " + std::to_string(den) +
        "; parameter set outside the feasible region");
  const double c = cp.mu_h * cp.mu_v * q * wane / den;

  eq.i_v = c * (r0v * r0v - 1.0);
  eq.s_v = cp.lambda_v / cp.mu_v - eq.i_v;
  if (!(eq.s_v > 0.0))
    throw std::invalid_argument(
        "endemic_ode: vector equilibrium left the feasible region (S_v* <= 0)");
  eq.i_h = cp.mu_v * eq.i_v / (cp.beta_h * eq.s_v);
  eq.r_h = cp.r1 * eq.i_h / (cp.r2 + cp.mu_h);
  eq.s_h = (cp.lambda_h + cp.r2 * eq.r_h) / (cp.beta_v * eq.i_v + cp.mu_h);
  eq.residual = ode_equilibrium_residual(cp, eq);

  return {eq, stability_at(cp, eq)};
}

StabilityReport routh_hurwitz(const ConstParams& cp,
                              const EquilibriumReport& endemic) {
  if (cp.r2 != 0.0)
    throw std::invalid_argument(
        "routh_hurwitz: certificate requires r2 == 0 (got " +
        std::to_string(cp.r2) + ")");
  return stability_at(cp, endemic);
}

EquilibriumReport endemic_pde_r2zero(const ModelParams& p, double a_max,
                                     const QuadSettings& qs) {
  const double r2_hi = sup_on(p.r2, 0.0, a_max, 4096);
  const double r2_lo = inf_on(p.r2, 0.0, a_max, 4096);
  if (r2_hi != 0.0 || r2_lo != 0.0)
    throw std::invalid_argument(
        "endemic_pde_r2zero: requires r2 identically zero");

  EquilibriumReport eq;
  eq.kind = EquilibriumKind::endemic_pde_r2zero;
  const R0Report rep = r0(p, a_max, qs);
  eq.r0_value = rep.r0;
  if (!(rep.r0 > 1.0)) {
    eq.exists = false;
    return eq;
  }

  const Lattice L = make_lattice(a_max, qs.h);
  const auto pts2 = lattice_points(L, 2 * L.n);
  const Fn q_rate = loss_rate(p);
  const auto psi0 = backward_tail(make_eval(p.beta_h), q_rate, pts2);
  quad::CumulativeIntegral m(make_eval(p.mu_h), L.h, L.n);
  quad::CumulativeIntegral bv_cum(make_eval(p.beta_v), L.h, L.n);

  // f(x) for x = integral of beta_h * i: the vector force of infection the
  // host profiles would regenerate, divided by x. Decreasing, f(0) = R0^2.
  auto f = [&](double x) {
    const double i_v = p.lambda_v * x / (p.mu_v * (p.mu_v + x));
    std::vector<double> y(L.n + 1);
    for (int k = 0; k <= L.n; ++k)
      y[k] = eval(p.beta_v, L.x(k)) * p.lambda_h *
             std::exp(-m.edge(k) - i_v * bv_cum.edge(k)) * psi0[k];
    return p.lambda_v / (p.mu_v * (p.mu_v + x)) * quad::simpson_table(y, L.h);
  };

  const double sup_bh = sup_on(p.beta_h, 0.0, 2 * a_max, 8192);
  const double mu0 = inf_on(p.mu_h, 0.0, a_max, 8192);
  const double x_hi = sup_bh * p.lambda_h / mu0;
  const double f0 = f(0.0);
  const double fhi = f(x_hi);
  if (!(f0 > 1.0)) {
    eq.exists = false; // quadrature-level disagreement right at threshold
    return eq;
  }
  if (!(fhi < 1.0))
    throw std::runtime_error(
        "endemic_pde_r2zero: bracket failure, f(0)=" + std::to_string(f0) +
        ", f(x_hi)=" + std::to_string(fhi) + " at x_hi=" +
        std::to_string(x_hi));

  double lo = 0.0, hi = x_hi;
  for (int it = 0; it < 200 && (hi - lo) > 1e-10 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 1.0 ? lo : hi) = mid;
  }
  const double x_root = 0.5 * (lo + hi);
  eq.root_x = x_root;
  eq.bracket_lo = lo;
  eq.bracket_hi = hi;
  eq.residual = std::abs(f(x_root) - 1.0);

  const double i_v = p.lambda_v * x_root / (p.mu_v * (p.mu_v + x_root));
  eq.s_v = p.lambda_v / (p.mu_v + x_root);
  eq.i_v = i_v;

  eq.ages.resize(L.n + 1);
  eq.s.resize(L.n + 1);
  eq.i.assign(L.n + 1, 0.0);
  eq.r.assign(L.n + 1, 0.0);
  auto s_star = [&](double a) {
    return p.lambda_h * std::exp(-m.at(a) - i_v * bv_cum.at(a));
  };
  for (int k = 0; k <= L.n; ++k) {
    eq.ages[k] = L.x(k);
    eq.s[k] = s_star(L.x(k));
  }
  for (int k = 0; k < L.n; ++k) {
    const double lo_a = L.x(k), hi_a = L.x(k + 1);
    const double damp = std::exp(-quad::gauss5(q_rate, lo_a, hi_a));
    const double local = quad::gauss5(
        [&](double xi) {
          return eval(p.beta_v, xi) * s_star(xi) *
                 std::exp(-quad::gauss5(q_rate, xi, hi_a));
        },
        lo_a, hi_a);
    eq.i[k + 1] = eq.i[k] * damp + i_v * local;
  }
  for (int k = 0; k < L.n; ++k) {
    const double lo_a = L.x(k), hi_a = L.x(k + 1);
    const double damp = std::exp(-quad::gauss5(make_eval(p.mu_h), lo_a, hi_a));
    eq.r[k + 1] = eq.r[k] * damp +
                  0.5 * L.h *
                      (eval(p.r1, lo_a) * eq.i[k] * damp +
                       eval(p.r1, hi_a) * eq.i[k + 1]);
  }
  return eq;
}

double LyapunovL0::operator()(const SystemState& state) const {
  if (!(state.s_v > 0.0))
    throw std::domain_error("lyapunov: S_v must be positive");
  double mass = 0.0;
  for (std::size_t j = 0; j < psi.size(); ++j) mass += psi[j] * state.i[j];
  const double x = state.s_v / s_v0;
  return da * mass + (x - std::log(x) - 1.0) + state.i_v / s_v0;
}

LyapunovL0 make_lyapunov(const ModelParams& p, const Grid& grid) {
  std::vector<double> pts(grid.n_a + 1);
  for (int j = 0; j < grid.n_a; ++j) pts[j] = grid.cell_center(j);
  pts[grid.n_a] = grid.a_max; // truncation point of the tail integral
  const auto table = backward_tail(make_eval(p.beta_h), loss_rate(p), pts);
  LyapunovL0 fn;
  fn.psi.assign(table.begin(), table.end() - 1);
  fn.s_v0 = p.lambda_v / p.mu_v;
  fn.da = grid.da;
  return fn;
}

namespace {

double characteristic_g_at_step(double lambda, const ModelParams& p,
                                double a_max, double h) {
  const Lattice L = make_lattice(a_max, h);
  const Fn q_rate = loss_rate(p);
  quad::CumulativeIntegral m(make_eval(p.mu_h), L.h, L.n);
  auto s_h0 = [&](double a) { return p.lambda_h * std::exp(-m.at(a)); };

  // Forward recurrence for phi(a) = int_0^a beta_v s_h0 exp(-int_s^a (q+l)).
  std::vector<double> phi(L.n + 1, 0.0);
  for (int k = 0; k < L.n; ++k) {
    const double lo = L.x(k), hi = L.x(k + 1);
    const double damp =
        std::exp(-(quad::gauss5(q_rate, lo, hi) + lambda * L.h));
    const double local = quad::gauss5(
        [&](double s) {
          return eval(p.beta_v, s) * s_h0(s) *
                 std::exp(-(quad::gauss5(q_rate, s, hi) + lambda * (hi - s)));
        },
        lo, hi);
    phi[k + 1] = phi[k] * damp + local;
  }
  std::vector<double> y(L.n + 1);
  for (int k = 0; k <= L.n; ++k) y[k] = eval(p.beta_h, L.x(k)) * phi[k];
  const double s_v0 = p.lambda_v / p.mu_v;
  return (s_v0 / p.mu_v) * quad::simpson_table(y, L.h);
}

} // namespace

double characteristic_g(double lambda, const ModelParams& p, double a_max,
                        const QuadSettings& qs) {
  const double mu0 = inf_on(p.mu_h, 0.0, a_max, 8192);
  if (!(lambda > -mu0))
    throw std::domain_error(
        "characteristic_g: lambda must exceed -inf(mu_h) = " +
        std::to_string(-mu0));

  // Evaluate on the requested lattice and on its two-fold refinement, then
  // cancel the leading fourth-order quadrature term of the outer rule.
  const double coarse = characteristic_g_at_step(lambda, p, a_max, qs.h);
  const double fine = characteristic_g_at_step(lambda, p, a_max, qs.h / 2.0);
  return fine + (fine - coarse) / 15.0;
}

} // namespace malsim
