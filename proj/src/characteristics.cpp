#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "malsim/errors.hpp"
#include "malsim/quadrature.hpp"
#include "malsim/solver.hpp"

namespace malsim {

namespace {

// phi(m) = (1 - e^{-m}) / m, stable near m = 0.
double phi(double m) {
  if (m == 0.0) return 1.0;
  return -std::expm1(-m) / m;
}

struct OraclePrecomp {
  // Full age intervals [a_j, a_{j+1}] between adjacent cell centers,
  // index j = source cell (j -> j+1), j = 0 .. n_a-2.
  std::vector<double> im;  // integral of mu_h
  std::vector<double> iq;  // integral of mu_h + delta + r1
  std::vector<double> irw; // integral of r2 + mu_h
  // Weighted beta_v integrals for a linear-in-time vector infection level:
  // ibvi = I_v^n * b0 + I_v^{n+1} * b1.
  std::vector<double> b0, b1;
  // Half interval [0, da/2] from the inflow boundary to the first center.
  double im_h, iq_h, irw_h, b0_h, b1_h;
  // Point values at the cell centers and at age zero.
  std::vector<double> bv, bh, r1v, r2v;
  double bv0, r10;
};

OraclePrecomp precompute(const ModelParams& p, const Grid& g) {
  OraclePrecomp pc;
  const int n = g.n_a;
  const double d = g.da;
  auto mu = [&](double a) { return eval(p.mu_h, a); };
  auto q = [&](double a) {
    return eval(p.mu_h, a) + eval(p.delta, a) + eval(p.r1, a);
  };
  auto rw = [&](double a) { return eval(p.r2, a) + eval(p.mu_h, a); };

  pc.im.resize(n - 1);
  pc.iq.resize(n - 1);
  pc.irw.resize(n - 1);
  pc.b0.resize(n - 1);
  pc.b1.resize(n - 1);
  for (int j = 0; j + 1 < n; ++j) {
    const double a0 = g.cell_center(j);
    const double a1 = g.cell_center(j + 1);
    pc.im[j] = quad::gauss5(mu, a0, a1);
    pc.iq[j] = quad::gauss5(q, a0, a1);
    pc.irw[j] = quad::gauss5(rw, a0, a1);
    pc.b0[j] = quad::gauss5(
        [&](double a) { return eval(p.beta_v, a) * (1.0 - (a - a0) / d); }, a0,
        a1);
    pc.b1[j] = quad::gauss5(
        [&](double a) { return eval(p.beta_v, a) * ((a - a0) / d); }, a0, a1);
  }
  // Boundary characteristic enters at age 0, time t_{n+1/2}; the time weight
  // for I_v^{n+1} along it is (d/2 + a) / d.
  pc.im_h = quad::gauss5(mu, 0.0, d / 2);
  pc.iq_h = quad::gauss5(q, 0.0, d / 2);
  pc.irw_h = quad::gauss5(rw, 0.0, d / 2);
  pc.b0_h = quad::gauss5(
      [&](double a) { return eval(p.beta_v, a) * (1.0 - (d / 2 + a) / d); },
      0.0, d / 2);
  pc.b1_h = quad::gauss5(
      [&](double a) { return eval(p.beta_v, a) * ((d / 2 + a) / d); }, 0.0,
      d / 2);

  pc.bv.resize(n);
  pc.bh.resize(n);
  pc.r1v.resize(n);
  pc.r2v.resize(n);
  for (int j = 0; j < n; ++j) {
    const double a = g.cell_center(j);
    pc.bv[j] = eval(p.beta_v, a);
    pc.bh[j] = eval(p.beta_h, a);
    pc.r1v[j] = eval(p.r1, a);
    pc.r2v[j] = eval(p.r2, a);
  }
  pc.bv0 = eval(p.beta_v, 0.0);
  pc.r10 = eval(p.r1, 0.0);
  return pc;
}

double rel_change(double next, double prev) {
  return std::abs(next - prev) / std::max(1.0, std::abs(next));
}

double rel_change_inf(const std::vector<double>& next,
                      const std::vector<double>& prev) {
  double scale = 1.0;
  for (double x : next) scale = std::max(scale, std::abs(x));
  double worst = 0.0;
  for (std::size_t k = 0; k < next.size(); ++k)
    worst = std::max(worst, std::abs(next[k] - prev[k]));
  return worst / scale;
}

} // namespace

SystemState characteristics_oracle(const ModelParams& p, const Grid& grid,
                                   const SystemState& init, double t_eval) {
  if (std::abs(grid.dt - grid.da) > 1e-12 * grid.da)
    throw std::invalid_argument(
        "characteristics_oracle: requires dt == da (unit CFL lattice)");
  if (static_cast<int>(init.s.size()) != grid.n_a ||
      static_cast<int>(init.i.size()) != grid.n_a ||
      static_cast<int>(init.r.size()) != grid.n_a)
    throw std::invalid_argument(
        "characteristics_oracle: state arrays do not match grid");
  const double d = grid.dt;
  const double span = t_eval - init.t;
  const long steps = std::lround(span / d);
  if (steps < 0 || std::abs(span - static_cast<double>(steps) * d) >
                       1e-9 * std::max(1.0, std::abs(t_eval)))
    throw std::invalid_argument(
        "characteristics_oracle: t_eval must be init.t + k*dt, k >= 0");

  const OraclePrecomp pc = precompute(p, grid);
  const int n = grid.n_a;
  const double nv_inf = p.lambda_v / p.mu_v;
  const double nv0 = init.s_v + init.i_v;

  std::vector<double> s = init.s, i = init.i, r = init.r;
  std::vector<double> s_new(n), i_new(n), r_new(n);
  double sv = init.s_v;
  double iv = init.i_v;

  auto pressure_of = [&](const std::vector<double>& ih) {
    double acc = 0.0;
    for (int j = 0; j < n; ++j) acc += pc.bh[j] * ih[j];
    return d * acc;
  };

  double lam = pressure_of(i);

  for (long nstep = 0; nstep < steps; ++nstep) {
    const double t_next = init.t + static_cast<double>(nstep + 1) * d;
    const double nv_next = nv_inf + (nv0 - nv_inf) * std::exp(-p.mu_v *
                                                              (t_next - init.t));
    // Fixed-point iterate: start from a pure transport shift of the old step.
    double lam_it = lam;
    double iv_it = iv;
    double sv_it = sv;
    for (int j = n - 1; j >= 1; --j) {
      s_new[j] = s[j - 1];
      i_new[j] = i[j - 1];
      r_new[j] = r[j - 1];
    }
    s_new[0] = p.lambda_h;
    i_new[0] = 0.0;
    r_new[0] = 0.0;

    std::vector<double> s_prev(n), i_prev(n), r_prev(n);
    bool converged = false;
    for (int sweep = 0; sweep < 200; ++sweep) {
      s_prev = s_new;
      i_prev = i_new;
      r_prev = r_new;
      const double lam_prev = lam_it;
      const double iv_prev = iv_it;

      // Vector block: integrating factor with the trapezoidal mean of the
      // host pressure; total population decays exactly.
      const double lam_bar = 0.5 * (lam + lam_it);
      const double m = (lam_bar + p.mu_v) * d;
      sv_it = sv * std::exp(-m) + p.lambda_v * d * phi(m);
      iv_it = nv_next - sv_it;

      // Host block along characteristics; r_new on the right-hand sides is
      // the previous iterate.
      for (int j = 1; j < n; ++j) {
        const int k = j - 1;
        const double ibvi = iv * pc.b0[k] + iv_it * pc.b1[k];
        const double es = std::exp(-pc.im[k] - ibvi);
        s_new[j] = s[k] * es + 0.5 * d *
                                   (pc.r2v[k] * r[k] * es +
                                    pc.r2v[j] * r_prev[j]);
        const double ei = std::exp(-pc.iq[k]);
        i_new[j] = i[k] * ei + 0.5 * d *
                                   (pc.bv[k] * iv * s[k] * ei +
                                    pc.bv[j] * iv_it * s_new[j]);
        const double er = std::exp(-pc.irw[k]);
        r_new[j] = r[k] * er + 0.5 * d *
                                   (pc.r1v[k] * i[k] * er +
                                    pc.r1v[j] * i_new[j]);
      }
      // Boundary half-step: inflow (lambda_h, 0, 0) at age 0, time t_{n+1/2}.
      {
        const double iv_mid = 0.5 * (iv + iv_it);
        const double ibvi = iv * pc.b0_h + iv_it * pc.b1_h;
        const double es = std::exp(-pc.im_h - ibvi);
        const double h2 = 0.25 * d; // half of the half-interval width
        s_new[0] = p.lambda_h * es + h2 * pc.r2v[0] * r_prev[0];
        const double ei = std::exp(-pc.iq_h);
        i_new[0] = h2 * (pc.bv0 * iv_mid * p.lambda_h * ei +
                         pc.bv[0] * iv_it * s_new[0]);
        r_new[0] = h2 * pc.r1v[0] * i_new[0];
      }
      lam_it = pressure_of(i_new);

      const double change =
          std::max({rel_change(lam_it, lam_prev), rel_change(iv_it, iv_prev),
                    rel_change_inf(s_new, s_prev), rel_change_inf(i_new, i_prev),
                    rel_change_inf(r_new, r_prev)});
      if (change <= 1e-8) {
        converged = true;
        break;
      }
    }
    if (!converged)
      throw OracleError(
          "characteristics_oracle: fixed-point sweep did not reach 1e-8 in "
          "200 iterations at t=" +
          std::to_string(t_next));

    s.swap(s_new);
    i.swap(i_new);
    r.swap(r_new);
    sv = sv_it;
    iv = iv_it;
    lam = lam_it;
  }

  SystemState out;
  out.s = std::move(s);
  out.i = std::move(i);
  out.r = std::move(r);
  out.s_v = sv;
  out.i_v = iv;
  out.t = t_eval;
  return out;
}

} // namespace malsim
