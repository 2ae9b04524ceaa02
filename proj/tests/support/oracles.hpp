// Shared helpers for the test suite: independent quadrature oracles and a
// deterministic generator of admissible constant-parameter sets. Everything
// here is deliberately written against the math, not against the library
// internals, so agreement between the two is meaningful.
#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>
#include <vector>

#include "malsim/age_function.hpp"
#include "malsim/params.hpp"

namespace testsupport {

inline double rel_err(double got, double want) {
  const double scale = std::max(std::abs(want), 1e-300);
  return std::abs(got - want) / scale;
}

// Recursive adaptive Simpson; plain textbook version.
inline double adaptive_simpson_rec(const std::function<double(double)>& f,
                                   double a, double b, double fa, double fm,
                                   double fb, double whole, double tol,
                                   int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
         adaptive_simpson_rec(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

inline double adaptive_simpson(const std::function<double(double)>& f,
                               double a, double b, double tol = 1e-10,
                               int depth = 40) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, depth);
}

// 3-point Gauss-Legendre on [lo, hi]; chosen specifically because the library
// quadrature uses the 5-point rule, so shared bugs are unlikely.
inline double gl3(const std::function<double(double)>& f, double lo,
                  double hi) {
  const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
  const double x = 0.7745966692414834; // sqrt(3/5)
  const double w0 = 0.8888888888888889, w1 = 0.5555555555555556;
  return h * (w0 * f(c) + w1 * (f(c - h * x) + f(c + h * x)));
}

// Composite Simpson over tabulated values (n intervals, n even except that a
// trailing odd interval is handled with the 3/8 rule).
inline double simpson_mixed(const std::vector<double>& y, double h) {
  const int n = static_cast<int>(y.size()) - 1;
  if (n <= 0) return 0.0;
  int m = n;
  double tail = 0.0;
  if (m % 2 != 0) {
    if (m < 3) return 0.5 * h * (y[0] + y[1]); // single interval: trapezoid
    m -= 3;
    tail = 3.0 * h / 8.0 *
           (y[m] + 3.0 * y[m + 1] + 3.0 * y[m + 2] + y[m + 3]);
  }
  double acc = y[0] + y[m];
  for (int k = 1; k < m; ++k) acc += (k % 2 ? 4.0 : 2.0) * y[k];
  return h / 3.0 * acc + tail;
}

// Independent evaluation of the squared reproduction number by direct
// tensor-product quadrature: outer Simpson over the age of acquisition,
// inner Simpson over the infectious-age offset, with all survival exponents
// accumulated forward by per-interval GL3. Shares no code or algorithmic
// structure with the library's backward-tail evaluation.
inline double r0_squared_tensor(const malsim::ModelParams& p, double a_max,
                                double h) {
  using malsim::eval;
  const int n = static_cast<int>(std::lround(a_max / h));
  auto mu = [&](double a) { return eval(p.mu_h, a); };
  auto q = [&](double a) {
    return eval(p.mu_h, a) + eval(p.delta, a) + eval(p.r1, a);
  };
  // cumulative host mortality at outer nodes
  std::vector<double> m(n + 1, 0.0);
  for (int k = 1; k <= n; ++k)
    m[k] = m[k - 1] + gl3(mu, (k - 1) * h, k * h);
  std::vector<double> outer(n + 1, 0.0);
  std::vector<double> inner_vals;
  for (int k = 0; k <= n; ++k) {
    const double xi = k * h;
    const int n_in = 2 * n - k; // offsets up to 2*a_max - xi
    inner_vals.assign(n_in + 1, 0.0);
    double acc_q = 0.0;
    inner_vals[0] = eval(p.beta_h, xi);
    for (int j = 1; j <= n_in; ++j) {
      acc_q += gl3(q, xi + (j - 1) * h, xi + j * h);
      inner_vals[j] = eval(p.beta_h, xi + j * h) * std::exp(-acc_q);
    }
    outer[k] = eval(p.beta_v, xi) * p.lambda_h * std::exp(-m[k]) *
               simpson_mixed(inner_vals, h);
  }
  const double s_v0 = p.lambda_v / p.mu_v;
  return (s_v0 / p.mu_v) * simpson_mixed(outer, h);
}

// Draws an admissible constant-parameter set whose closed-form reproduction
// number lies in [r0_lo, r0_hi]. Mortality is kept high enough that the
// default age truncation leaves only an exp(-18) tail.
inline malsim::ConstParams random_const_params(std::mt19937& rng, double r0_lo,
                                               double r0_hi,
                                               bool r2_zero = false) {
  auto logu = [&rng](double lo, double hi) {
    std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
    return std::exp(u(rng));
  };
  auto uni = [&rng](double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    return u(rng);
  };
  malsim::ConstParams cp;
  cp.mu_h = logu(0.15, 0.8);
  cp.delta = uni(0.0, 0.2);
  cp.r1 = logu(0.5, 5.0);
  cp.r2 = r2_zero ? 0.0 : uni(0.05, 1.0);
  cp.mu_v = uni(8.0, 40.0);
  cp.lambda_h = logu(1e3, 1e5);
  cp.lambda_v = logu(1e5, 1e7);
  cp.beta_h = logu(1e-6, 1e-4);
  const double r0 = uni(r0_lo, r0_hi);
  const double q = cp.mu_h + cp.delta + cp.r1;
  cp.beta_v = r0 * r0 * cp.mu_v * cp.mu_v * cp.mu_h * q /
              (cp.beta_h * cp.lambda_v * cp.lambda_h);
  return cp;
}

// Age horizon that makes the closed-form comparison meaningful: the dropped
// tail of the reproduction-number integral is ~exp(-mu_h * a_max).
inline double a_max_for(const malsim::ConstParams& cp) {
  return std::max(100.0, 18.0 / cp.mu_h);
}

} // namespace testsupport
