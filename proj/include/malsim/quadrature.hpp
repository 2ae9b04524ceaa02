#pragma once

#include <cmath>
#include <functional>
#include <vector>

// Small deterministic quadrature kit. Everything uses fixed node counts and a
// fixed left-to-right summation order so results are bitwise reproducible.

namespace malsim::quad {

// 5-point Gauss-Legendre on [lo, hi]. Exact for polynomials up to degree 9.
template <class F>
double gauss5(F&& f, double lo, double hi) {
  static constexpr double X1 = 0.5384693101056830910363144207;
  static constexpr double X2 = 0.9061798459386639927976268782;
  static constexpr double W0 = 0.5688888888888888888888888889;
  static constexpr double W1 = 0.4786286704993664680412915148;
  static constexpr double W2 = 0.2369268850561890875142640407;
  const double c = 0.5 * (lo + hi);
  const double h = 0.5 * (hi - lo);
  return h * (W2 * f(c - h * X2) + W1 * f(c - h * X1) + W0 * f(c) +
              W1 * f(c + h * X1) + W2 * f(c + h * X2));
}

// Composite 5-point Gauss-Legendre over n equal subintervals.
template <class F>
double composite_gauss5(F&& f, double lo, double hi, int n) {
  const double h = (hi - lo) / n;
  double acc = 0.0;
  for (int k = 0; k < n; ++k) acc += gauss5(f, lo + k * h, lo + (k + 1) * h);
  return acc;
}

// Prefix integrals of a rate function on a uniform edge grid x_k = k*h,
// k = 0..n: value(k) = integral of f over [0, x_k], each interval by gauss5.
// at(x) interpolates with one extra gauss5 tail from the nearest lower edge,
// so it is smooth in x and accurate everywhere in [0, n*h].
class CumulativeIntegral {
public:
  CumulativeIntegral() = default;
  template <class F>
  CumulativeIntegral(F f, double h, int n) : h_(h), prefix_(n + 1, 0.0), f_(f) {
    for (int k = 0; k < n; ++k)
      prefix_[k + 1] = prefix_[k] + gauss5(f, k * h, (k + 1) * h);
  }
  double step() const { return h_; }
  int intervals() const { return static_cast<int>(prefix_.size()) - 1; }
  double edge(int k) const { return prefix_[k]; }
  double at(double x) const {
    if (x <= 0.0) return 0.0;
    int k = static_cast<int>(x / h_);
    const int last = intervals();
    if (k >= last) k = last - 1;
    const double xk = k * h_;
    if (x <= xk) return prefix_[k];
    return prefix_[k] + gauss5(f_, xk, x);
  }

private:
  double h_ = 1.0;
  std::vector<double> prefix_;
  std::function<double(double)> f_;
};

// Composite Simpson over tabulated values y_k at uniform spacing h, k = 0..n
// (n even). Used for outer integrals whose integrand is only known on the
// cumulative-quadrature grid.
inline double simpson_table(const std::vector<double>& y, double h) {
  const int n = static_cast<int>(y.size()) - 1;
  double acc = y[0] + y[n];
  for (int k = 1; k < n; k += 2) acc += 4.0 * y[k];
  for (int k = 2; k < n; k += 2) acc += 2.0 * y[k];
  return acc * h / 3.0;
}

} // namespace malsim::quad
