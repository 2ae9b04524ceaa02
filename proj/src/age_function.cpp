#include "malsim/age_function.hpp"

#include <algorithm>
#include <cmath>

namespace malsim {

namespace {

struct EvalVisitor {
  double a;
  double operator()(const ConstantFn& f) const { return f.value; }
  double operator()(const ExpSumFn& f) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < f.coef.size(); ++i)
      acc += f.coef[i] * std::exp(f.rate[i] * a);
    return acc;
  }
  double operator()(const LogisticFn& f) const {
    return f.sup / (1.0 + f.shape * std::exp(-f.rate * a));
  }
  double operator()(const GammaShapeFn& f) const {
    return f.scale * a * std::exp(-f.rate * a);
  }
  double operator()(const GammaPowerFn& f) const {
    const double inner = f.inner_scale * a * std::exp(-f.inner_rate * a);
    return f.scale * std::pow(inner, f.power);
  }
  double operator()(const TableFn& f) const {
    if (f.age.empty()) return 0.0;
    if (a <= f.age.front()) return f.value.front();
    if (a >= f.age.back()) return f.value.back();
    const auto it = std::upper_bound(f.age.begin(), f.age.end(), a);
    const std::size_t k = static_cast<std::size_t>(it - f.age.begin());
    const double w = (a - f.age[k - 1]) / (f.age[k] - f.age[k - 1]);
    return f.value[k - 1] + w * (f.value[k] - f.value[k - 1]);
  }
};

bool all_finite(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

struct CheckVisitor {
  std::string operator()(const ConstantFn& f) const {
    if (!std::isfinite(f.value)) return "constant: non-finite value";
    if (f.value < 0.0) return "constant: negative value";
    return {};
  }
  std::string operator()(const ExpSumFn& f) const {
    if (f.coef.size() != f.rate.size() || f.coef.empty())
      return "exp_sum: needs matching, nonempty coef/rate lists";
    if (!all_finite(f.coef) || !all_finite(f.rate))
      return "exp_sum: non-finite parameter";
    return {};
  }
  std::string operator()(const LogisticFn& f) const {
    if (!std::isfinite(f.sup) || !std::isfinite(f.shape) ||
        !std::isfinite(f.rate))
      return "logistic: non-finite parameter";
    if (f.shape <= -1.0) return "logistic: shape must be > -1";
    if (f.sup < 0.0) return "logistic: negative sup";
    return {};
  }
  std::string operator()(const GammaShapeFn& f) const {
    if (!std::isfinite(f.scale) || !std::isfinite(f.rate))
      return "gamma_shape: non-finite parameter";
    if (f.scale < 0.0) return "gamma_shape: negative scale";
    return {};
  }
  std::string operator()(const GammaPowerFn& f) const {
    if (!std::isfinite(f.scale) || !std::isfinite(f.power) ||
        !std::isfinite(f.inner_scale) || !std::isfinite(f.inner_rate))
      return "gamma_power: non-finite parameter";
    if (f.scale < 0.0 || f.inner_scale < 0.0)
      return "gamma_power: negative scale";
    if (f.power <= 0.0) return "gamma_power: power must be > 0";
    return {};
  }
  std::string operator()(const TableFn& f) const {
    if (f.age.size() != f.value.size() || f.age.size() < 2)
      return "table: needs >= 2 (age, value) pairs";
    if (!all_finite(f.age) || !all_finite(f.value))
      return "table: non-finite entry";
    for (std::size_t k = 1; k < f.age.size(); ++k)
      if (!(f.age[k] > f.age[k - 1]))
        return "table: ages must be strictly increasing";
    for (double v : f.value)
      if (v < 0.0) return "table: negative value";
    return {};
  }
};

} // namespace

double eval(const AgeFunction& f, double a) {
  return std::visit(EvalVisitor{a}, f);
}

std::string check_well_formed(const AgeFunction& f) {
  return std::visit(CheckVisitor{}, f);
}

double sup_on(const AgeFunction& f, double lo, double hi, int n) {
  double m = eval(f, lo);
  for (int k = 1; k <= n; ++k)
    m = std::max(m, eval(f, lo + (hi - lo) * k / n));
  return m;
}

double inf_on(const AgeFunction& f, double lo, double hi, int n) {
  double m = eval(f, lo);
  for (int k = 1; k <= n; ++k)
    m = std::min(m, eval(f, lo + (hi - lo) * k / n));
  return m;
}

} // namespace malsim
