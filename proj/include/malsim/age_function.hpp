#pragma once

#include <string>
#include <variant>
#include <vector>

namespace malsim {

// Descriptors for the nonnegative age-dependent rates of the model. Each is a
// small closed-form family (or a table) so parameter sets serialize exactly
// and evaluation is bitwise deterministic.

struct ConstantFn {
  double value = 0.0;
  bool operator==(const ConstantFn&) const = default;
};

// sum_i coef[i] * exp(rate[i] * a)
struct ExpSumFn {
  std::vector<double> coef;
  std::vector<double> rate;
  bool operator==(const ExpSumFn&) const = default;
};

// sup / (1 + shape * exp(-rate * a)); requires shape > -1 so the denominator
// stays positive on a >= 0.
struct LogisticFn {
  double sup = 0.0;
  double shape = 0.0;
  double rate = 0.0;
  bool operator==(const LogisticFn&) const = default;
};

// scale * a * exp(-rate * a) — the rise-then-decay exposure shape.
struct GammaShapeFn {
  double scale = 0.0;
  double rate = 0.0;
  bool operator==(const GammaShapeFn&) const = default;
};

// scale * (inner_scale * a * exp(-inner_rate * a))^power
struct GammaPowerFn {
  double scale = 0.0;
  double power = 1.0;
  double inner_scale = 0.0;
  double inner_rate = 0.0;
  bool operator==(const GammaPowerFn&) const = default;
};

// Piecewise-linear table over strictly increasing ages; outside the range the
// nearest end value is held.
struct TableFn {
  std::vector<double> age;
  std::vector<double> value;
  bool operator==(const TableFn&) const = default;
};

using AgeFunction = std::variant<ConstantFn, ExpSumFn, LogisticFn, GammaShapeFn,
                                 GammaPowerFn, TableFn>;

double eval(const AgeFunction& f, double a);

// Structural sanity independent of any grid: finite numbers, table abscissae
// strictly increasing, logistic shape > -1, table values >= 0.
// Returns an empty string when well-formed, else a diagnostic.
std::string check_well_formed(const AgeFunction& f);

// Grid-sampled bounds on [lo, hi] (n+1 uniform samples, fixed order).
double sup_on(const AgeFunction& f, double lo, double hi, int n = 4096);
double inf_on(const AgeFunction& f, double lo, double hi, int n = 4096);

} // namespace malsim
