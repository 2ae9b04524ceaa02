#include "malsim/params.hpp"

#include <cmath>
#include <stdexcept>

#include "malsim/quadrature.hpp"

namespace malsim {

ModelParams to_age_structured(const ConstParams& p) {
  ModelParams m;
  m.lambda_h = p.lambda_h;
  m.lambda_v = p.lambda_v;
  m.mu_v = p.mu_v;
  m.mu_h = ConstantFn{p.mu_h};
  m.delta = ConstantFn{p.delta};
  m.r1 = ConstantFn{p.r1};
  m.r2 = ConstantFn{p.r2};
  m.beta_h = ConstantFn{p.beta_h};
  m.beta_v = ConstantFn{p.beta_v};
  return m;
}

ConstParams to_const(const ModelParams& p) {
  auto get = [](const AgeFunction& f, const char* name) {
    if (const auto* c = std::get_if<ConstantFn>(&f)) return c->value;
    throw std::invalid_argument(std::string("parameter ") + name +
                                " is not constant in age");
  };
  ConstParams c;
  c.lambda_h = p.lambda_h;
  c.lambda_v = p.lambda_v;
  c.mu_v = p.mu_v;
  c.mu_h = get(p.mu_h, "mu_h");
  c.delta = get(p.delta, "delta");
  c.r1 = get(p.r1, "r1");
  c.r2 = get(p.r2, "r2");
  c.beta_h = get(p.beta_h, "beta_h");
  c.beta_v = get(p.beta_v, "beta_v");
  return c;
}

namespace {

// Components of the baseline set that never change.
const ExpSumFn kBaselineMuH{{5.8 * 2e-3, 5.8 * 9e-2, 5.8 * 1e-4},
                            {0.0, -2.1, 0.09}};
const ExpSumFn kBaselineDelta{{1e-3 * 0.658, 1e-3 * 4e-4}, {-0.3405, 0.0444}};
const LogisticFn kBaselineR1{6.0, 11.0, 0.05};
// 1/(5 - 4 e^{-0.05a}) == 0.2 / (1 - 0.8 e^{-0.05a})
const LogisticFn kBaselineR2{0.2, -0.8, 0.05};
constexpr double kExposureScale = 22.7;
constexpr double kExposureRate = 0.0934;
constexpr double kTheta = 219.0;      // 0.6 bites/day
constexpr double kBetaVTilde = 0.022; // infection probability per bite
constexpr double kGammaExp = 0.302;
constexpr double kGammaScale = 7.1e-2;

// Host normalization D = lambda_h * integral_0^inf exp(-int_0^s mu_h).
// Truncated at 100 years; the survival there is ~e^{-53}, and the analytic
// tail bound exp(-M(A))/mu_tail is returned alongside.
struct DNorm {
  double value;
  double tail_bound;
};
DNorm baseline_d_norm(double lambda_h) {
  const AgeFunction mu = kBaselineMuH;
  auto mu_f = [&mu](double a) { return eval(mu, a); };
  const double A = 100.0;
  const int n = 20000;
  quad::CumulativeIntegral m(mu_f, A / n, n);
  std::vector<double> surv(n + 1);
  for (int k = 0; k <= n; ++k) surv[k] = std::exp(-m.edge(k));
  const double integral = quad::simpson_table(surv, A / n);
  const double mu_tail = inf_on(mu, A, 3.0 * A, 2048);
  const double tail = std::exp(-m.edge(n)) / mu_tail;
  return {lambda_h * integral, lambda_h * tail};
}

} // namespace

BaselineDerived baseline_derived() {
  BaselineDerived d;
  const double lambda_h = 3.37e4;
  const DNorm dn = baseline_d_norm(lambda_h);
  d.d_norm = dn.value;
  d.d_tail_bound = dn.tail_bound;
  // max of scale*a*exp(-rate*a) is at a = 1/rate, value scale/(rate*e).
  d.exposure_argmax = 1.0 / kExposureRate;
  d.exposure_sup = kExposureScale / (kExposureRate * std::exp(1.0));
  d.theta = kTheta;
  d.beta_v_tilde = kBetaVTilde;
  return d;
}

ModelParams baseline_params(double lambda_v) {
  if (!(lambda_v > 0.0))
    throw std::invalid_argument("baseline_params: lambda_v must be > 0");
  const BaselineDerived d = baseline_derived();
  ModelParams p;
  p.lambda_h = 3.37e4;
  p.lambda_v = lambda_v;
  p.mu_v = 18.25;
  p.mu_h = kBaselineMuH;
  p.delta = kBaselineDelta;
  p.r1 = kBaselineR1;
  p.r2 = kBaselineR2;
  // beta_h = theta * G / D with G = 7.1e-2 * G0^0.302
  p.beta_h = GammaPowerFn{kTheta * kGammaScale / d.d_norm, kGammaExp,
                          kExposureScale, kExposureRate};
  // beta_v = theta * beta_v_tilde * G0 / (sup(G0) * D)
  p.beta_v = GammaShapeFn{
      kTheta * kBetaVTilde * kExposureScale / (d.exposure_sup * d.d_norm),
      kExposureRate};
  return p;
}

std::vector<double> cell_average(const AgeFunction& f, const Grid& grid) {
  std::vector<double> out(grid.n_a);
  auto fe = [&f](double a) { return eval(f, a); };
  for (int j = 0; j < grid.n_a; ++j) {
    const double v =
        quad::gauss5(fe, grid.cell_left(j), grid.cell_left(j + 1)) / grid.da;
    if (!std::isfinite(v))
      throw std::invalid_argument(
          "cell_average: non-finite evaluation in cell " + std::to_string(j));
    out[j] = v;
  }
  return out;
}

CellAverages cell_averages(const ModelParams& p, const Grid& grid) {
  CellAverages c;
  c.da = grid.da;
  c.mu_h = cell_average(p.mu_h, grid);
  c.delta = cell_average(p.delta, grid);
  c.r1 = cell_average(p.r1, grid);
  c.r2 = cell_average(p.r2, grid);
  c.beta_h = cell_average(p.beta_h, grid);
  c.beta_v = cell_average(p.beta_v, grid);
  return c;
}

ValidationReport validate(const ModelParams& p, double a_max) {
  ValidationReport rep;

  rep.positivity_ok = p.lambda_h > 0.0 && p.lambda_v > 0.0 && p.mu_v > 0.0;
  if (!rep.positivity_ok)
    rep.messages.push_back("positivity: lambda_h, lambda_v, mu_v must be > 0");

  struct Named {
    const char* name;
    const AgeFunction* f;
    double* sup;
  };
  const Named fns[] = {
      {"mu_h", &p.mu_h, &rep.sup_mu_h},     {"delta", &p.delta, &rep.sup_delta},
      {"r1", &p.r1, &rep.sup_r1},           {"r2", &p.r2, &rep.sup_r2},
      {"beta_h", &p.beta_h, &rep.sup_beta_h},
      {"beta_v", &p.beta_v, &rep.sup_beta_v}};

  rep.bounded_ok = true;
  rep.nonnegative_ok = true;
  for (const auto& nf : fns) {
    if (const std::string msg = check_well_formed(*nf.f); !msg.empty()) {
      rep.bounded_ok = false;
      rep.messages.push_back(std::string(nf.name) + ": " + msg);
      continue;
    }
    *nf.sup = sup_on(*nf.f, 0.0, a_max);
    if (!std::isfinite(*nf.sup)) {
      rep.bounded_ok = false;
      rep.messages.push_back(std::string(nf.name) + ": unbounded on [0,a_max]");
    }
    // sample twice the horizon: shifted arguments beta_h(a+s) reach past a_max
    if (inf_on(*nf.f, 0.0, 2.0 * a_max, 8192) < 0.0) {
      rep.nonnegative_ok = false;
      rep.messages.push_back(std::string(nf.name) +
                             ": negative value in sampled range");
    }
  }

  rep.mu0 = inf_on(p.mu_h, 0.0, a_max, 8192);
  rep.mu0_positive = rep.mu0 > 0.0;
  if (!rep.mu0_positive)
    rep.messages.push_back("mu_h: sampled infimum is not positive");

  rep.mosquito_rate_dominates = p.mu_v >= rep.mu0;
  if (!rep.mosquito_rate_dominates)
    rep.messages.push_back(
        "warning: mu_v < inf(mu_h); standing assumption used only in proofs");

  // Transmission-cycle check: integral of beta_h(a+s)*beta_v(a)*e^{-mu0(a+s)}
  // over [0,a_max]^2 must be positive or the infection cannot circulate.
  // Midpoint tensor rule; positivity is all that matters here.
  if (rep.bounded_ok && rep.mu0_positive) {
    const int n = 256;
    const double h = a_max / n;
    double acc = 0.0;
    for (int ia = 0; ia < n; ++ia) {
      const double a = (ia + 0.5) * h;
      const double bv = eval(p.beta_v, a);
      if (bv == 0.0) continue;
      double inner = 0.0;
      for (int is = 0; is < n; ++is) {
        const double s = (is + 0.5) * h;
        inner += eval(p.beta_h, a + s) * std::exp(-rep.mu0 * (a + s));
      }
      acc += bv * inner;
    }
    rep.mixing_integral = acc * h * h;
  }
  rep.mixing_ok = rep.mixing_integral > 0.0;
  if (!rep.mixing_ok)
    rep.messages.push_back(
        "mixing: beta_h/beta_v transmission-cycle integral is zero");

  return rep;
}

} // namespace malsim
