#include "malsim/ode_model.hpp"

#include <algorithm>
#include <cmath>

#include "malsim/errors.hpp"

namespace malsim {

OdeDerivative ode_rhs(const OdeState& st, const ConstParams& cp) {
  const double inf_h = cp.beta_v * st.i_v * st.s_h;
  const double inf_v = cp.beta_h * st.s_v * st.i_h;
  const double rec = cp.r1 * st.i_h;
  const double wane = cp.r2 * st.r_h;
  OdeDerivative d;
  d.s_h = cp.lambda_h - inf_h - cp.mu_h * st.s_h + wane;
  d.i_h = inf_h - cp.mu_h * st.i_h - cp.delta * st.i_h - rec;
  d.r_h = rec - wane - cp.mu_h * st.r_h;
  d.s_v = cp.lambda_v - inf_v - cp.mu_v * st.s_v;
  d.i_v = inf_v - cp.mu_v * st.i_v;
  return d;
}

namespace {

void check_finite(const OdeState& st) {
  if (!(std::isfinite(st.s_h) && std::isfinite(st.i_h) &&
        std::isfinite(st.r_h) && std::isfinite(st.s_v) &&
        std::isfinite(st.i_v)))
    throw BlowupError("ode integration produced a non-finite value", -1, st.t);
}

void step_matched(OdeState& st, const ConstParams& cp, double dt) {
  const double pressure = cp.beta_h * st.i_h; // old host infection level
  const double sv =
      (st.s_v + cp.lambda_v * dt) / (1.0 + dt * pressure + cp.mu_v * dt);
  const double iv = (st.i_v + dt * pressure * sv) / (1.0 + dt * cp.mu_v);
  const double sh =
      (st.s_h + cp.lambda_h * dt + cp.r2 * st.r_h * dt) /
      (1.0 + dt * cp.beta_v * iv + dt * cp.mu_h);
  const double ih = (st.i_h + dt * cp.beta_v * iv * sh) /
                    (1.0 + dt * (cp.mu_h + cp.delta + cp.r1));
  const double rh =
      (st.r_h + cp.r1 * ih * dt) / (1.0 + dt * (cp.r2 + cp.mu_h));
  st.s_h = sh;
  st.i_h = ih;
  st.r_h = rh;
  st.s_v = sv;
  st.i_v = iv;
  st.t += dt;
}

OdeState axpy(const OdeState& st, const OdeDerivative& d, double c) {
  OdeState out = st;
  out.s_h += c * d.s_h;
  out.i_h += c * d.i_h;
  out.r_h += c * d.r_h;
  out.s_v += c * d.s_v;
  out.i_v += c * d.i_v;
  return out;
}

void step_rk4(OdeState& st, const ConstParams& cp, double dt) {
  const OdeDerivative k1 = ode_rhs(st, cp);
  const OdeDerivative k2 = ode_rhs(axpy(st, k1, 0.5 * dt), cp);
  const OdeDerivative k3 = ode_rhs(axpy(st, k2, 0.5 * dt), cp);
  const OdeDerivative k4 = ode_rhs(axpy(st, k3, dt), cp);
  st.s_h += dt / 6.0 * (k1.s_h + 2.0 * k2.s_h + 2.0 * k3.s_h + k4.s_h);
  st.i_h += dt / 6.0 * (k1.i_h + 2.0 * k2.i_h + 2.0 * k3.i_h + k4.i_h);
  st.r_h += dt / 6.0 * (k1.r_h + 2.0 * k2.r_h + 2.0 * k3.r_h + k4.r_h);
  st.s_v += dt / 6.0 * (k1.s_v + 2.0 * k2.s_v + 2.0 * k3.s_v + k4.s_v);
  st.i_v += dt / 6.0 * (k1.i_v + 2.0 * k2.i_v + 2.0 * k3.i_v + k4.i_v);
  st.t += dt;
}

} // namespace

OdeTrajectory ode_run(const ConstParams& cp, const OdeState& init, double dt,
                      double t_end, OdeMethod method, int sample_every) {
  if (!(dt > 0.0) || !(t_end >= dt))
    throw std::invalid_argument("ode_run: need dt > 0 and t_end >= dt");
  const int n_t = static_cast<int>(std::ceil(t_end / dt - 1e-9));
  const int stride = std::max(1, sample_every);

  OdeTrajectory traj;
  OdeState st = init;
  auto record = [&] {
    traj.samples.push_back({st.t, st.s_h, st.i_h, st.r_h, st.s_v, st.i_v});
  };
  record();
  for (int n = 1; n <= n_t; ++n) {
    if (method == OdeMethod::matched_semi_implicit)
      step_matched(st, cp, dt);
    else
      step_rk4(st, cp, dt);
    check_finite(st);
    if (n % stride == 0 || n == n_t) record();
  }
  traj.final_state = st;
  return traj;
}

} // namespace malsim
