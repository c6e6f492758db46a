#include "cornerflow/oracle.hpp"

#include <cmath>

namespace cornerflow {

HyperbolicOracle::HyperbolicOracle(double alpha_, double radius_, Vec x0_)
    : alpha(alpha_), theta0(std::atan2(1.0, alpha_)), radius(radius_),
      x0(std::move(x0_)) {
  if (radius <= 0.0) throw domain_error("oracle circle needs radius > 0");
}

double HyperbolicOracle::theta(double t) const {
  return boundary_fiber_theta(theta0, t);
}

double HyperbolicOracle::cot_theta(double t) const {
  // cot(2 atan(v e^{-t})) = (1 - v^2 e^{-2t}) / (2 v e^{-t}).
  double v = v_of_theta(theta0) * std::exp(-t);
  return (1.0 - v * v) / (2.0 * v);
}

FlowState HyperbolicOracle::state(double t) const {
  FlowState s;
  s.theta = theta(t);
  s.x = x0;
  s.rho = radius;
  s.xibar0 = -1.0;
  s.xibar = Vec::Zero(static_cast<int>(x0.size()) + 1);
  return s;
}

std::pair<double, double> HyperbolicOracle::cartesian(double t) const {
  double th = theta(t);
  return {radius * std::sin(th), radius * std::cos(th)};
}

std::pair<double, double> weighted_trig(double eta, double t) {
  double ep = std::exp(t), em = std::exp(-t);
  return {0.5 * (ep + eta * em), 0.5 * (ep - eta * em)};
}

double ComparisonEnvelope::f_minus(double t) const {
  return 0.5 * (w0 + wdot0 - delta) * std::exp(t) +
         0.5 * (w0 - wdot0 - delta) * std::exp(-t) + delta;
}

double ComparisonEnvelope::f_plus(double t) const {
  return 0.5 * (w0 + wdot0 + delta) * std::exp(t) +
         0.5 * (w0 - wdot0 + delta) * std::exp(-t) - delta;
}

double ComparisonEnvelope::fdot_minus(double t) const {
  return 0.5 * (w0 + wdot0 - delta) * std::exp(t) -
         0.5 * (w0 - wdot0 - delta) * std::exp(-t);
}

double ComparisonEnvelope::fdot_plus(double t) const {
  return 0.5 * (w0 + wdot0 + delta) * std::exp(t) -
         0.5 * (w0 - wdot0 + delta) * std::exp(-t);
}

double ComparisonEnvelope::growth_constant() const {
  // From w >= a e^t + b e^{-t} + delta with a > 0: past
  // T = log(2(|b| + delta)/a) the bound w > a e^t / 2 holds, so
  // C = max(2/a, e^T) gives 1 + w^2 >= C^{-2} e^{2t} for all t >= 0.
  double a = leading_coefficient();
  double b = 0.5 * (w0 - wdot0 - delta);
  double T = std::max(0.0, std::log(2.0 * (std::abs(b) + delta + 1e-300) / a));
  return std::max(2.0 / a, std::exp(T));
}

SandwichReport sandwich_check(
    const AdmissibleMetric& m, const Trajectory& traj,
    const std::function<double(const FlowState&)>& residual_sampler,
    int residual_subsample) {
  if (traj.samples.empty()) throw precondition_error("empty trajectory");

  SandwichReport rep;
  ComparisonEnvelope& env = rep.envelope;

  const FlowState& s0 = traj.samples.front().state;
  env.w0 = std::cos(s0.theta) / std::sin(s0.theta);
  // wdot = d/dt cot(theta) = -csc^2(theta) * thetadot.
  double s2 = std::sin(s0.theta) * std::sin(s0.theta);
  env.wdot0 = -flow_velocity(m, s0)[0] / s2;

  env.delta = 0.0;
  const size_t count = traj.samples.size();
  const size_t stride = std::max<size_t>(1, count / residual_subsample);
  for (size_t i = 0; i < count; i += stride)
    env.delta = std::max(env.delta, residual_sampler(traj.samples[i].state));
  env.delta = std::max(env.delta, residual_sampler(traj.samples.back().state));

  if (env.leading_coefficient() <= 0.0)
    throw precondition_error(
        "nonpositive leading comparison coefficient: start lies outside the "
        "working domain");

  const double C = env.growth_constant();
  rep.worst_violation = 0.0;
  for (const auto& smp : traj.samples) {
    double th = smp.state.theta;
    double w = std::cos(th) / std::sin(th);
    double wdot = -flow_velocity(m, smp.state)[0] / (std::sin(th) * std::sin(th));
    // Integration noise enters w = cot(theta) amplified by csc^2(theta),
    // so the comparison slack must carry that factor.
    double slack_scale = 1e-9 * (1.0 + std::abs(w)) +
                         100.0 * traj.tol * (1.0 + w * w);
    double lo = w - env.f_minus(smp.t), hi = env.f_plus(smp.t) - w;
    double dlo = wdot - env.fdot_minus(smp.t), dhi = env.fdot_plus(smp.t) - wdot;
    if (lo < -slack_scale || hi < -slack_scale) rep.value_sandwich = false;
    if (dlo < -slack_scale || dhi < -slack_scale) rep.derivative_sandwich = false;
    rep.worst_violation = std::min({rep.worst_violation, lo, hi, dlo, dhi});
    double floor = std::exp(2.0 * smp.t) / (C * C);
    if (1.0 + w * w < floor * (1.0 - 1e-12)) rep.growth_floor = false;
  }
  return rep;
}

}  // namespace cornerflow
