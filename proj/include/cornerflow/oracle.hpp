#ifndef CORNERFLOW_ORACLE_HPP_
#define CORNERFLOW_ORACLE_HPP_

#include "cornerflow/flow.hpp"

namespace cornerflow {

/// Exact normal geodesics of the upper-half-space model off the plane
/// {x^n = alpha x^0}: circles of constant radius with the transverse
/// coordinates frozen, unit speed, theta(t) = 2 atan(tan(theta0/2) e^{-t}).
struct HyperbolicOracle {
  double alpha = 0.0;
  double theta0 = M_PI / 2;  // atan2(1, alpha)
  double radius = 1.0;       // rho along the circle
  Vec x0;                    // transverse chart coordinates

  HyperbolicOracle(double alpha_, double radius_, Vec x0_);

  double theta(double t) const;
  double cot_theta(double t) const;
  /// Full rescaled state at time t (xibar0 = -1, xibar = 0 exactly).
  FlowState state(double t) const;
  /// Cartesian (x^0, x^n) position on the circle at time t.
  std::pair<double, double> cartesian(double t) const;
};

/// cosh_eta(t) = (e^t + eta e^{-t})/2, sinh_eta(t) = (e^t - eta e^{-t})/2;
/// they satisfy sinh_eta^2 = cosh_eta^2 - eta.
std::pair<double, double> weighted_trig(double eta, double t);

/// Two-sided comparison data for w = cot(theta) along a trajectory:
/// f_pm(t) = (w0 + w0' +- delta)/2 e^t + (w0 - w0' +- delta)/2 e^{-t} -+ delta,
/// with delta the measured Hessian-residual bound, plus the envelope
/// constant in the exponential growth floor 1 + w^2 >= C^{-2} e^{2t}.
struct ComparisonEnvelope {
  double w0 = 0.0, wdot0 = 0.0, delta = 0.0;

  double f_minus(double t) const;
  double f_plus(double t) const;
  double fdot_minus(double t) const;
  double fdot_plus(double t) const;
  /// Leading e^t coefficient of f_minus; must be positive in the working
  /// domain.
  double leading_coefficient() const { return 0.5 * (w0 + wdot0 - delta); }
  /// The explicit growth-floor constant built from f_minus.
  double growth_constant() const;
};

struct SandwichReport {
  ComparisonEnvelope envelope;
  bool value_sandwich = true;       // f- <= w <= f+ at every sample
  bool derivative_sandwich = true;  // f-' <= w' <= f+'
  bool growth_floor = true;         // 1 + w^2 >= C^-2 e^{2t}
  double worst_violation = 0.0;     // most negative slack seen
};

/// Checks both sandwiches on every sample of the trajectory. The residual
/// sampler returns |hess(cot theta) - cot(theta) g|_g at a state; delta is
/// its supremum over a thinned subsample. Throws precondition_error when the
/// leading coefficient of f_minus is not positive.
SandwichReport sandwich_check(
    const AdmissibleMetric& m, const Trajectory& traj,
    const std::function<double(const FlowState&)>& residual_sampler,
    int residual_subsample = 64);

}  // namespace cornerflow

#endif  // CORNERFLOW_ORACLE_HPP_
