#ifndef CORNERFLOW_FLOW_HPP_
#define CORNERFLOW_FLOW_HPP_

#include <iosfwd>
#include <optional>

#include "cornerflow/boundary.hpp"
#include "cornerflow/rk45.hpp"

namespace cornerflow {

/// Rescaled phase-space point: coordinates plus the covector scaled to stay
/// bounded at both faces, xibar_0 = sin(theta) xi_0 and xibar_mu = rho xi_mu
/// (mu = 1..n, the last slot is the rho component).
struct FlowState {
  double theta = 0.0;
  Vec x;
  double rho = 0.0;
  double xibar0 = 0.0;
  Vec xibar;  // length n

  int n() const { return static_cast<int>(x.size()) + 1; }
  PolarPoint point() const;

  Vec pack() const;  // [theta, x, rho, xibar0, xibar], size 2n+2
  static FlowState unpack(const Vec& y, int n);
};

/// Time derivative of the rescaled flow; smooth up to rho = 0 and theta = 0.
FlowState flow_rhs(const AdmissibleMetric& m, const FlowState& s);

/// Coordinate velocity dx^i/dt = g^{ij} xi_j of the state (size n+1).
Vec flow_velocity(const AdmissibleMetric& m, const FlowState& s);

/// g^{ij} xi_i xi_j expressed in the rescaled variables; conserved (= 1 on
/// unit-speed trajectories).
double rescaled_norm(const AdmissibleMetric& m, const FlowState& s);

/// Covector initial data for the normal geodesic off q in Q: the unit
/// conormal of the graph, rescaled. At rho(q) = 0 returns the exact corner
/// fiber data xibar0 = -1, xibar = 0.
FlowState initial_state(const AdmissibleMetric& m, const BoundaryQ& Q,
                        const PolarPoint& q);

/// Exact theta along a corner fiber: v(theta) = v(theta_q) e^{-t}, i.e.
/// theta(t) = 2 atan(tan(theta_q/2) e^{-t}).
double boundary_fiber_theta(double theta_q, double t);

struct TrajectorySample {
  double t = 0.0;
  FlowState state;
  double norm_drift = 0.0;  // |rescaled norm - 1|
};

struct Trajectory {
  enum class Termination { kReachedTEnd, kReachedThetaMin, kTailCompleted };

  int n = 2;
  double tol = 1e-10;
  std::vector<TrajectorySample> samples;  // strictly increasing t
  Rk45Solution ode;
  Termination reason = Termination::kReachedTEnd;

  double t_final() const { return samples.empty() ? 0.0 : samples.back().t; }
  FlowState at(double t) const { return FlowState::unpack(ode.eval(t), n); }
};

struct IntegrateOptions {
  double theta_min = 1e-6;  // early stop; 0 disables
  long max_steps = 2000000;
};

/// Adaptive integration of the regularized flow from s0 to t_end.
/// tol must lie in [1e-12, 1e-4]; norm drift stays below 100*tol.
Trajectory integrate(const AdmissibleMetric& m, const FlowState& s0,
                     double t_end, double tol,
                     const IntegrateOptions& opts = IntegrateOptions{});

/// Trajectory re-indexed by tau = 1 - e^{-t}.
struct TauSample {
  double tau = 0.0;
  FlowState state;
};
std::vector<TauSample> reparam_tau(const Trajectory& traj);

/// Tail of the trajectory integrated in the theta variable down to
/// theta_stop (usually 0): the (x, rho, xibar) system divided by
/// dtheta/dt, which is regular because the denominator tends to -1.
/// Also carries lambda = t + log(theta), whose limit at theta = 0 gives
/// A = lim e^t theta along the trajectory.
struct TailSegment {
  int n = 2;
  double theta_start = 0.0, theta_stop = 0.0;
  Rk45Solution ode;  // y = [x, rho, xibar0, xibar, lambda] over theta
  double t_start = 0.0;       // trajectory time at the handoff point
  double lambda_limit = 0.0;  // lambda at theta -> 0

  FlowState state_at(double theta) const;
  FlowState endpoint() const { return state_at(theta_stop); }
  /// A = lim e^t theta(t); sin(theta) ~ A e^{-t} along the tail.
  double angle_decay_constant() const { return std::exp(lambda_limit); }
  /// t as a function of theta (diverges at theta = 0).
  double t_at(double theta) const;
};

struct TailOptions {
  double handoff_threshold = 0.1;
  double lambda_cutoff = 1e-4;  // switch lambda to its series finish below
  double min_denominator = 0.1;
  double t_start = 0.0;  // trajectory time at the handoff state
};

TailSegment theta_parametrized_tail(const AdmissibleMetric& m, const FlowState& s,
                                    double theta_stop, double tol,
                                    const TailOptions& opts = TailOptions{});

/// Summary quantities used by the verification suites.
struct TrajectoryStats {
  double norm_drift_max = 0.0;
  bool theta_monotone = true;
  double angle_lower = 0.0;   // A1 = inf e^t sin(theta)
  double angle_upper = 0.0;   // A2 = sup e^t sin(theta)
  double rho_lower = 0.0;     // eps = inf rho/rho0
  double rho_upper = 0.0;     // C = sup rho/rho0
  double x_drift = 0.0;       // sup |x - x0| (periodic chart distance)
  double cov_growth = 0.0;    // sup |xibar_mu| / (1 + t)
  double cov0_decay = 0.0;    // sup |xibar0 + 1| e^{t}
  bool q_return = false;      // re-crossed the boundary graph after leaving
};

TrajectoryStats trajectory_stats(const AdmissibleMetric& m, const Trajectory& traj,
                                 const BoundaryQ* Q = nullptr);

/// CSV export: header t,tau,theta,x...,rho,xibar0,xibar...,norm_drift.
void write_trajectory_csv(std::ostream& os, const AdmissibleMetric& m,
                          const Trajectory& traj);

/// Binary export: version byte 1, then little-endian u32 n, u64 rows,
/// followed by the CSV columns as packed f64 rows.
void write_trajectory_binary(std::ostream& os, const AdmissibleMetric& m,
                             const Trajectory& traj);

}  // namespace cornerflow

#endif  // CORNERFLOW_FLOW_HPP_
