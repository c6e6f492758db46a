#ifndef CORNERFLOW_EXPMAP_HPP_
#define CORNERFLOW_EXPMAP_HPP_

#include <memory>
#include <mutex>
#include <unordered_map>

#include "cornerflow/oracle.hpp"

namespace cornerflow {

struct ExpMapOptions {
  double tol = 1e-11;
  double handoff = 0.1;  // switch to the theta-parametrized tail below this
  double t_max = 40.0;
};

/// The compactified normal exponential map exp(tau, q) off the boundary
/// graph, tau = 1 - e^{-t} in [0, 1]. Each base point q = (x, rho) carries a
/// cached geodesic: the t-flow integrated down to the handoff angle plus the
/// theta-parametrized tail to theta = 0. Values with t beyond the handoff are
/// recovered from the tail by inverting t(theta). The cache is write-once;
/// concurrent readers are fine and the first writer wins.
class ExpMap {
 public:
  ExpMap(const AdmissibleMetric& m, const BoundaryQ& Q,
         ExpMapOptions opts = ExpMapOptions{});

  struct Geodesic {
    FlowState start;
    Trajectory flow;   // to the handoff angle (or t_max)
    TailSegment tail;  // handoff angle down to 0
    double t_handoff = 0.0;
  };

  const AdmissibleMetric& metric() const { return *m_; }
  const BoundaryQ& boundary() const { return *q_; }
  const ExpMapOptions& options() const { return opts_; }

  std::shared_ptr<const Geodesic> geodesic(const Vec& x, double rho) const;

  /// exp(tau, q); tau = 0 returns q exactly.
  PolarPoint shoot(double tau, const Vec& x, double rho) const;
  /// Full rescaled state at tau (tau = 1 gives the tail endpoint).
  FlowState state(double tau, const Vec& x, double rho) const;
  /// d exp / d tau = (velocity) e^{t}; at tau = 1 the limit from the tail.
  Vec dexp_dtau(double tau, const Vec& x, double rho) const;

  /// lim e^t sin(theta) along the geodesic of q (angle-decay constant).
  double decay_constant(const Vec& x, double rho) const;

 private:
  const AdmissibleMetric* m_;
  const BoundaryQ* q_;
  ExpMapOptions opts_;
  mutable std::mutex cache_mutex_;
  mutable std::unordered_map<std::size_t,
                             std::shared_ptr<const Geodesic>> cache_;
};

/// 4th-order finite-difference column d exp / d q^a at fixed tau
/// (a = 1..n-1 for x, n for rho; one-sided when rho sits at the corner row).
Vec dexp_dq(const ExpMap& em, double tau, const Vec& x, double rho, int a,
            double h);

/// Signed determinant of the finite-difference differential of
/// (tau, q) -> exp(tau, q) in polar coordinates. The tau column is analytic
/// (the flow velocity rescaled by e^t), the q columns use 4th-order stencils
/// with step h per coordinate; a step-halving disagreement beyond 10 percent
/// raises accuracy_error.
double jacobian_det(const ExpMap& em, double tau, const Vec& x, double rho,
                    double h, bool verify_steps = true);

/// min over tangential coordinate directions Y of |d exp(Y)|_gbar / |Y|_gbar,
/// measured at (tau, q); positive values witness the differential lower
/// bound.
double differential_lower_bound(const ExpMap& em, double tau, const Vec& x,
                                double rho, double h);

struct ScanSpec {
  int points = 200;        // sampled (tau, q) parameter points
  long pairs = 10000;      // random pairs drawn among them
  double tau_max = 1.0;
  double x_min = -0.5, x_max = 0.5;
  double rho_min = 0.05, rho_max = 0.4;
  double min_param_separation = 0.05;  // in window-scaled parameter space
  std::uint64_t seed = 0;
  int jacobian_grid = 8;   // per-axis nodes for the determinant sweep
  double fd_step = 1e-4;
};

struct ScanReport {
  long pairs = 0;
  double min_image_distance = 0.0;
  double c_measured = 0.0;
  double kappa = 0.0;
  double beta = 0.0;
  double jacobian_min_abs = 0.0;
  bool jacobian_sign_consistent = true;
  bool pass = false;

  std::string to_json() const;
};

/// Samples parameter pairs and reports the minimum image distance among
/// parameter-separated pairs, the measured differential bound, the boundary
/// bending bound kappa, the curvature bound beta and the jacobian sweep.
/// Image distance uses gbar restricted to the (x, rho) components with the
/// angle compared through v(theta).
ScanReport injectivity_scan(const ExpMap& em, const ScanSpec& spec);

/// Distance surrogate between image points per the scan convention.
double image_distance(const AdmissibleMetric& m, const PolarPoint& a,
                      const PolarPoint& b);

/// Jacobi field transported along a trajectory: solves the second-order
/// Jacobi system with the curvature operator of the metric, using the same
/// embedded RK scheme as the flow.
struct JacobiRun {
  std::vector<double> t;
  std::vector<Vec> J, DJ;
  std::vector<double> norm;  // |J(t)|_g
};

JacobiRun jacobi_transport(const AdmissibleMetric& m, const Trajectory& traj,
                           const Vec& J0, const Vec& DJ0, double t_end,
                           double tol = 1e-10);

/// Initial data for the normal variation through nearby geodesics: J(0) a
/// tangential direction of Q at q, DJ(0) the covariant derivative of the
/// unit normal field along it.
std::pair<Vec, Vec> jacobi_initial_data(const AdmissibleMetric& m,
                                        const BoundaryQ& Q, const PolarPoint& q,
                                        int direction);

}  // namespace cornerflow

#endif  // CORNERFLOW_EXPMAP_HPP_
