#ifndef CORNERFLOW_BOUNDARY_HPP_
#define CORNERFLOW_BOUNDARY_HPP_

#include "cornerflow/geometry.hpp"

namespace cornerflow {

/// The finite boundary hypersurface as a graph theta = psi(x, rho) over the
/// (x, rho) chart, with range inside (0, pi) so it stays transverse to both
/// the face at infinity and the fiber direction. Derivative evaluators take
/// a tangential index a in {1..n-1 for x^s, n for rho}; finite differences
/// are used when they are absent.
struct BoundaryQ {
  std::function<double(const Vec& x, double rho)> psi;
  std::function<double(int a, const Vec& x, double rho)> dpsi;
  std::function<double(int a, int b, const Vec& x, double rho)> d2psi;
  double theta_lo = 1e-3;
  double theta_hi = M_PI - 1e-3;

  double theta(const Vec& x, double rho) const;
  double dtheta(int a, const Vec& x, double rho, const FdConfig& fd) const;
  double d2theta(int a, int b, const Vec& x, double rho, const FdConfig& fd) const;

  /// The point of Q over chart position (x, rho).
  PolarPoint at(const Vec& x, double rho) const;

  /// True when psi(x, 0) is the same angle for every x (spot check).
  bool constant_corner_angle(int n, double tol = 1e-10) const;

  /// psi == theta0 everywhere.
  static BoundaryQ constant(double theta0);
  /// The upper-half-space plane {x^n = alpha x^0}: constant angle
  /// atan2(1, alpha) in polar coordinates.
  static BoundaryQ plane(double alpha);
  /// psi = theta0 + rho*(c0 + c1*sin(x^1)); constant corner angle theta0.
  static BoundaryQ tilted(double theta0, double c0, double c1 = 0.0);
  /// psi = theta0 + cx*sin(x^1) + cr*rho; the corner angle varies with x
  /// when cx != 0.
  static BoundaryQ graph(double theta0, double cx, double cr);
};

/// Throws precondition_error unless theta(q) = psi(x(q), rho(q)) to 1e-8.
void require_on_boundary(const BoundaryQ& Q, const PolarPoint& q);

/// Inward unit normal of Q at q (vector components in polar coordinates):
/// grad(psi - theta) normalized; satisfies dtheta(nu) < 0 and
/// nu = -sin(theta) d/dtheta + O_g(rho). Requires rho(q) > 0.
Vec unit_normal(const AdmissibleMetric& m, const BoundaryQ& Q, const PolarPoint& q);

/// Second fundamental form data of Q at q.
struct ShapeData {
  Mat second_fundamental;   // K_ab in the tangential frame T_a = d_a + psi_a d_theta
  Mat induced_metric;       // g(T_a, T_b)
  Vec eigenvalues;          // of the shape operator g^{-1} K
  double kappa = 0.0;       // max |eigenvalue|
  Mat compactified_form;    // Kbar with respect to gbar, same frame
};

ShapeData shape_operator(const AdmissibleMetric& m, const BoundaryQ& Q,
                         const PolarPoint& q);

}  // namespace cornerflow

#endif  // CORNERFLOW_BOUNDARY_HPP_
