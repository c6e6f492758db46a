#ifndef CORNERFLOW_FIELDS_HPP_
#define CORNERFLOW_FIELDS_HPP_

#include <functional>

#include "cornerflow/polar.hpp"

namespace cornerflow {

/// Finite-difference configuration: 4th-order central stencils with one
/// Richardson level by default. The base step is scaled per coordinate,
/// proportional to max(rho, rho_floor) in the rho direction so the relative
/// error stays uniform near the blown-up face.
struct FdConfig {
  double base_step = 1e-4;
  double rho_floor = 0.01;
  int richardson_levels = 1;

  double step_theta(double theta) const;
  double step_x() const { return base_step; }
  double step_rho(double rho) const;
};

/// 4th-order central first derivative of a scalar-valued function, with
/// optional Richardson extrapolation (levels from cfg).
double fd_d1(const std::function<double(double)>& f, double t, double h,
             int richardson_levels);

/// 4th-order central second derivative, with optional Richardson level.
double fd_d2(const std::function<double(double)>& f, double t, double h,
             int richardson_levels);

/// One-parameter family of metrics k on the corner slice S.
///
/// eval(theta, rho, x) returns a symmetric positive-definite
/// (n-1)x(n-1) matrix. The family is independent of theta unless
/// theta_dependent is set (the extension case, in which k at rho = 0 must
/// still be theta-independent; checked by the metric wrapper). Derivative
/// evaluators d1/d2 take global coordinate indices (0 = theta, 1..n-1 = x^s,
/// n = rho) and may be empty, in which case finite differences of eval are
/// used.
struct KFamily {
  int dim = 1;  // n-1
  bool theta_dependent = false;
  std::function<Mat(double theta, double rho, const Vec& x)> eval;
  std::function<Mat(int c, double theta, double rho, const Vec& x)> d1;
  std::function<Mat(int c, int d, double theta, double rho, const Vec& x)> d2;

  Mat value(const PolarPoint& p) const;
  Mat deriv1(int c, const PolarPoint& p, const FdConfig& fd) const;
  Mat deriv2(int c, int d, const PolarPoint& p, const FdConfig& fd) const;

  static KFamily identity(int dim);
};

/// Coefficients of the perturbation term in the 0-edge coframe
/// (dtheta/sin, dx/(rho sin), drho/(rho sin)); the assembled metric
/// multiplies this by rho*sin(theta). eval returns a symmetric
/// (n+1)x(n+1) matrix, bounded on the working domain.
struct PerturbationField {
  int dim = 2;  // n+1
  std::function<Mat(const PolarPoint&)> eval;
  std::function<Mat(int c, const PolarPoint&)> d1;
  std::function<Mat(int c, int d, const PolarPoint&)> d2;

  Mat value(const PolarPoint& p) const;
  Mat deriv1(int c, const PolarPoint& p, const FdConfig& fd) const;
  Mat deriv2(int c, int d, const PolarPoint& p, const FdConfig& fd) const;

  bool zero() const { return !eval; }

  static PerturbationField none(int dim);
};

/// Shift a polar point along coordinate c (0 = theta, 1..n-1 = x, n = rho).
PolarPoint shifted(const PolarPoint& p, int c, double delta);

}  // namespace cornerflow

#endif  // CORNERFLOW_FIELDS_HPP_
