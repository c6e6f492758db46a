#ifndef CORNERFLOW_POLAR_HPP_
#define CORNERFLOW_POLAR_HPP_

#include <Eigen/Core>

#include "cornerflow/errors.hpp"

namespace cornerflow {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// A point of the blown-up space in polar coordinates.
///
/// Coordinate index convention used throughout: index 0 is theta, indices
/// 1..n-1 are the chart coordinates x^s on the corner slice, index n is rho.
/// theta in [0, pi), rho >= 0; theta = 0 is the face at infinity, rho = 0 the
/// blown-up face.
struct PolarPoint {
  double theta = 0.0;
  Vec x;        // length n-1, periodic chart (period 2*pi per axis)
  double rho = 0.0;

  PolarPoint() = default;
  PolarPoint(double theta_, Vec x_, double rho_);

  int n() const { return static_cast<int>(x.size()) + 1; }  // dim X = n+1
  bool interior() const { return theta > 0.0 && rho > 0.0; }

  /// r = rho*sin(theta), the geodesic defining function of the base space.
  double r() const;
  /// y = rho*cos(theta).
  double y() const;
};

/// (r, y) -> (theta, rho) with rho = hypot(r, y), theta = atan2(r, y).
/// Throws domain_error at the blown-up origin (0, 0) and for r < 0.
std::pair<double, double> polar_from_cartesian(double r, double y);

/// Inverse of polar_from_cartesian.
std::pair<double, double> cartesian_from_polar(double theta, double rho);

/// v(theta) = csc(theta) - cot(theta) = tan(theta/2), the fiber coordinate
/// in which the boundary flow is linear. Monotone (0,pi) -> (0,inf),
/// extended continuously with v(0) = 0.
double v_of_theta(double theta);

/// Inverse of v_of_theta: theta = 2*atan(v).
double theta_of_v(double v);

/// Flat periodic distance on the chart of S (period 2*pi per axis).
double chart_distance(const Vec& a, const Vec& b);

}  // namespace cornerflow

#endif  // CORNERFLOW_POLAR_HPP_
