#include "cornerflow/polar.hpp"

#include <cmath>

namespace cornerflow {

PolarPoint::PolarPoint(double theta_, Vec x_, double rho_)
    : theta(theta_), x(std::move(x_)), rho(rho_) {
  if (theta < 0.0 || theta >= M_PI) throw domain_error("theta outside [0, pi)");
  if (rho < 0.0) throw domain_error("rho must be nonnegative");
}

double PolarPoint::r() const { return rho * std::sin(theta); }
double PolarPoint::y() const { return rho * std::cos(theta); }

std::pair<double, double> polar_from_cartesian(double r, double y) {
  if (r < 0.0) throw domain_error("r must be nonnegative");
  if (r == 0.0 && y == 0.0)
    throw domain_error("(0,0) lies on the blown-up corner; no polar preimage");
  return {std::atan2(r, y), std::hypot(r, y)};
}

std::pair<double, double> cartesian_from_polar(double theta, double rho) {
  return {rho * std::sin(theta), rho * std::cos(theta)};
}

double v_of_theta(double theta) { return std::tan(0.5 * theta); }

double theta_of_v(double v) { return 2.0 * std::atan(v); }

double chart_distance(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    double d = std::remainder(a[i] - b[i], 2.0 * M_PI);
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace cornerflow
