#ifndef CORNERFLOW_RATEFIT_HPP_
#define CORNERFLOW_RATEFIT_HPP_

#include <vector>

#include "cornerflow/errors.hpp"

namespace cornerflow {

/// Least-squares log-log slope of residual norms against scales, realizing
/// the order-of-vanishing checks. When every residual is below the
/// exactness floor (1e-14) the fit is skipped and the check passes as
/// numerically exact.
struct RateFit {
  std::vector<double> scales;
  std::vector<double> residuals;
  double slope = 0.0;
  double r2 = 0.0;
  double target_slope = 0.0;
  bool exact = false;
  bool pass = false;
};

/// scales must hold at least 4 strictly decreasing positive values;
/// negative residuals (or zeros mixed with non-exact values) are a
/// domain error.
RateFit rate_fit(const std::vector<double>& scales,
                 const std::vector<double>& residuals, double target_slope);

}  // namespace cornerflow

#endif  // CORNERFLOW_RATEFIT_HPP_
