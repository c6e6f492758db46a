#include "cornerflow/ratefit.hpp"

#include <cmath>

namespace cornerflow {

RateFit rate_fit(const std::vector<double>& scales,
                 const std::vector<double>& residuals, double target_slope) {
  if (scales.size() < 4) throw domain_error("rate fit needs at least 4 scales");
  if (scales.size() != residuals.size())
    throw domain_error("scales and residuals length mismatch");
  for (size_t i = 0; i + 1 < scales.size(); ++i)
    if (!(scales[i] > scales[i + 1]) || scales[i + 1] <= 0.0)
      throw domain_error("scales must be strictly decreasing and positive");

  RateFit fit;
  fit.scales = scales;
  fit.residuals = residuals;
  fit.target_slope = target_slope;

  constexpr double kExactFloor = 1e-14;
  bool all_exact = true;
  for (double r : residuals) {
    if (r < 0.0) throw domain_error("residuals must be nonnegative");
    if (r >= kExactFloor) all_exact = false;
  }
  if (all_exact) {
    fit.exact = true;
    fit.pass = true;
    return fit;
  }
  for (double r : residuals)
    if (r < kExactFloor)
      throw domain_error("zero residual mixed with finite ones; no log fit");

  const size_t n = residuals.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (size_t i = 0; i < n; ++i) {
    double lx = std::log(scales[i]), ly = std::log(residuals[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    syy += ly * ly;
  }
  double denom = n * sxx - sx * sx;
  fit.slope = (n * sxy - sx * sy) / denom;
  double ss_tot = syy - sy * sy / n;
  double intercept = (sy - fit.slope * sx) / n;
  double ss_res = 0.0;
  for (size_t i = 0; i < n; ++i) {
    double pred = intercept + fit.slope * std::log(scales[i]);
    double d = std::log(residuals[i]) - pred;
    ss_res += d * d;
  }
  fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  fit.pass = fit.slope >= target_slope && fit.r2 >= 0.95;
  return fit;
}

}  // namespace cornerflow
