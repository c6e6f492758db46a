#ifndef CORNERFLOW_METRIC_HPP_
#define CORNERFLOW_METRIC_HPP_

#include <vector>

#include "cornerflow/fields.hpp"

namespace cornerflow {

/// An admissible metric in polar blowup coordinates,
///
///   g = csc^2(theta) [ dtheta^2 + (drho^2 + k_rho)/rho^2 ] + (rho sin theta) l,
///
/// held as the frame matrix G in the 0-edge coframe
/// (dtheta/sin, dx^s/(rho sin), drho/(rho sin)):
///
///   G = blockdiag(1, k, 1) + (rho sin theta) l.
///
/// G is smooth and positive definite up to both faces, so every tensor
/// quantity is assembled from G and closed-form scaling factors. The
/// compactified metric is exactly D G D with D = diag(rho, 1, ..., 1), and
/// the inverse frame matrix H = G^{-1} carries all the combinations that stay
/// smooth in the regularized flow.
class AdmissibleMetric {
 public:
  AdmissibleMetric(int n, KFamily k, PerturbationField ell,
                   FdConfig fd = FdConfig{});

  int n() const { return n_; }
  int dim() const { return n_ + 1; }
  const KFamily& k() const { return k_; }
  const PerturbationField& ell() const { return ell_; }
  const FdConfig& fd() const { return fd_; }
  bool hyperbolic() const { return hyperbolic_; }
  void set_hyperbolic_tag(bool v) { hyperbolic_ = v; }
  bool has_analytic_d1() const;
  bool has_analytic_d2() const;

  /// Accept theta-dependent k families (k at rho = 0 must stay
  /// theta-independent; spot-checked on evaluation).
  void allow_theta_dependent_k(bool v) { allow_theta_dependent_k_ = v; }

  double lambda_min() const { return lambda_min_; }
  void set_lambda_min(double v) { lambda_min_ = v; }

  /// Frame matrix G(p); defined for theta in [0,pi), rho >= 0.
  Mat frame(const PolarPoint& p) const;
  /// Partials of G with respect to coordinate c.
  Mat frame_d1(int c, const PolarPoint& p) const;
  Mat frame_d2(int c, int d, const PolarPoint& p) const;
  /// Inverse frame matrix H = G^{-1}.
  Mat frame_inverse(const PolarPoint& p) const;
  /// All first partials of H: dH_c = -H (dG_c) H.
  std::vector<Mat> frame_inverse_d1(const PolarPoint& p, const Mat& H) const;

  /// Coordinate components g_ij at an interior point.
  /// Throws singular_evaluation_error at theta = 0 or rho = 0.
  Mat metric(const PolarPoint& p) const;
  /// Inverse metric g^{ij}; product with metric() is the identity.
  Mat metric_inverse(const PolarPoint& p) const;
  /// Compactified metric gbar = (rho sin theta)^2 g; smooth everywhere,
  /// degenerate along rho = 0 where its kernel is spanned by d/dtheta.
  Mat compactified(const PolarPoint& p) const;
  /// Partials of gbar (analytic in the scaling factors).
  Mat compactified_d1(int c, const PolarPoint& p) const;

  /// First partials of g_ij; requires interior p.
  std::vector<Mat> metric_d1(const PolarPoint& p) const;
  /// Second partials, indexed [c][d] with c <= d mirrored.
  std::vector<std::vector<Mat>> metric_d2(const PolarPoint& p) const;

 private:
  void check_interior(const PolarPoint& p) const;
  Mat k_block(const Mat& ksub) const;  // embed (n-1)x(n-1) into (n+1)x(n+1)

  int n_;
  KFamily k_;
  PerturbationField ell_;
  FdConfig fd_;
  bool allow_theta_dependent_k_ = false;
  bool hyperbolic_ = false;
  double lambda_min_ = 1e-9;
};

/// The model: k = identity, l = 0. Reproduces
/// csc^2(theta)[dtheta^2 + (drho^2 + |dx|^2)/rho^2] exactly.
AdmissibleMetric hyperbolic_metric(int n);

/// k_rho = I + eta*rho*(1 + sin(x^1)/2)*I + small off-diagonal coupling;
/// theta-independent, analytic derivatives.
AdmissibleMetric warped_k_metric(int n, double eta = 0.3);

/// Hyperbolic k plus a trigonometric perturbation field of unit coframe
/// amplitude scaled by `amplitude`; analytic derivatives.
AdmissibleMetric perturbed_metric(int n, double amplitude);

/// Extension-flag example: k depends on theta away from rho = 0.
AdmissibleMetric theta_extension_metric(int n, double eta = 0.2);

}  // namespace cornerflow

#endif  // CORNERFLOW_METRIC_HPP_
