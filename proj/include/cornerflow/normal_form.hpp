#ifndef CORNERFLOW_NORMAL_FORM_HPP_
#define CORNERFLOW_NORMAL_FORM_HPP_

#include "cornerflow/expmap.hpp"

namespace cornerflow {

struct NormalFormSpec {
  int n_param = 9;    // Chebyshev-Lobatto nodes in u or theta (incl. endpoints)
  int n_x = 5;        // nodes per x axis
  double x_min = -0.5, x_max = 0.5;
  int n_rho = 33;     // uniform nodes on [0, rho_max], first row is rho = 0
  double rho_max = 0.25;
  double tol = 1e-12;
};

/// Sampled slice metrics of the corner normal form on a (param, x, rho)
/// product grid over the boundary chart V. Stored as hbar = rho^2 h, which
/// stays finite on the corner row; h itself follows by dividing by rho^2.
/// The u = 0 / theta = 0 rows come from the tail endpoint states.
struct NormalFormGrid {
  enum class Form { kU, kTheta };

  Form form = Form::kU;
  int n = 2;
  double theta0 = 0.0;            // theta-form only
  std::vector<double> params;     // ascending; u in [0,1] or theta in [0,theta0]
  std::vector<double> x_nodes;    // shared per axis
  std::vector<double> rho_nodes;  // ascending, rho_nodes[0] == 0
  std::vector<Mat> hbar;          // [((p * xflat + ix) * nrho + ir)], n x n
  double max_cross_residual = 0.0;  // normalized du (dtheta) cross terms
  double max_unit_dev = 0.0;        // du^2 coefficient deviation from u^{-2}

  int x_flat_count() const;
  Vec x_at(int flat) const;
  const Mat& hbar_at(int p, int xflat, int ir) const;
  Mat h_at(int p, int xflat, int ir) const;  // hbar / rho^2 (inf on the corner row)

  void save(std::ostream& os) const;
  static NormalFormGrid load(std::istream& is);
};

/// Slices h_u of the geodesic-gauge form (du^2 + h_u)/u^2 off any boundary
/// graph.
NormalFormGrid build_u_form(const AdmissibleMetric& m, const BoundaryQ& Q,
                            const NormalFormSpec& spec);

/// Constant-angle slices h_theta of (dtheta^2 + h_theta)/sin^2(theta).
/// Requires psi(x, 0) == theta0 to 1e-10; otherwise throws
/// precondition_error pointing at the u-form.
NormalFormGrid build_theta_form(const AdmissibleMetric& m, const BoundaryQ& Q,
                                const NormalFormSpec& spec);

/// Max |d/dtheta hbar| over the corner row (rho = 0) of a theta-form grid;
/// vanishes for the exact normal form. Throws precondition_error on a u-form
/// grid and accuracy_error when node-thinning shifts the value by more than
/// half while it is still above the floor.
double corner_stationarity(const NormalFormGrid& nf, double floor = 1e-7);

/// The u -> 0 limit slice of the u-form on the (x, rho) grid: the induced
/// boundary metric scaled by rho^2 (conformal-compactness factor).
std::vector<Mat> induced_boundary_metric(const AdmissibleMetric& m,
                                         const BoundaryQ& Q,
                                         const NormalFormSpec& spec);

/// The corner angle over x: psi(x, 0).
double fiber_angle_function(const AdmissibleMetric& m, const BoundaryQ& Q,
                            const Vec& x);

/// Barycentric evaluation of the grid's param-interpolant at value `p`
/// for a fixed spatial node; used for the resolution-stability check.
Mat interp_param(const NormalFormGrid& nf, double p, int xflat, int ir);

}  // namespace cornerflow

#endif  // CORNERFLOW_NORMAL_FORM_HPP_
