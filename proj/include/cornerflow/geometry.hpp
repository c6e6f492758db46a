#ifndef CORNERFLOW_GEOMETRY_HPP_
#define CORNERFLOW_GEOMETRY_HPP_

#include "cornerflow/tensor.hpp"

namespace cornerflow {

/// Christoffel symbols of the second kind,
/// Gamma^k_{ij} = g^{kl}(d_i g_lj + d_j g_li - d_l g_ij)/2,
/// stored with at(k, i, j), symmetric in (i, j). Coordinate derivatives of g
/// are analytic when the metric's fields provide them, otherwise finite
/// differences per the metric's FD config. Throws accuracy_error when rho is
/// below ten FD steps on the FD path.
SymTensor christoffel(const AdmissibleMetric& m, const PolarPoint& p);

/// Christoffel symbols plus their coordinate partials dGamma[c](k,i,j).
void christoffel_with_derivs(const AdmissibleMetric& m, const PolarPoint& p,
                             SymTensor& gamma, std::vector<SymTensor>& dgamma);

/// Fully lowered curvature tensor R_{ijkl} with the sign convention in which
/// the model has R = -(g_ik g_jl - g_il g_jk). Antisymmetry in both pairs,
/// pair interchange and the first Bianchi identity are enforced by
/// symmetrized assembly.
SymTensor riemann(const AdmissibleMetric& m, const PolarPoint& p);

/// Sectional curvature of the plane spanned by coordinate directions (i, j).
double sectional_curvature(const SymTensor& R, const Mat& g, int i, int j);

/// Sectional curvature of span(X, Y).
double sectional_curvature(const SymTensor& R, const Mat& g, const Vec& X,
                           const Vec& Y);

/// Pinch residual T = R + (g /\ g); O_g(rho sin theta) for admissible
/// metrics, identically zero for the model.
SymTensor pinch_residual(const AdmissibleMetric& m, const PolarPoint& p);

/// Hessian residual of w = cot(theta): E = hess(w) - w g, returned together
/// with |E|_g. Vanishes identically for the model.
std::pair<SymTensor, double> hessian_cot_residual(const AdmissibleMetric& m,
                                                  const PolarPoint& p);

/// (R(J, V) V)^l = g^{lm} R_{mkij} V^k J^i V^j, the Jacobi operator.
Vec curvature_operator(const SymTensor& R, const Mat& g_inv, const Vec& J,
                       const Vec& V);

}  // namespace cornerflow

#endif  // CORNERFLOW_GEOMETRY_HPP_
