#include "cornerflow/geometry.hpp"

#include <cmath>

namespace cornerflow {

namespace {

void check_fd_step(const AdmissibleMetric& m, const PolarPoint& p) {
  if (!m.has_analytic_d1() && p.rho < 10.0 * m.fd().step_rho(p.rho))
    throw accuracy_error("rho below ten finite-difference steps");
}

SymTensor assemble_christoffel(const Mat& gi, const std::vector<Mat>& dg, int N) {
  SymTensor gamma(3, N, SymTensor::Symmetry::kLowerPair);
  for (int k = 0; k < N; ++k)
    for (int i = 0; i < N; ++i)
      for (int j = i; j < N; ++j) {
        double acc = 0.0;
        for (int l = 0; l < N; ++l)
          acc += gi(k, l) * (dg[i](l, j) + dg[j](l, i) - dg[l](i, j));
        gamma.at(k, i, j) = 0.5 * acc;
        gamma.at(k, j, i) = gamma.at(k, i, j);
      }
  return gamma;
}

}  // namespace

SymTensor christoffel(const AdmissibleMetric& m, const PolarPoint& p) {
  check_fd_step(m, p);
  const int N = m.dim();
  Mat gi = m.metric_inverse(p);
  std::vector<Mat> dg = m.metric_d1(p);
  return assemble_christoffel(gi, dg, N);
}

void christoffel_with_derivs(const AdmissibleMetric& m, const PolarPoint& p,
                             SymTensor& gamma, std::vector<SymTensor>& dgamma) {
  check_fd_step(m, p);
  const int N = m.dim();
  Mat gi = m.metric_inverse(p);
  std::vector<Mat> dg = m.metric_d1(p);
  auto d2g = m.metric_d2(p);
  gamma = assemble_christoffel(gi, dg, N);

  dgamma.assign(N, SymTensor(3, N, SymTensor::Symmetry::kLowerPair));
  for (int c = 0; c < N; ++c) {
    Mat dgi = -gi * dg[c] * gi;
    for (int k = 0; k < N; ++k)
      for (int i = 0; i < N; ++i)
        for (int j = i; j < N; ++j) {
          double acc = 0.0;
          for (int l = 0; l < N; ++l) {
            acc += dgi(k, l) * (dg[i](l, j) + dg[j](l, i) - dg[l](i, j));
            acc += gi(k, l) * (d2g[c][i](l, j) + d2g[c][j](l, i) - d2g[c][l](i, j));
          }
          dgamma[c].at(k, i, j) = 0.5 * acc;
          dgamma[c].at(k, j, i) = dgamma[c].at(k, i, j);
        }
  }
}

SymTensor riemann(const AdmissibleMetric& m, const PolarPoint& p) {
  const int N = m.dim();
  Mat g = m.metric(p);
  SymTensor gamma(3, N, SymTensor::Symmetry::kLowerPair);
  std::vector<SymTensor> dgamma;
  christoffel_with_derivs(m, p, gamma, dgamma);

  // Rup^m_{jkl} = d_k Gamma^m_{lj} - d_l Gamma^m_{kj}
  //              + Gamma^m_{kp} Gamma^p_{lj} - Gamma^m_{lp} Gamma^p_{kj}.
  SymTensor raw(4, N, SymTensor::Symmetry::kNone);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      for (int k = 0; k < N; ++k)
        for (int l = 0; l < N; ++l) {
          double up = 0.0;
          for (int mm = 0; mm < N; ++mm) {
            double r = dgamma[k].at(mm, l, j) - dgamma[l].at(mm, k, j);
            for (int pp = 0; pp < N; ++pp)
              r += gamma.at(mm, k, pp) * gamma.at(pp, l, j) -
                   gamma.at(mm, l, pp) * gamma.at(pp, k, j);
            up += g(i, mm) * r;
          }
          raw.at(i, j, k, l) = up;
        }

  // Symmetrize over the algebraic curvature symmetries, so the declared
  // symmetries hold bit-exactly.
  SymTensor R(4, N, SymTensor::Symmetry::kRiemann);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      for (int k = 0; k < N; ++k)
        for (int l = 0; l < N; ++l) {
          if (i > j || k > l || (i * N + j) > (k * N + l)) continue;
          double v = (raw.at(i, j, k, l) - raw.at(j, i, k, l) -
                      raw.at(i, j, l, k) + raw.at(j, i, l, k) +
                      raw.at(k, l, i, j) - raw.at(l, k, i, j) -
                      raw.at(k, l, j, i) + raw.at(l, k, j, i)) /
                     8.0;
          R.at(i, j, k, l) = v;
          R.at(j, i, k, l) = -v;
          R.at(i, j, l, k) = -v;
          R.at(j, i, l, k) = v;
          R.at(k, l, i, j) = v;
          R.at(l, k, i, j) = -v;
          R.at(k, l, j, i) = -v;
          R.at(l, k, j, i) = v;
        }
  return R;
}

double sectional_curvature(const SymTensor& R, const Mat& g, int i, int j) {
  double denom = g(i, i) * g(j, j) - g(i, j) * g(i, j);
  return R.at(i, j, i, j) / denom;
}

double sectional_curvature(const SymTensor& R, const Mat& g, const Vec& X,
                           const Vec& Y) {
  const int N = R.N();
  double num = 0.0;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      for (int k = 0; k < N; ++k)
        for (int l = 0; l < N; ++l)
          num += R.at(i, j, k, l) * X[i] * Y[j] * X[k] * Y[l];
  double xx = X.dot(g * X), yy = Y.dot(g * Y), xy = X.dot(g * Y);
  return num / (xx * yy - xy * xy);
}

SymTensor pinch_residual(const AdmissibleMetric& m, const PolarPoint& p) {
  const int N = m.dim();
  Mat g = m.metric(p);
  SymTensor R = riemann(m, p);
  SymTensor T(4, N, SymTensor::Symmetry::kRiemann);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      for (int k = 0; k < N; ++k)
        for (int l = 0; l < N; ++l)
          T.at(i, j, k, l) =
              R.at(i, j, k, l) + (g(i, k) * g(j, l) - g(i, l) * g(j, k));
  return T;
}

std::pair<SymTensor, double> hessian_cot_residual(const AdmissibleMetric& m,
                                                  const PolarPoint& p) {
  const int N = m.dim();
  const double s = std::sin(p.theta);
  const double csc2 = 1.0 / (s * s);
  const double w = std::cos(p.theta) / s;
  Mat g = m.metric(p);
  SymTensor gamma = christoffel(m, p);

  // dw = -csc^2(theta) dtheta; the only nonzero second partial is
  // d^2_theta w = 2 csc^2(theta) cot(theta).
  SymTensor E(2, N, SymTensor::Symmetry::kSymmetric);
  for (int i = 0; i < N; ++i)
    for (int j = i; j < N; ++j) {
      double hess = csc2 * gamma.at(0, i, j);
      if (i == 0 && j == 0) hess += 2.0 * csc2 * w;
      E.at(i, j) = hess - w * g(i, j);
      E.at(j, i) = E.at(i, j);
    }
  return {E, g_norm(E, m, p)};
}

Vec curvature_operator(const SymTensor& R, const Mat& gi, const Vec& J,
                       const Vec& V) {
  const int N = R.N();
  Vec lower = Vec::Zero(N);
  for (int mm = 0; mm < N; ++mm) {
    double acc = 0.0;
    for (int k = 0; k < N; ++k)
      for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j)
          acc += R.at(mm, k, i, j) * V[k] * J[i] * V[j];
    lower[mm] = acc;
  }
  return gi * lower;
}

}  // namespace cornerflow
