#include "cornerflow/boundary.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace cornerflow {

double BoundaryQ::theta(const Vec& x, double rho) const {
  double th = psi(x, rho);
  if (th < theta_lo || th > theta_hi)
    throw domain_error("psi leaves the transversality window (theta_lo, theta_hi)");
  return th;
}

double BoundaryQ::dtheta(int a, const Vec& x, double rho, const FdConfig& fd) const {
  if (dpsi) return dpsi(a, x, rho);
  const int n = static_cast<int>(x.size()) + 1;
  double h = (a == n) ? fd.step_rho(rho) : fd.step_x();
  auto f = [&](double d) {
    if (a == n) return psi(x, rho + d);
    Vec xx = x;
    xx[a - 1] += d;
    return psi(xx, rho);
  };
  return fd_d1(f, 0.0, h, fd.richardson_levels);
}

double BoundaryQ::d2theta(int a, int b, const Vec& x, double rho,
                          const FdConfig& fd) const {
  if (d2psi) return d2psi(a, b, x, rho);
  const int n = static_cast<int>(x.size()) + 1;
  auto shift = [&](int c, double d, Vec& xx, double& rr) {
    if (c == n) rr += d;
    else xx[c - 1] += d;
  };
  double ha = (a == n) ? fd.step_rho(rho) : fd.step_x();
  if (a == b) {
    auto f = [&](double d) {
      Vec xx = x;
      double rr = rho;
      shift(a, d, xx, rr);
      return psi(xx, rr);
    };
    return fd_d2(f, 0.0, ha, fd.richardson_levels);
  }
  auto f = [&](double d) {
    Vec xx = x;
    double rr = rho;
    shift(a, d, xx, rr);
    return dtheta(b, xx, rr, fd);
  };
  return fd_d1(f, 0.0, ha, fd.richardson_levels);
}

PolarPoint BoundaryQ::at(const Vec& x, double rho) const {
  return PolarPoint(theta(x, rho), x, rho);
}

bool BoundaryQ::constant_corner_angle(int n, double tol) const {
  Vec x0 = Vec::Zero(n - 1);
  double base = psi(x0, 0.0);
  for (int i = 0; i < 7; ++i) {
    Vec x = Vec::Constant(n - 1, -0.9 + 0.3 * i);
    if (std::abs(psi(x, 0.0) - base) > tol) return false;
  }
  return true;
}

BoundaryQ BoundaryQ::constant(double theta0) {
  BoundaryQ q;
  q.psi = [theta0](const Vec&, double) { return theta0; };
  q.dpsi = [](int, const Vec&, double) { return 0.0; };
  q.d2psi = [](int, int, const Vec&, double) { return 0.0; };
  return q;
}

BoundaryQ BoundaryQ::plane(double alpha) {
  // {x^n = alpha x^0} reads cot(theta) = alpha in polar coordinates.
  return constant(std::atan2(1.0, alpha));
}

BoundaryQ BoundaryQ::tilted(double theta0, double c0, double c1) {
  BoundaryQ q;
  q.psi = [=](const Vec& x, double rho) {
    return theta0 + rho * (c0 + c1 * std::sin(x[0]));
  };
  q.dpsi = [=](int a, const Vec& x, double rho) {
    const int n = static_cast<int>(x.size()) + 1;
    if (a == n) return c0 + c1 * std::sin(x[0]);
    if (a == 1) return rho * c1 * std::cos(x[0]);
    return 0.0;
  };
  q.d2psi = [=](int a, int b, const Vec& x, double rho) {
    const int n = static_cast<int>(x.size()) + 1;
    if (a > b) std::swap(a, b);
    if (a == 1 && b == n) return c1 * std::cos(x[0]);
    if (a == 1 && b == 1) return -rho * c1 * std::sin(x[0]);
    return 0.0;
  };
  return q;
}

BoundaryQ BoundaryQ::graph(double theta0, double cx, double cr) {
  BoundaryQ q;
  q.psi = [=](const Vec& x, double rho) {
    return theta0 + cx * std::sin(x[0]) + cr * rho;
  };
  q.dpsi = [=](int a, const Vec& x, double rho) {
    const int n = static_cast<int>(x.size()) + 1;
    (void)rho;
    if (a == n) return cr;
    if (a == 1) return cx * std::cos(x[0]);
    return 0.0;
  };
  q.d2psi = [=](int a, int b, const Vec& x, double) {
    if (a == 1 && b == 1) return -cx * std::sin(x[0]);
    return 0.0;
  };
  return q;
}

void require_on_boundary(const BoundaryQ& Q, const PolarPoint& q) {
  if (std::abs(Q.psi(q.x, q.rho) - q.theta) > 1e-8)
    throw precondition_error("point does not lie on the boundary graph");
}

Vec unit_normal(const AdmissibleMetric& m, const BoundaryQ& Q,
                const PolarPoint& q) {
  require_on_boundary(Q, q);
  if (q.rho <= 0.0)
    throw precondition_error("unit normal requires rho > 0; use the flow's "
                             "corner-fiber initial conditions at rho = 0");
  const int N = m.dim();
  Vec df(N);
  df[0] = -1.0;
  for (int a = 1; a <= m.n(); ++a) df[a] = Q.dtheta(a, q.x, q.rho, m.fd());
  Mat gi = m.metric_inverse(q);
  double len = std::sqrt(df.dot(gi * df));
  return gi * df / len;
}

ShapeData shape_operator(const AdmissibleMetric& m, const BoundaryQ& Q,
                         const PolarPoint& q) {
  require_on_boundary(Q, q);
  if (q.rho <= 0.0) throw precondition_error("shape operator requires rho > 0");
  const int N = m.dim();
  const int n = m.n();

  // Tangential frame columns T_a = d_a + psi_a d_theta, a = 1..n.
  Mat T = Mat::Zero(N, n);
  Vec psi_d(n + 1);
  for (int a = 1; a <= n; ++a) {
    psi_d[a] = Q.dtheta(a, q.x, q.rho, m.fd());
    T(0, a - 1) = psi_d[a];
    T(a, a - 1) = 1.0;
  }

  ShapeData out;
  {
    Mat g = m.metric(q);
    Mat gi = m.metric_inverse(q);
    Vec df(N);
    df[0] = -1.0;
    for (int a = 1; a <= n; ++a) df[a] = psi_d[a];
    Vec xi = df / std::sqrt(df.dot(gi * df));  // unit inward conormal

    SymTensor gamma = christoffel(m, q);
    Mat K(n, n);
    for (int a = 1; a <= n; ++a)
      for (int b = a; b <= n; ++b) {
        // K_ab = xi_k (d_a T_b^k + Gamma^k_ij T_a^i T_b^j); the only
        // second-derivative term is the graph curvature in the theta slot.
        double acc = xi[0] * Q.d2theta(a, b, q.x, q.rho, m.fd());
        for (int kk = 0; kk < N; ++kk) {
          double c = 0.0;
          for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j)
              c += gamma.at(kk, i, j) * T(i, a - 1) * T(j, b - 1);
          acc += xi[kk] * c;
        }
        K(a - 1, b - 1) = acc;
        K(b - 1, a - 1) = acc;
      }
    out.second_fundamental = K;
    out.induced_metric = T.transpose() * g * T;
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(K, out.induced_metric);
    out.eigenvalues = es.eigenvalues();
    out.kappa = out.eigenvalues.cwiseAbs().maxCoeff();
  }

  {
    // Compactified form with respect to gbar (smooth up to rho = 0).
    Mat gb = m.compactified(q);
    Mat gbi = gb.inverse();
    Vec df(N);
    df[0] = -1.0;
    for (int a = 1; a <= n; ++a) df[a] = psi_d[a];
    Vec xib = df / std::sqrt(df.dot(gbi * df));

    // gbar Christoffels of the first kind from analytic partials, raised.
    std::vector<Mat> dgb(N);
    for (int c = 0; c < N; ++c) dgb[c] = m.compactified_d1(c, q);
    Mat Kb(n, n);
    for (int a = 1; a <= n; ++a)
      for (int b = a; b <= n; ++b) {
        double acc = xib[0] * Q.d2theta(a, b, q.x, q.rho, m.fd());
        for (int kk = 0; kk < N; ++kk) {
          double first = 0.0;
          for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j) {
              double gamma_kij = 0.0;
              for (int l = 0; l < N; ++l)
                gamma_kij += gbi(kk, l) *
                             (dgb[i](l, j) + dgb[j](l, i) - dgb[l](i, j));
              first += 0.5 * gamma_kij * T(i, a - 1) * T(j, b - 1);
            }
          acc += xib[kk] * first;
        }
        Kb(a - 1, b - 1) = acc;
        Kb(b - 1, a - 1) = acc;
      }
    out.compactified_form = Kb;
  }
  return out;
}

}  // namespace cornerflow
