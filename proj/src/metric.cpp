#include "cornerflow/metric.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace cornerflow {

namespace {

void mirror_lower(Mat& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < i; ++j) m(i, j) = m(j, i);
}

// Weight of coordinate i in the coframe scaling: E_0 = csc(theta),
// E_mu = 1/(rho sin theta); F_ij = E_i E_j = csc^2(theta) rho^{-(w_i+w_j)}.
inline int coord_weight(int i) { return i == 0 ? 0 : 1; }

}  // namespace

AdmissibleMetric::AdmissibleMetric(int n, KFamily k, PerturbationField ell,
                                   FdConfig fd)
    : n_(n), k_(std::move(k)), ell_(std::move(ell)), fd_(fd) {
  if (n < 2) throw domain_error("dimension n must be at least 2");
  if (k_.dim != n - 1) throw domain_error("k family has wrong dimension");
  if (!ell_.zero() && ell_.dim != n + 1)
    throw domain_error("perturbation field has wrong dimension");
}

bool AdmissibleMetric::has_analytic_d1() const {
  return static_cast<bool>(k_.d1) && (ell_.zero() || static_cast<bool>(ell_.d1));
}

bool AdmissibleMetric::has_analytic_d2() const {
  return static_cast<bool>(k_.d2) && (ell_.zero() || static_cast<bool>(ell_.d2));
}

Mat AdmissibleMetric::k_block(const Mat& ksub) const {
  const int N = n_ + 1;
  Mat m = Mat::Zero(N, N);
  m.block(1, 1, n_ - 1, n_ - 1) = ksub;
  return m;
}

Mat AdmissibleMetric::frame(const PolarPoint& p) const {
  if (k_.theta_dependent && !allow_theta_dependent_k_)
    throw precondition_error(
        "theta-dependent k family requires the extension flag");
  const int N = n_ + 1;
  Mat ksub = k_.value(p);
  if (k_.theta_dependent && p.rho == 0.0) {
    // The extension demands k at rho = 0 independent of theta.
    PolarPoint q = p;
    q.theta = 0.5 * p.theta + 0.1;
    if ((k_.value(q) - ksub).cwiseAbs().maxCoeff() > 1e-12)
      throw precondition_error("k at rho = 0 must be theta-independent");
  }
  if (n_ == 2) {
    if (ksub(0, 0) < lambda_min_)
      throw domain_error("k family lost positive definiteness");
  } else {
    Eigen::SelfAdjointEigenSolver<Mat> es(ksub, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < lambda_min_)
      throw domain_error("k family lost positive definiteness");
  }
  Mat G = Mat::Identity(N, N);
  G.block(1, 1, n_ - 1, n_ - 1) = ksub;
  if (!ell_.zero()) G += (p.rho * std::sin(p.theta)) * ell_.value(p);
  mirror_lower(G);
  return G;
}

Mat AdmissibleMetric::frame_d1(int c, const PolarPoint& p) const {
  const double s = std::sin(p.theta);
  Mat dG = k_block(k_.deriv1(c, p, fd_));
  if (!ell_.zero()) {
    double dw = 0.0;  // d/dc of rho*sin(theta)
    if (c == 0) dw = p.rho * std::cos(p.theta);
    if (c == n_) dw = s;
    if (dw != 0.0) dG += dw * ell_.value(p);
    dG += (p.rho * s) * ell_.deriv1(c, p, fd_);
  }
  mirror_lower(dG);
  return dG;
}

Mat AdmissibleMetric::frame_d2(int c, int d, const PolarPoint& p) const {
  const double s = std::sin(p.theta), co = std::cos(p.theta);
  Mat dG = k_block(k_.deriv2(c, d, p, fd_));
  if (!ell_.zero()) {
    auto w1 = [&](int e) {  // first partials of rho*sin(theta)
      if (e == 0) return p.rho * co;
      if (e == n_) return s;
      return 0.0;
    };
    double w2 = 0.0;  // second partial of rho*sin(theta)
    if (c == 0 && d == 0) w2 = -p.rho * s;
    if ((c == 0 && d == n_) || (c == n_ && d == 0)) w2 = co;
    if (w2 != 0.0) dG += w2 * ell_.value(p);
    if (w1(c) != 0.0) dG += w1(c) * ell_.deriv1(d, p, fd_);
    if (w1(d) != 0.0) dG += w1(d) * ell_.deriv1(c, p, fd_);
    dG += (p.rho * s) * ell_.deriv2(c, d, p, fd_);
  }
  mirror_lower(dG);
  return dG;
}

Mat AdmissibleMetric::frame_inverse(const PolarPoint& p) const {
  return frame(p).inverse();
}

std::vector<Mat> AdmissibleMetric::frame_inverse_d1(const PolarPoint& p,
                                                    const Mat& H) const {
  std::vector<Mat> out;
  out.reserve(n_ + 1);
  for (int c = 0; c <= n_; ++c) out.push_back(-H * frame_d1(c, p) * H);
  return out;
}

void AdmissibleMetric::check_interior(const PolarPoint& p) const {
  if (p.theta <= 0.0 || p.rho <= 0.0)
    throw singular_evaluation_error(
        "metric is singular at theta = 0 or rho = 0; use the compactified "
        "evaluation there");
}

Mat AdmissibleMetric::metric(const PolarPoint& p) const {
  check_interior(p);
  const int N = n_ + 1;
  const double csc2 = 1.0 / (std::sin(p.theta) * std::sin(p.theta));
  Mat G = frame(p);
  Mat g(N, N);
  for (int i = 0; i < N; ++i)
    for (int j = i; j < N; ++j) {
      double F = csc2 * std::pow(p.rho, -(coord_weight(i) + coord_weight(j)));
      g(i, j) = F * G(i, j);
    }
  mirror_lower(g);
  return g;
}

Mat AdmissibleMetric::metric_inverse(const PolarPoint& p) const {
  check_interior(p);
  const int N = n_ + 1;
  const double s2 = std::sin(p.theta) * std::sin(p.theta);
  Mat H = frame_inverse(p);
  Mat gi(N, N);
  for (int i = 0; i < N; ++i)
    for (int j = i; j < N; ++j) {
      double F = s2 * std::pow(p.rho, coord_weight(i) + coord_weight(j));
      gi(i, j) = F * H(i, j);
    }
  mirror_lower(gi);
  return gi;
}

Mat AdmissibleMetric::compactified(const PolarPoint& p) const {
  const int N = n_ + 1;
  Mat G = frame(p);
  Mat gb(N, N);
  for (int i = 0; i < N; ++i)
    for (int j = i; j < N; ++j) {
      int w = 2 - coord_weight(i) - coord_weight(j);  // gbar = D G D, D = diag(rho, 1, ..)
      gb(i, j) = std::pow(p.rho, w) * G(i, j);
    }
  mirror_lower(gb);
  return gb;
}

Mat AdmissibleMetric::compactified_d1(int c, const PolarPoint& p) const {
  const int N = n_ + 1;
  Mat G = frame(p);
  Mat dG = frame_d1(c, p);
  Mat d(N, N);
  for (int i = 0; i < N; ++i)
    for (int j = i; j < N; ++j) {
      int w = 2 - coord_weight(i) - coord_weight(j);  // power of rho
      double val = std::pow(p.rho, w) * dG(i, j);
      if (c == n_ && w > 0) val += w * std::pow(p.rho, w - 1) * G(i, j);
      d(i, j) = val;
    }
  mirror_lower(d);
  return d;
}

std::vector<Mat> AdmissibleMetric::metric_d1(const PolarPoint& p) const {
  check_interior(p);
  const int N = n_ + 1;
  const double s = std::sin(p.theta);
  const double cot = std::cos(p.theta) / s;
  const double csc2 = 1.0 / (s * s);
  Mat G = frame(p);
  std::vector<Mat> out;
  out.reserve(N);
  for (int c = 0; c < N; ++c) {
    Mat dG = frame_d1(c, p);
    Mat d(N, N);
    for (int i = 0; i < N; ++i)
      for (int j = i; j < N; ++j) {
        int W = coord_weight(i) + coord_weight(j);
        double F = csc2 * std::pow(p.rho, -W);
        double dF = 0.0;
        if (c == 0) dF = -2.0 * cot * F;
        if (c == n_) dF = -W / p.rho * F;
        d(i, j) = dF * G(i, j) + F * dG(i, j);
      }
    mirror_lower(d);
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<std::vector<Mat>> AdmissibleMetric::metric_d2(const PolarPoint& p) const {
  check_interior(p);
  const int N = n_ + 1;
  const double s = std::sin(p.theta);
  const double cot = std::cos(p.theta) / s;
  const double csc2 = 1.0 / (s * s);
  Mat G = frame(p);
  std::vector<Mat> dG(N);
  for (int c = 0; c < N; ++c) dG[c] = frame_d1(c, p);

  // Scalar factor F_ij = csc^2(theta) rho^{-W}; closed-form partials.
  auto dF_over_F = [&](int c, int W) {
    if (c == 0) return -2.0 * cot;
    if (c == n_) return -static_cast<double>(W) / p.rho;
    return 0.0;
  };
  auto d2F_over_F = [&](int c, int d, int W) -> double {
    const bool ct = (c == 0), dt = (d == 0);
    const bool cr = (c == n_), dr = (d == n_);
    if (ct && dt) return 2.0 * csc2 + 4.0 * cot * cot;
    if ((ct && dr) || (cr && dt)) return 2.0 * W * cot / p.rho;
    if (cr && dr) return W * (W + 1.0) / (p.rho * p.rho);
    return 0.0;
  };

  std::vector<std::vector<Mat>> out(N, std::vector<Mat>(N));
  for (int c = 0; c < N; ++c)
    for (int d = c; d < N; ++d) {
      Mat d2G = frame_d2(c, d, p);
      Mat m(N, N);
      for (int i = 0; i < N; ++i)
        for (int j = i; j < N; ++j) {
          int W = coord_weight(i) + coord_weight(j);
          double F = csc2 * std::pow(p.rho, -W);
          m(i, j) = F * (d2F_over_F(c, d, W) * G(i, j) +
                         dF_over_F(c, W) * dG[d](i, j) +
                         dF_over_F(d, W) * dG[c](i, j) + d2G(i, j));
        }
      mirror_lower(m);
      out[c][d] = m;
      if (d != c) out[d][c] = out[c][d];
    }
  return out;
}

AdmissibleMetric hyperbolic_metric(int n) {
  AdmissibleMetric m(n, KFamily::identity(n - 1), PerturbationField::none(n + 1));
  m.set_hyperbolic_tag(true);
  return m;
}

AdmissibleMetric warped_k_metric(int n, double eta) {
  const int d = n - 1;
  KFamily k;
  k.dim = d;
  k.eval = [d, eta](double, double rho, const Vec& x) {
    Mat m = Mat::Identity(d, d);
    double diag = eta * rho * (1.0 + 0.5 * std::sin(x[0]));
    double off = 0.2 * eta * rho * std::cos(x[0]);
    for (int s = 0; s < d; ++s) {
      m(s, s) += diag;
      for (int t = s + 1; t < d; ++t) {
        m(s, t) += off;
        m(t, s) += off;
      }
    }
    return m;
  };
  k.d1 = [d, eta, n](int c, double, double rho, const Vec& x) {
    Mat m = Mat::Zero(d, d);
    double diag = 0.0, off = 0.0;
    if (c == n) {  // d/drho
      diag = eta * (1.0 + 0.5 * std::sin(x[0]));
      off = 0.2 * eta * std::cos(x[0]);
    } else if (c == 1) {  // d/dx^1
      diag = eta * rho * 0.5 * std::cos(x[0]);
      off = -0.2 * eta * rho * std::sin(x[0]);
    }
    for (int s = 0; s < d; ++s) {
      m(s, s) += diag;
      for (int t = s + 1; t < d; ++t) {
        m(s, t) += off;
        m(t, s) += off;
      }
    }
    return m;
  };
  k.d2 = [d, eta, n](int c, int e, double, double rho, const Vec& x) {
    Mat m = Mat::Zero(d, d);
    double diag = 0.0, off = 0.0;
    if ((c == n && e == 1) || (c == 1 && e == n)) {
      diag = eta * 0.5 * std::cos(x[0]);
      off = -0.2 * eta * std::sin(x[0]);
    } else if (c == 1 && e == 1) {
      diag = -eta * rho * 0.5 * std::sin(x[0]);
      off = -0.2 * eta * rho * std::cos(x[0]);
    }
    for (int s = 0; s < d; ++s) {
      m(s, s) += diag;
      for (int t = s + 1; t < d; ++t) {
        m(s, t) += off;
        m(t, s) += off;
      }
    }
    return m;
  };
  return AdmissibleMetric(n, std::move(k), PerturbationField::none(n + 1));
}

AdmissibleMetric perturbed_metric(int n, double amplitude) {
  const int N = n + 1;
  Mat C(N, N);
  for (int a = 0; a < N; ++a)
    for (int b = 0; b < N; ++b) C(a, b) = (a == b) ? 1.0 : 0.5;
  // Unit coframe amplitude: normalize the coefficient matrix to spectral
  // norm one before applying the requested amplitude.
  Eigen::SelfAdjointEigenSolver<Mat> es(C, Eigen::EigenvaluesOnly);
  C /= es.eigenvalues().cwiseAbs().maxCoeff();

  struct Wave {
    double value, dth, drho, dx;
    double d2thth, d2thrho, d2rhorho, d2xx, d2xth, d2xrho;
  };
  auto envelope = [](const PolarPoint& p) {
    // (1 + sin(theta - 0.4 rho)/2); smooth, bounded, genuinely
    // theta- and rho-dependent.
    double u = p.theta - 0.4 * p.rho;
    Wave w{};
    w.value = 1.0 + 0.5 * std::sin(u);
    w.dth = 0.5 * std::cos(u);
    w.drho = -0.2 * std::cos(u);
    w.d2thth = -0.5 * std::sin(u);
    w.d2thrho = 0.2 * std::sin(u);
    w.d2rhorho = -0.08 * std::sin(u);
    return w;
  };

  PerturbationField l;
  l.dim = N;
  auto phase = [](int a, int b) { return 0.7 * (a + b); };
  l.eval = [N, C, amplitude, envelope, phase](const PolarPoint& p) {
    Wave e = envelope(p);
    Mat m(N, N);
    for (int a = 0; a < N; ++a)
      for (int b = a; b < N; ++b) {
        m(a, b) = amplitude * C(a, b) * std::cos(p.x[0] + phase(a, b)) * e.value;
        m(b, a) = m(a, b);
      }
    return m;
  };
  l.d1 = [N, C, amplitude, envelope, phase, n](int c, const PolarPoint& p) {
    Wave e = envelope(p);
    Mat m(N, N);
    for (int a = 0; a < N; ++a)
      for (int b = a; b < N; ++b) {
        double cosw = std::cos(p.x[0] + phase(a, b));
        double sinw = std::sin(p.x[0] + phase(a, b));
        double val = 0.0;
        if (c == 0) val = cosw * e.dth;
        else if (c == n) val = cosw * e.drho;
        else if (c == 1) val = -sinw * e.value;
        m(a, b) = amplitude * C(a, b) * val;
        m(b, a) = m(a, b);
      }
    return m;
  };
  l.d2 = [N, C, amplitude, envelope, phase, n](int c, int d, const PolarPoint& p) {
    Wave e = envelope(p);
    Mat m(N, N);
    for (int a = 0; a < N; ++a)
      for (int b = a; b < N; ++b) {
        double cosw = std::cos(p.x[0] + phase(a, b));
        double sinw = std::sin(p.x[0] + phase(a, b));
        double val = 0.0;
        auto is_x = [&](int cc) { return cc >= 1 && cc < n; };
        if (c == 0 && d == 0) val = cosw * e.d2thth;
        else if ((c == 0 && d == n) || (c == n && d == 0)) val = cosw * e.d2thrho;
        else if (c == n && d == n) val = cosw * e.d2rhorho;
        else if (is_x(c) && is_x(d)) val = (c == 1 && d == 1) ? -cosw * e.value : 0.0;
        else if ((c == 1 && d == 0) || (c == 0 && d == 1)) val = -sinw * e.dth;
        else if ((c == 1 && d == n) || (c == n && d == 1)) val = -sinw * e.drho;
        m(a, b) = amplitude * C(a, b) * val;
        m(b, a) = m(a, b);
      }
    return m;
  };
  AdmissibleMetric m(n, KFamily::identity(n - 1), std::move(l));
  if (amplitude == 0.0) m.set_hyperbolic_tag(true);
  return m;
}

AdmissibleMetric theta_extension_metric(int n, double eta) {
  const int d = n - 1;
  KFamily k;
  k.dim = d;
  k.theta_dependent = true;
  k.eval = [d, eta](double theta, double rho, const Vec&) {
    return Mat((1.0 + eta * rho * (1.0 + 0.5 * std::sin(theta))) *
               Mat::Identity(d, d));
  };
  k.d1 = [d, eta, n](int c, double theta, double rho, const Vec&) {
    double v = 0.0;
    if (c == 0) v = eta * rho * 0.5 * std::cos(theta);
    if (c == n) v = eta * (1.0 + 0.5 * std::sin(theta));
    return Mat(v * Mat::Identity(d, d));
  };
  k.d2 = [d, eta, n](int c, int e, double theta, double rho, const Vec&) {
    double v = 0.0;
    if (c == 0 && e == 0) v = -eta * rho * 0.5 * std::sin(theta);
    if ((c == 0 && e == n) || (c == n && e == 0)) v = eta * 0.5 * std::cos(theta);
    return Mat(v * Mat::Identity(d, d));
  };
  AdmissibleMetric m(n, std::move(k), PerturbationField::none(n + 1));
  return m;
}

}  // namespace cornerflow
