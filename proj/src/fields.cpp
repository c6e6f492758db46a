#include "cornerflow/fields.hpp"

#include <cmath>

namespace cornerflow {

namespace {

// 4-point antisymmetric weights at offsets -2,-1,1,2 (divide by 12h).
constexpr double kD1Off[4] = {-2.0, -1.0, 1.0, 2.0};
constexpr double kD1W[4] = {1.0, -8.0, 8.0, -1.0};

template <typename F, typename V>
V d1_stencil(const F& f, double h) {
  V acc = kD1W[0] * f(kD1Off[0] * h);
  for (int i = 1; i < 4; ++i) acc += kD1W[i] * f(kD1Off[i] * h);
  return acc / (12.0 * h);
}

template <typename F, typename V>
V d2_stencil(const F& f, double h) {
  V acc = -f(-2.0 * h) + 16.0 * f(-h) - 30.0 * f(0.0) + 16.0 * f(h) - f(2.0 * h);
  return acc / (12.0 * h * h);
}

template <typename V, typename Stencil>
V richardson(const Stencil& stencil, double h, int levels) {
  V coarse = stencil(h);
  for (int l = 0; l < levels; ++l) {
    V fine = stencil(h / 2.0);
    coarse = (16.0 * fine - coarse) / 15.0;
    h /= 2.0;
  }
  return coarse;
}

}  // namespace

double FdConfig::step_theta(double theta) const {
  return base_step * std::max(std::sin(theta), rho_floor);
}

double FdConfig::step_rho(double rho) const {
  return base_step * std::max(rho, rho_floor);
}

double fd_d1(const std::function<double(double)>& f, double t, double h,
             int richardson_levels) {
  auto stencil = [&](double hh) {
    return d1_stencil<std::function<double(double)>, double>(
        [&](double d) { return f(t + d); }, hh);
  };
  return richardson<double>(stencil, h, richardson_levels);
}

double fd_d2(const std::function<double(double)>& f, double t, double h,
             int richardson_levels) {
  auto stencil = [&](double hh) {
    return d2_stencil<std::function<double(double)>, double>(
        [&](double d) { return f(t + d); }, hh);
  };
  return richardson<double>(stencil, h, richardson_levels);
}

PolarPoint shifted(const PolarPoint& p, int c, double delta) {
  PolarPoint q;  // bypass range validation; FD probes may step past a face
  q.theta = p.theta;
  q.x = p.x;
  q.rho = p.rho;
  const int n = p.n();
  if (c == 0)
    q.theta += delta;
  else if (c == n)
    q.rho += delta;
  else
    q.x[c - 1] += delta;
  return q;
}

namespace {

double coord_step(const FdConfig& fd, const PolarPoint& p, int c) {
  const int n = p.n();
  if (c == 0) return fd.step_theta(p.theta);
  if (c == n) return fd.step_rho(p.rho);
  return fd.step_x();
}

template <typename EvalFn>
Mat matrix_fd_d1(const EvalFn& eval, const PolarPoint& p, int c,
                 const FdConfig& fd) {
  const double h = coord_step(fd, p, c);
  auto stencil = [&](double hh) {
    return d1_stencil<std::function<Mat(double)>, Mat>(
        [&](double d) { return eval(shifted(p, c, d)); }, hh);
  };
  return richardson<Mat>(stencil, h, fd.richardson_levels);
}

template <typename EvalFn>
Mat matrix_fd_d2(const EvalFn& eval, const PolarPoint& p, int c, int d,
                 const FdConfig& fd) {
  const double hc = coord_step(fd, p, c);
  if (c == d) {
    auto stencil = [&](double hh) {
      return d2_stencil<std::function<Mat(double)>, Mat>(
          [&](double dd) { return eval(shifted(p, c, dd)); }, hh);
    };
    return richardson<Mat>(stencil, hc, fd.richardson_levels);
  }
  const double hd = coord_step(fd, p, d);
  auto stencil = [&](double scale) {
    Mat acc;
    bool first = true;
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) {
        PolarPoint q = shifted(shifted(p, c, kD1Off[i] * hc * scale), d,
                               kD1Off[j] * hd * scale);
        Mat term = (kD1W[i] * kD1W[j]) * eval(q);
        if (first) {
          acc = term;
          first = false;
        } else {
          acc += term;
        }
      }
    }
    return Mat(acc / (144.0 * hc * hd * scale * scale));
  };
  return richardson<Mat>(stencil, 1.0, fd.richardson_levels);
}

}  // namespace

Mat KFamily::value(const PolarPoint& p) const {
  return eval(theta_dependent ? p.theta : 0.0, p.rho, p.x);
}

Mat KFamily::deriv1(int c, const PolarPoint& p, const FdConfig& fd) const {
  if (!theta_dependent && c == 0) return Mat::Zero(dim, dim);
  if (d1) return d1(c, theta_dependent ? p.theta : 0.0, p.rho, p.x);
  return matrix_fd_d1([this](const PolarPoint& q) { return value(q); }, p, c, fd);
}

Mat KFamily::deriv2(int c, int d, const PolarPoint& p, const FdConfig& fd) const {
  if (!theta_dependent && (c == 0 || d == 0)) return Mat::Zero(dim, dim);
  if (d2) return d2(c, d, theta_dependent ? p.theta : 0.0, p.rho, p.x);
  return matrix_fd_d2([this](const PolarPoint& q) { return value(q); }, p, c, d, fd);
}

KFamily KFamily::identity(int dim) {
  KFamily k;
  k.dim = dim;
  k.eval = [dim](double, double, const Vec&) { return Mat::Identity(dim, dim); };
  k.d1 = [dim](int, double, double, const Vec&) { return Mat::Zero(dim, dim); };
  k.d2 = [dim](int, int, double, double, const Vec&) { return Mat::Zero(dim, dim); };
  return k;
}

Mat PerturbationField::value(const PolarPoint& p) const {
  if (!eval) return Mat::Zero(dim, dim);
  return eval(p);
}

Mat PerturbationField::deriv1(int c, const PolarPoint& p, const FdConfig& fd) const {
  if (!eval) return Mat::Zero(dim, dim);
  if (d1) return d1(c, p);
  return matrix_fd_d1([this](const PolarPoint& q) { return eval(q); }, p, c, fd);
}

Mat PerturbationField::deriv2(int c, int d, const PolarPoint& p,
                              const FdConfig& fd) const {
  if (!eval) return Mat::Zero(dim, dim);
  if (d2) return d2(c, d, p);
  return matrix_fd_d2([this](const PolarPoint& q) { return eval(q); }, p, c, d, fd);
}

PerturbationField PerturbationField::none(int dim) {
  PerturbationField l;
  l.dim = dim;
  return l;
}

}  // namespace cornerflow
