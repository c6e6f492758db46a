#include <cmath>
#include <random>

#include "doctest.h"

#include "cornerflow/geometry.hpp"
#include "cornerflow/ratefit.hpp"

using namespace cornerflow;

namespace {

// Independent closed-form table for the model (derived by hand from
// csc^2(theta)[dtheta^2 + (drho^2 + |dx|^2)/rho^2]).
double gamma_closed(int n, const PolarPoint& p, int k, int i, int j) {
  const double cot = std::cos(p.theta) / std::sin(p.theta);
  if (i > j) std::swap(i, j);
  if (k == 0) {
    if (i == 0 && j == 0) return -cot;
    if (i >= 1 && i == j) return cot / (p.rho * p.rho);
    return 0.0;
  }
  if (k == n) {
    if (i == 0 && j == n) return -cot;
    if (i >= 1 && i < n && i == j) return 1.0 / p.rho;
    if (i == n && j == n) return -1.0 / p.rho;
    return 0.0;
  }
  if (i == 0 && j == k) return -cot;
  if (i == k && j == n) return -1.0 / p.rho;
  return 0.0;
}

// Independent curvature route: first-kind assembly from pure finite
// differences of the metric itself (no Christoffel reuse),
// R_ijkl = (d2_jk g_il + d2_il g_jk - d2_jl g_ik - d2_ik g_jl)/2
//          + g^pq (G_jkp G_ilq - G_jlp G_ikq), G_ijk = (d_i g_jk + d_j g_ik - d_k g_ij)/2.
double riemann_fd_oracle(const AdmissibleMetric& m, const PolarPoint& p, int i,
                         int j, int k, int l) {
  const int N = m.dim();
  auto gfun = [&](const PolarPoint& q) { return m.metric(q); };
  const double h = 1e-4;
  auto d1 = [&](int c) {
    return Mat((gfun(shifted(p, c, -2 * h)) - 8.0 * gfun(shifted(p, c, -h)) +
                8.0 * gfun(shifted(p, c, h)) - gfun(shifted(p, c, 2 * h))) /
               (12.0 * h));
  };
  auto d2 = [&](int c, int d) {
    if (c == d)
      return Mat((-gfun(shifted(p, c, -2 * h)) + 16.0 * gfun(shifted(p, c, -h)) -
                  30.0 * gfun(p) + 16.0 * gfun(shifted(p, c, h)) -
                  gfun(shifted(p, c, 2 * h))) /
                 (12.0 * h * h));
    Mat acc = Mat::Zero(N, N);
    const double off[4] = {-2, -1, 1, 2};
    const double w[4] = {1, -8, 8, -1};
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        acc += (w[a] * w[b]) * gfun(shifted(shifted(p, c, off[a] * h), d, off[b] * h));
    return Mat(acc / (144.0 * h * h));
  };
  std::vector<Mat> dg(N);
  for (int c = 0; c < N; ++c) dg[c] = d1(c);
  auto gamma1 = [&](int a, int b, int c) {
    return 0.5 * (dg[a](b, c) + dg[b](a, c) - dg[c](a, b));
  };
  Mat gi = m.metric_inverse(p);
  double r = 0.5 * (d2(j, k)(i, l) + d2(i, l)(j, k) - d2(j, l)(i, k) -
                    d2(i, k)(j, l));
  for (int pp = 0; pp < N; ++pp)
    for (int qq = 0; qq < N; ++qq)
      r += gi(pp, qq) *
           (gamma1(j, k, pp) * gamma1(i, l, qq) - gamma1(j, l, pp) * gamma1(i, k, qq));
  return r;
}

}  // namespace

TEST_CASE("model Christoffels match the closed-form table") {
  for (int n : {2, 3}) {
    auto m = hyperbolic_metric(n);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int s = 0; s < 10; ++s) {
      PolarPoint p(0.3 + 2.4 * u(rng), Vec::Constant(n - 1, u(rng)),
                   0.2 + 1.5 * u(rng));
      SymTensor gam = christoffel(m, p);
      for (int k = 0; k <= n; ++k)
        for (int i = 0; i <= n; ++i)
          for (int j = 0; j <= n; ++j)
            CHECK(gam.at(k, i, j) ==
                  doctest::Approx(gamma_closed(n, p, k, i, j)).epsilon(1e-10).scale(1.0));
    }
    // the two named leading terms
    PolarPoint p(M_PI / 3, Vec::Zero(n - 1), 1.0);
    SymTensor gam = christoffel(m, p);
    CHECK(gam.at(0, 0, 0) == doctest::Approx(-1.0 / std::tan(M_PI / 3)).epsilon(1e-12));
    CHECK(gam.at(0, n, n) == doctest::Approx(1.0 / std::tan(M_PI / 3)).epsilon(1e-12));
  }
}

TEST_CASE("finite-difference Christoffels track analytic ones") {
  auto ma = perturbed_metric(2, 0.3);
  KFamily k = ma.k();
  k.d1 = nullptr;
  k.d2 = nullptr;
  PerturbationField l = ma.ell();
  l.d1 = nullptr;
  l.d2 = nullptr;
  AdmissibleMetric mf(2, k, l);

  PolarPoint p(M_PI / 3, Vec::Constant(1, 0.2), 1.0);
  SymTensor ga = christoffel(ma, p);
  SymTensor gf = christoffel(mf, p);
  double dev = 0.0;
  for (size_t i = 0; i < ga.data().size(); ++i)
    dev = std::max(dev, std::abs(ga.data()[i] - gf.data()[i]));
  CHECK(dev < 1e-7);
}

TEST_CASE("step underflow on the finite-difference path") {
  KFamily k = KFamily::identity(1);
  k.d1 = nullptr;
  k.d2 = nullptr;
  AdmissibleMetric mf(2, k, PerturbationField::none(3));
  CHECK_THROWS_AS(christoffel(mf, PolarPoint(1.0, Vec::Zero(1), 1e-7)),
                  accuracy_error);
  // analytic path has no step to underflow
  auto ma = hyperbolic_metric(2);
  CHECK_NOTHROW(christoffel(ma, PolarPoint(1.0, Vec::Zero(1), 1e-7)));
}

TEST_CASE("curvature tensor: model values and dual-route agreement") {
  auto m = hyperbolic_metric(2);
  PolarPoint p(M_PI / 3, Vec::Constant(1, 0.1), 0.8);
  Mat g = m.metric(p);
  SymTensor R = riemann(m, p);

  // every coordinate 2-plane has sectional curvature -1
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j)
      CHECK(sectional_curvature(R, g, i, j) == doctest::Approx(-1.0).epsilon(1e-8));

  // pinch residual vanishes identically in the model
  CHECK(g_norm(pinch_residual(m, p), m, p) < 1e-8);

  // independent pure-FD route on a warped family
  auto mw = warped_k_metric(2, 0.3);
  PolarPoint q(1.1, Vec::Constant(1, 0.4), 0.6);
  SymTensor Rw = riemann(mw, q);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) {
          double want = riemann_fd_oracle(mw, q, i, j, k, l);
          CHECK(Rw.at(i, j, k, l) == doctest::Approx(want).epsilon(5e-5).scale(10.0));
        }
}

TEST_CASE("curvature symmetries hold bit-exactly, Bianchi to tolerance") {
  auto m = perturbed_metric(2, 0.3);
  PolarPoint p(0.9, Vec::Constant(1, 0.3), 0.3);
  SymTensor R = riemann(m, p);
  double scale = 0.0;
  for (double v : R.data()) scale = std::max(scale, std::abs(v));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) {
          CHECK(R.at(i, j, k, l) == -R.at(j, i, k, l));
          CHECK(R.at(i, j, k, l) == -R.at(i, j, l, k));
          CHECK(R.at(i, j, k, l) == R.at(k, l, i, j));
          double bianchi =
              R.at(i, j, k, l) + R.at(i, k, l, j) + R.at(i, l, j, k);
          CHECK(std::abs(bianchi) < 1e-8 * scale);
        }
}

TEST_CASE("pinch residual decays in rho and in sin(theta)") {
  auto m = perturbed_metric(2, 0.3);
  Vec x = Vec::Constant(1, 0.1);

  std::vector<double> rhos{0.2, 0.1, 0.05, 0.025}, res;
  for (double rho : rhos)
    res.push_back(g_norm(pinch_residual(m, PolarPoint(1.0, x, rho)), m,
                         PolarPoint(1.0, x, rho)));
  RateFit fr = rate_fit(rhos, res, 0.9);
  CHECK(fr.pass);

  std::vector<double> sins{0.4, 0.2, 0.1, 0.05}, res2;
  for (double sv : sins) {
    PolarPoint p(std::asin(sv), x, 0.1);
    res2.push_back(g_norm(pinch_residual(m, p), m, p));
  }
  RateFit fs = rate_fit(sins, res2, 0.9);
  CHECK(fs.pass);
}

TEST_CASE("Hessian of cot(theta): exact in the model, linear residual off it") {
  auto mh = hyperbolic_metric(2);
  auto [E, norm] = hessian_cot_residual(mh, PolarPoint(M_PI / 4, Vec::Zero(1), 0.5));
  CHECK(norm < 1e-8);

  auto mp = perturbed_metric(2, 0.3);
  Vec x = Vec::Constant(1, 0.1);
  std::vector<double> rhos{0.2, 0.1, 0.05, 0.025}, res;
  for (double rho : rhos)
    res.push_back(hessian_cot_residual(mp, PolarPoint(1.0, x, rho)).second);
  RateFit fit = rate_fit(rhos, res, 0.9);
  CHECK(fit.pass);

  // halving rho roughly halves the residual
  double ratio = res[1] / res[2];
  CHECK(ratio == doctest::Approx(2.0).epsilon(0.25));
}
