#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "doctest.h"

#include "cornerflow/metric.hpp"
#include "cornerflow/ratefit.hpp"
#include "cornerflow/tensor.hpp"

using namespace cornerflow;

namespace {

// Oracle: the model metric pulled back through r = rho sin(theta),
// y = rho cos(theta) from ((dr)^2 + |dx|^2 + (dy)^2)/r^2.
Mat hyperbolic_cartesian_pullback(const PolarPoint& p) {
  const int n = p.n();
  const double s = std::sin(p.theta), c = std::cos(p.theta);
  Mat J = Mat::Zero(n + 1, n + 1);  // rows: (r, x..., y); cols: (theta, x..., rho)
  J(0, 0) = p.rho * c;
  J(0, n) = s;
  for (int i = 1; i < n; ++i) J(i, i) = 1.0;
  J(n, 0) = -p.rho * s;
  J(n, n) = c;
  double r = p.rho * s;
  return Mat(J.transpose() * J / (r * r));
}

PolarPoint random_interior(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vec x(n - 1);
  for (int i = 0; i < n - 1; ++i) x[i] = -0.5 + u(rng);
  return PolarPoint(0.3 + 2.4 * u(rng), x, 0.05 + 1.5 * u(rng));
}

}  // namespace

TEST_CASE("hyperbolic metric closed forms") {
  auto m = hyperbolic_metric(2);
  Mat g1 = m.metric(PolarPoint(M_PI / 2, Vec::Zero(1), 1.0));
  CHECK((g1 - Mat::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-15);

  // csc^2(pi/6) = 4 times [dtheta^2 + (drho^2 + dx^2)/4] -> diag(4, 1, 1)
  Mat g2 = m.metric(PolarPoint(M_PI / 6, Vec::Zero(1), 2.0));
  CHECK(g2(0, 0) == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(g2(1, 1) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(g2(2, 2) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(g2(0, 1)) + std::abs(g2(0, 2)) + std::abs(g2(1, 2)) < 1e-15);
}

TEST_CASE("hyperbolic metric matches the Cartesian pullback oracle") {
  std::mt19937_64 rng(1);
  for (int n : {2, 3}) {
    auto m = hyperbolic_metric(n);
    for (int i = 0; i < 30; ++i) {
      PolarPoint p = random_interior(rng, n);
      Mat got = m.metric(p);
      Mat want = hyperbolic_cartesian_pullback(p);
      CHECK((got - want).cwiseAbs().maxCoeff() <
            1e-12 * want.cwiseAbs().maxCoeff());
    }
  }
}

TEST_CASE("inverse metric") {
  auto m = hyperbolic_metric(2);
  Mat gi = m.metric_inverse(PolarPoint(M_PI / 2, Vec::Zero(1), 1.0));
  CHECK((gi - Mat::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-15);
  Mat gi2 = m.metric_inverse(PolarPoint(M_PI / 6, Vec::Zero(1), 2.0));
  CHECK(gi2(0, 0) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(gi2(1, 1) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(gi2(2, 2) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("random admissible metrics: inverse, symmetry, positivity") {
  std::mt19937_64 rng(2);
  for (int n : {2, 3}) {
    std::vector<AdmissibleMetric> metrics;
    metrics.push_back(perturbed_metric(n, 0.3));
    metrics.push_back(warped_k_metric(n));
    for (auto& m : metrics) {
      for (int i = 0; i < 25; ++i) {
        PolarPoint p = random_interior(rng, n);
        Mat g = m.metric(p);
        CHECK((g - g.transpose()).cwiseAbs().maxCoeff() == 0.0);  // bit-exact
        Mat gi = m.metric_inverse(p);
        Mat eye = Mat::Identity(n + 1, n + 1);
        CHECK((g * gi - eye).cwiseAbs().maxCoeff() < 1e-10);
        Eigen::SelfAdjointEigenSolver<Mat> es(g, Eigen::EigenvaluesOnly);
        CHECK(es.eigenvalues().minCoeff() > 0.0);
      }
    }
  }
}

TEST_CASE("compactified metric: smooth extension and kernel at rho = 0") {
  auto m = hyperbolic_metric(2);
  Mat gb = m.compactified(PolarPoint(M_PI / 2, Vec::Zero(1), 1.0));
  CHECK((gb - Mat::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-15);

  PolarPoint corner(1.2, Vec::Zero(1), 0.0);
  Mat gb0 = m.compactified(corner);
  CHECK(gb0(0, 0) == 0.0);
  CHECK(gb0(0, 1) == 0.0);
  CHECK(gb0(0, 2) == 0.0);
  // x-block at rho = 0 equals k_0
  CHECK(gb0(1, 1) == doctest::Approx(1.0));
  CHECK(gb0(2, 2) == doctest::Approx(1.0));

  auto mw = warped_k_metric(3);
  PolarPoint c3(0.8, Vec::Constant(2, 0.3), 0.0);
  Mat gw = mw.compactified(c3);
  Mat k0 = mw.k().value(c3);
  CHECK((gw.block(1, 1, 2, 2) - k0).cwiseAbs().maxCoeff() < 1e-15);

  // conformal consistency at interior points
  std::mt19937_64 rng(3);
  auto mp = perturbed_metric(2, 0.2);
  for (int i = 0; i < 20; ++i) {
    PolarPoint p = random_interior(rng, 2);
    double r2 = p.r() * p.r();
    Mat a = mp.compactified(p), b = r2 * mp.metric(p);
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12 * a.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("perturbation enters linearly in rho") {
  // l = identity coframe matrix; difference from the model vanishes like rho.
  PerturbationField l;
  l.dim = 3;
  l.eval = [](const PolarPoint&) { return Mat::Identity(3, 3); };
  AdmissibleMetric m(2, KFamily::identity(1), l);
  auto mh = hyperbolic_metric(2);

  std::vector<double> rhos{0.2, 0.1, 0.05, 0.025}, devs;
  for (double rho : rhos) {
    PolarPoint p(M_PI / 2, Vec::Zero(1), rho);
    devs.push_back((m.compactified(p) - mh.compactified(p)).cwiseAbs().maxCoeff() /
                   m.compactified(p).cwiseAbs().maxCoeff());
  }
  RateFit fit = rate_fit(rhos, devs, 0.9);
  CHECK(fit.pass);
  CHECK(fit.slope == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("singular evaluation errors direct to the compactified metric") {
  auto m = hyperbolic_metric(2);
  PolarPoint face(0.0, Vec::Zero(1), 1.0);
  PolarPoint corner(1.0, Vec::Zero(1), 0.0);
  CHECK_THROWS_AS(m.metric(face), singular_evaluation_error);
  CHECK_THROWS_AS(m.metric(corner), singular_evaluation_error);
  CHECK_THROWS_AS(m.metric_inverse(corner), singular_evaluation_error);
  CHECK_NOTHROW(m.compactified(face));
  CHECK_NOTHROW(m.compactified(corner));
}

TEST_CASE("k family positivity is checked at evaluation") {
  KFamily k;
  k.dim = 1;
  k.eval = [](double, double rho, const Vec&) {
    return Mat::Constant(1, 1, 1.0 - 3.0 * rho);
  };
  AdmissibleMetric m(2, k, PerturbationField::none(3));
  CHECK_NOTHROW(m.metric(PolarPoint(1.0, Vec::Zero(1), 0.1)));
  CHECK_THROWS_AS(m.metric(PolarPoint(1.0, Vec::Zero(1), 0.4)), domain_error);
}

TEST_CASE("theta-dependent k requires the extension flag") {
  auto m = theta_extension_metric(2);
  PolarPoint p(1.0, Vec::Zero(1), 0.2);
  CHECK_THROWS_AS(m.metric(p), precondition_error);
  m.allow_theta_dependent_k(true);
  CHECK_NOTHROW(m.metric(p));
  // at rho = 0 the family is theta-independent by construction
  CHECK_NOTHROW(m.compactified(PolarPoint(1.0, Vec::Zero(1), 0.0)));
}

TEST_CASE("field-level finite differences agree with analytic derivatives") {
  auto ma = perturbed_metric(2, 0.3);
  // Strip the derivative evaluators; derivatives then come from stencils.
  KFamily k = ma.k();
  k.d1 = nullptr;
  k.d2 = nullptr;
  PerturbationField l = ma.ell();
  l.d1 = nullptr;
  l.d2 = nullptr;
  AdmissibleMetric mf(2, k, l);
  CHECK(!mf.has_analytic_d1());

  std::mt19937_64 rng(4);
  for (int i = 0; i < 8; ++i) {
    PolarPoint p = random_interior(rng, 2);
    auto da = ma.metric_d1(p);
    auto df = mf.metric_d1(p);
    for (int c = 0; c < 3; ++c) {
      double scale = da[c].cwiseAbs().maxCoeff() + 1.0;
      CHECK((da[c] - df[c]).cwiseAbs().maxCoeff() < 1e-7 * scale);
    }
  }
}

TEST_CASE("g-norm conventions") {
  for (int n : {2, 3}) {
    auto m = hyperbolic_metric(n);
    PolarPoint p(1.1, Vec::Zero(n - 1), 0.7);
    SymTensor g = SymTensor::from_matrix(m.metric(p));
    CHECK(g_norm(g, m, p) == doctest::Approx(std::sqrt(n + 1.0)).epsilon(1e-12));
    SymTensor zero(2, n + 1, SymTensor::Symmetry::kSymmetric);
    CHECK(g_norm(zero, m, p) == 0.0);
  }
}
