#include <cmath>

#include "doctest.h"

#include "cornerflow/expmap.hpp"
#include "cornerflow/ratefit.hpp"

using namespace cornerflow;

namespace {

ExpMap model_map() {
  static AdmissibleMetric m = hyperbolic_metric(2);
  static BoundaryQ Q = BoundaryQ::constant(M_PI / 2);
  return ExpMap(m, Q);
}

}  // namespace

TEST_CASE("zero section is the identity") {
  auto m = hyperbolic_metric(2);
  auto Q = BoundaryQ::tilted(1.3, 0.2, 0.1);
  ExpMap em(m, Q);
  for (double rho : {0.05, 0.2, 0.4}) {
    Vec x = Vec::Constant(1, 0.3 * rho);
    PolarPoint img = em.shoot(0.0, x, rho);
    CHECK(img.theta == Q.psi(x, rho));
    CHECK(img.x[0] == x[0]);
    CHECK(img.rho == rho);
  }
}

TEST_CASE("corner fibers: preservation and v-linearity") {
  auto m = hyperbolic_metric(2);
  auto Q = BoundaryQ::constant(1.1);
  ExpMap em(m, Q);
  Vec x = Vec::Constant(1, -0.2);
  for (int i = 0; i <= 20; ++i) {
    double tau = i / 20.0;
    PolarPoint img = em.shoot(tau, x, 0.0);
    CHECK(std::abs(img.rho) < 1e-12);
    CHECK(std::abs(img.x[0] - x[0]) < 1e-12);
    // the paper's linear law in the fiber coordinate
    CHECK(std::abs(v_of_theta(img.theta) - v_of_theta(1.1) * (1.0 - tau)) < 1e-9);
  }
  // explicit closed form of the fiber image
  PolarPoint mid = em.shoot(0.5, x, 0.0);
  CHECK(mid.theta == doctest::Approx(2.0 * std::atan(std::tan(0.55) * 0.5)).epsilon(1e-10));
}

TEST_CASE("model circle endpoints at tau = 1") {
  ExpMap em = model_map();
  for (double rho : {0.5, 1.0, 2.0}) {
    PolarPoint img = em.shoot(1.0, Vec::Constant(1, 0.1), rho);
    CHECK(img.theta == 0.0);
    CHECK(img.rho == doctest::Approx(rho).epsilon(1e-9));
    CHECK(img.x[0] == doctest::Approx(0.1).epsilon(1e-9));
  }
}

TEST_CASE("exp is continuous across the handoff and up to tau = 1") {
  ExpMap em = model_map();
  Vec x = Vec::Zero(1);
  double prev_theta = M_PI / 2;
  for (int i = 1; i <= 50; ++i) {
    double tau = i / 50.0;
    PolarPoint img = em.shoot(tau, x, 1.0);
    CHECK(img.theta < prev_theta);  // theta strictly decreasing in tau
    prev_theta = img.theta;
    // closed form for the model
    double t = tau < 1.0 ? -std::log1p(-tau) : 50.0;
    double want = tau < 1.0 ? boundary_fiber_theta(M_PI / 2, t) : 0.0;
    CHECK(std::abs(img.theta - want) < 1e-8);
    CHECK(std::abs(img.rho - 1.0) < 1e-8);
  }
}

TEST_CASE("jacobian determinant: sign-consistent and step-verified") {
  ExpMap em = model_map();
  double sign = 0.0;
  for (double tau : {0.0, 0.3, 0.7, 1.0}) {
    for (double rho : {0.5, 1.0, 2.0}) {
      double det = jacobian_det(em, tau, Vec::Zero(1), rho, 1e-4);
      CHECK(std::abs(det) > 1e-6);
      if (sign == 0.0) sign = det > 0 ? 1 : -1;
      CHECK(det * sign > 0.0);
    }
  }
  // a step small enough to hit cancellation disagrees with its halving
  auto mp = perturbed_metric(2, 0.3);
  auto Qp = BoundaryQ::constant(1.2);
  ExpMap emp(mp, Qp);
  CHECK_THROWS_AS(jacobian_det(emp, 0.7, Vec::Constant(1, 0.1), 0.3, 1e-15),
                  accuracy_error);
}

TEST_CASE("differential lower bound stays positive through tau = 1") {
  ExpMap em = model_map();
  double c = 1e300;
  for (double tau : {0.0, 0.5, 0.9, 1.0})
    for (double rho : {0.5, 1.0})
      c = std::min(c, differential_lower_bound(em, tau, Vec::Zero(1), rho, 1e-4));
  CHECK(c > 0.05);
}

TEST_CASE("injectivity scan on the model") {
  ExpMap em = model_map();
  ScanSpec spec;
  spec.points = 80;
  spec.pairs = 3000;
  spec.rho_min = 0.3;
  spec.rho_max = 1.5;
  spec.jacobian_grid = 4;
  ScanReport rep = injectivity_scan(em, spec);
  CHECK(rep.pass);
  CHECK(rep.min_image_distance > 1e-4);
  CHECK(rep.c_measured > 0.0);
  CHECK(rep.jacobian_sign_consistent);
  CHECK(rep.kappa == doctest::Approx(0.0).epsilon(1e-8).scale(1.0));
  CHECK(rep.beta == doctest::Approx(0.95).epsilon(1e-6));
  CHECK(rep.to_json().find("\"pass\": true") != std::string::npos);

  // distinct fibers keep distinct transverse coordinates
  PolarPoint a = em.shoot(0.7, Vec::Constant(1, -0.3), 0.0);
  PolarPoint b = em.shoot(0.7, Vec::Constant(1, 0.4), 0.0);
  CHECK(std::abs(a.x[0] - b.x[0]) > 0.69);
  // one fiber, two parameters: distinct images by monotonicity
  PolarPoint c1 = em.shoot(0.2, Vec::Zero(1), 1.0);
  PolarPoint c2 = em.shoot(0.6, Vec::Zero(1), 1.0);
  CHECK(image_distance(em.metric(), c1, c2) > 1e-3);
}

TEST_CASE("shape operator") {
  auto m = hyperbolic_metric(2);
  // theta = pi/2 is totally geodesic
  auto Q = BoundaryQ::constant(M_PI / 2);
  ShapeData sd = shape_operator(m, Q, PolarPoint(M_PI / 2, Vec::Zero(1), 0.5));
  CHECK(sd.kappa < 1e-8);

  // constant angle theta0: eigenvalues -cos(theta0) exactly in the model
  for (double theta0 : {M_PI / 3, 2.0}) {
    auto Qc = BoundaryQ::constant(theta0);
    for (double rho : {0.4, 0.1}) {
      ShapeData s = shape_operator(m, Qc, PolarPoint(theta0, Vec::Zero(1), rho));
      CHECK(s.kappa == doctest::Approx(std::abs(std::cos(theta0))).epsilon(1e-8));
      for (int i = 0; i < s.eigenvalues.size(); ++i)
        CHECK(s.eigenvalues[i] == doctest::Approx(-std::cos(theta0)).epsilon(1e-8));
    }
  }

  // kappa -> |cos theta0| as rho -> 0 for a perturbed metric
  auto mp = perturbed_metric(2, 0.3);
  auto Qc = BoundaryQ::constant(1.0);
  std::vector<double> rhos{0.2, 0.1, 0.05, 0.025}, devs;
  for (double rho : rhos) {
    ShapeData s = shape_operator(mp, Qc, PolarPoint(1.0, Vec::Zero(1), rho));
    devs.push_back(std::abs(s.kappa - std::abs(std::cos(1.0))));
  }
  RateFit fit = rate_fit(rhos, devs, 0.9);
  CHECK(fit.pass);

  // compactified form converges as rho -> 0
  Mat prev;
  double prev_gap = 1e300;
  for (double rho : {0.2, 0.1, 0.05, 0.025}) {
    ShapeData s = shape_operator(mp, Qc, PolarPoint(1.0, Vec::Zero(1), rho));
    CHECK(s.compactified_form.allFinite());
    if (prev.size() > 0) {
      double gap = (s.compactified_form - prev).cwiseAbs().maxCoeff();
      CHECK(gap < prev_gap * 1.01);
      prev_gap = gap;
    }
    prev = s.compactified_form;
  }
}

TEST_CASE("jacobi transport: model field is cosh(t)") {
  auto m = hyperbolic_metric(2);
  auto Q = BoundaryQ::constant(M_PI / 2);
  PolarPoint q(M_PI / 2, Vec::Zero(1), 1.0);
  Trajectory tr = integrate(m, initial_state(m, Q, q), 10.0, 1e-11, {0.0, 4000000});

  auto [J0, DJ0] = jacobi_initial_data(m, Q, q, 1);  // rho direction
  CHECK(DJ0.cwiseAbs().maxCoeff() < 1e-8);  // totally geodesic: shape image 0
  JacobiRun run = jacobi_transport(m, tr, J0, DJ0, 10.0, 1e-10);
  REQUIRE(run.norm.size() > 10);
  for (size_t i = 0; i < run.t.size(); ++i) {
    double want = std::cosh(run.t[i]) * run.norm[0];
    CHECK(std::abs(run.norm[i] - want) < 1e-6 * want);
  }

  // the comparison profile with kappa = 0, beta = 1 is exactly cosh^2
  double A = 0.5, B = 0.5, eta = 1.0;
  for (double t : {0.5, 1.5, 3.0}) {
    auto [ch, sh] = weighted_trig(eta, 2.0 * t);
    double h = A + B * ch;
    CHECK(h == doctest::Approx(std::cosh(t) * std::cosh(t)).epsilon(1e-12));
    (void)sh;
  }

  // floor constant for kappa = 0, beta = 1
  CHECK(std::sqrt(0.5) == doctest::Approx(0.707107).epsilon(1e-6));
  double floor = 0.5 * run.norm[0] * run.norm[0];
  for (double nv : run.norm) CHECK(nv * nv >= floor * (1.0 - 1e-9));
}

TEST_CASE("jacobi field stays normal to the velocity") {
  auto mp = perturbed_metric(2, 0.2);
  auto Q = BoundaryQ::constant(1.2);
  PolarPoint q(1.2, Vec::Constant(1, 0.1), 0.15);
  Trajectory tr = integrate(mp, initial_state(mp, Q, q), 6.0, 1e-11, {0.0, 4000000});
  auto [J0, DJ0] = jacobi_initial_data(mp, Q, q, 1);
  JacobiRun run = jacobi_transport(mp, tr, J0, DJ0, 6.0, 1e-10);
  for (size_t i = 0; i < run.t.size(); ++i) {
    FlowState s = tr.at(run.t[i]);
    Mat g = mp.metric(s.point());
    Vec vel = flow_velocity(mp, s);
    double inner = run.J[i].dot(g * vel);
    double scale = run.norm[i] * std::sqrt(vel.dot(g * vel));
    CHECK(std::abs(inner) < 1e-7 * std::max(1.0, scale));
  }
}
