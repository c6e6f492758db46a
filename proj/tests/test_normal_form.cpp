#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "doctest.h"

#include "cornerflow/normal_form.hpp"

using namespace cornerflow;

namespace {

NormalFormSpec small_spec() {
  NormalFormSpec s;
  s.n_param = 7;
  s.n_x = 3;
  s.n_rho = 7;
  s.rho_max = 0.25;
  s.tol = 1e-12;
  return s;
}

}  // namespace

TEST_CASE("model theta-form slices are the flat conformally compact metric") {
  auto m = hyperbolic_metric(2);
  auto Q = BoundaryQ::constant(M_PI / 2);
  NormalFormGrid nf = build_theta_form(m, Q, small_spec());

  CHECK(nf.theta0 == doctest::Approx(M_PI / 2));
  CHECK(nf.params.front() == 0.0);
  CHECK(nf.params.back() == doctest::Approx(M_PI / 2));
  REQUIRE(nf.rho_nodes.front() == 0.0);

  // h_theta = (drho^2 + dx^2)/rho^2 for every slice: hbar = identity.
  for (const Mat& hb : nf.hbar)
    CHECK((hb - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-7);

  CHECK(nf.max_cross_residual < 1e-8);
  CHECK(nf.max_unit_dev < 1e-8);

  // interior h recovers the 1/rho^2 scaling
  Mat h = nf.h_at(3, 1, 2);
  double rho = nf.rho_nodes[2];
  CHECK(h(0, 0) == doctest::Approx(1.0 / (rho * rho)).epsilon(1e-6));
}

TEST_CASE("model u-form slices carry the quarter-factor family") {
  auto m = hyperbolic_metric(2);
  auto Q = BoundaryQ::constant(M_PI / 2);
  NormalFormGrid nf = build_u_form(m, Q, small_spec());

  // h_u = ((1 + u^2)/2)^2 (drho^2 + dx^2)/rho^2: derived by substituting
  // u = tan(theta/2) into the model metric; the u = 1 slice is the induced
  // metric and the u = 0 slice has the quarter factor.
  for (size_t p = 0; p < nf.params.size(); ++p) {
    double u = nf.params[p];
    double f = 0.25 * (1.0 + u * u) * (1.0 + u * u);
    for (int ix = 0; ix < nf.x_flat_count(); ++ix)
      for (size_t ir = 0; ir < nf.rho_nodes.size(); ++ir) {
        const Mat& hb = nf.hbar_at(static_cast<int>(p), ix, static_cast<int>(ir));
        CHECK((hb - f * Mat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-7);
      }
  }
  CHECK(nf.max_cross_residual < 1e-8);
  CHECK(nf.max_unit_dev < 1e-8);
}

TEST_CASE("endpoint slices") {
  auto m = hyperbolic_metric(2);
  auto Q = BoundaryQ::constant(M_PI / 2);
  NormalFormSpec spec = small_spec();
  NormalFormGrid nf = build_u_form(m, Q, spec);
  const int P = static_cast<int>(nf.params.size());

  // u = 1 slice equals the induced boundary-graph metric (times rho^2).
  for (int ix = 0; ix < nf.x_flat_count(); ++ix)
    for (size_t ir = 1; ir < nf.rho_nodes.size(); ++ir) {
      double rho = nf.rho_nodes[ir];
      Mat induced = shape_operator(m, Q, Q.at(nf.x_at(ix), rho)).induced_metric;
      Mat want = rho * rho * induced;
      CHECK((nf.hbar_at(P - 1, ix, static_cast<int>(ir)) - want)
                .cwiseAbs()
                .maxCoeff() < 1e-9 * want.cwiseAbs().maxCoeff());
    }

  // u = 0 slice: the induced boundary metric with its conformal factor,
  // h0 = (drho^2 + dx^2)/(4 rho^2) for the theta0 = pi/2 model.
  std::vector<Mat> h0 = induced_boundary_metric(m, Q, spec);
  for (const Mat& hb : h0)
    CHECK((hb - 0.25 * Mat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-7);

  // starting the form at another constant angle rescales the boundary
  // representative conformally: hbar0 = I/(2 v(theta0))^2, constant in x.
  auto Q2 = BoundaryQ::constant(1.1);
  std::vector<Mat> h02 = induced_boundary_metric(m, Q2, spec);
  double v = v_of_theta(1.1);
  for (const Mat& hb : h02)
    CHECK((hb - Mat::Identity(2, 2) / (4.0 * v * v)).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("theta-form rejects non-constant corner angles") {
  auto m = hyperbolic_metric(2);
  BoundaryQ wobble;
  wobble.psi = [](const Vec& x, double) { return 1.3 + 0.1 * std::sin(x[0]); };
  CHECK_THROWS_AS(build_theta_form(m, wobble, small_spec()), precondition_error);
  // ... while a rho-tilted boundary with a constant corner angle is fine
  auto Qt = BoundaryQ::tilted(1.3, 0.15, 0.1);
  CHECK_NOTHROW(build_theta_form(m, Qt, [] {
    NormalFormSpec s;
    s.n_param = 5;
    s.n_x = 2;
    s.n_rho = 4;
    s.rho_max = 0.2;
    return s;
  }()));
}

TEST_CASE("AH normalization of theta slices at the corner row") {
  auto mp = perturbed_metric(2, 0.3);
  auto Q = BoundaryQ::constant(1.2);
  NormalFormGrid nf = build_theta_form(mp, Q, small_spec());
  for (size_t p = 0; p < nf.params.size(); ++p)
    for (int ix = 0; ix < nf.x_flat_count(); ++ix) {
      Mat hb = nf.hbar_at(static_cast<int>(p), ix, 0);
      CHECK(std::abs(hb.inverse()(1, 1) - 1.0) < 1e-6);
    }
}

TEST_CASE("corner stationarity") {
  auto m = hyperbolic_metric(2);
  auto Q = BoundaryQ::constant(M_PI / 2);
  NormalFormGrid nf = build_theta_form(m, Q, small_spec());
  CHECK(corner_stationarity(nf) < 1e-8);

  auto mp = perturbed_metric(2, 0.3);
  auto Qc = BoundaryQ::constant(1.2);
  NormalFormSpec spec = small_spec();
  spec.n_param = 11;
  NormalFormGrid nfp = build_theta_form(mp, Qc, spec);
  CHECK(corner_stationarity(nfp) < 1e-5);

  NormalFormGrid uf = build_u_form(m, Q, small_spec());
  CHECK_THROWS_AS(corner_stationarity(uf), precondition_error);
}

TEST_CASE("corner rows carry the slice family k0") {
  // A k-family with genuine x-dependence at rho = 0. On the corner row the
  // slice metric must reduce to blockdiag(k0(x), 1): the fiber flow freezes
  // x, the corner ratio d rho_im / d rho_q is exactly 1 by the variation
  // argument, and the conformal weight is 1 on the fiber.
  KFamily k;
  k.dim = 1;
  k.eval = [](double, double rho, const Vec& x) {
    return Mat::Constant(1, 1, 1.0 + 0.3 * std::sin(x[0]) + 0.2 * rho);
  };
  AdmissibleMetric m(2, k, PerturbationField::none(3));
  auto Q = BoundaryQ::constant(1.2);
  NormalFormSpec spec;
  spec.n_param = 5;
  spec.n_x = 3;
  spec.n_rho = 4;
  spec.rho_max = 0.2;
  spec.tol = 1e-11;
  NormalFormGrid nf = build_theta_form(m, Q, spec);
  for (size_t p = 0; p < nf.params.size(); ++p)
    for (int ix = 0; ix < nf.x_flat_count(); ++ix) {
      double k0 = 1.0 + 0.3 * std::sin(nf.x_at(ix)[0]);
      const Mat& hb = nf.hbar_at(static_cast<int>(p), ix, 0);
      CHECK(hb(0, 0) == doctest::Approx(k0).epsilon(1e-6));
      CHECK(hb(1, 1) == doctest::Approx(1.0).epsilon(1e-6));
      CHECK(std::abs(hb(0, 1)) < 1e-6);
    }
  CHECK(corner_stationarity(nf) < 1e-5);
}

TEST_CASE("fiber angle function") {
  auto m = hyperbolic_metric(2);
  CHECK(fiber_angle_function(m, BoundaryQ::constant(M_PI / 2), Vec::Zero(1)) ==
        doctest::Approx(M_PI / 2));
  auto Qt = BoundaryQ::tilted(M_PI / 2, 0.1, 0.1);
  CHECK(fiber_angle_function(m, Qt, Vec::Constant(1, 0.7)) ==
        doctest::Approx(M_PI / 2));
  for (double alpha : {0.0, 1.0, -0.6})
    CHECK(fiber_angle_function(m, BoundaryQ::plane(alpha), Vec::Zero(1)) ==
          doctest::Approx(std::atan2(1.0, alpha)));
}

TEST_CASE("grid files reload bit-exactly") {
  auto m = perturbed_metric(2, 0.1);
  auto Q = BoundaryQ::constant(1.2);
  NormalFormSpec spec;
  spec.n_param = 5;
  spec.n_x = 2;
  spec.n_rho = 4;
  spec.rho_max = 0.2;
  NormalFormGrid nf = build_theta_form(m, Q, spec);

  std::ostringstream os;
  nf.save(os);
  std::string blob = os.str();

  std::istringstream is(blob);
  NormalFormGrid back = NormalFormGrid::load(is);
  REQUIRE(back.hbar.size() == nf.hbar.size());
  for (size_t i = 0; i < nf.hbar.size(); ++i)
    CHECK((back.hbar[i] - nf.hbar[i]).cwiseAbs().maxCoeff() == 0.0);

  std::ostringstream os2;
  back.save(os2);
  CHECK(os2.str() == blob);  // byte-identical re-emission
}

TEST_CASE("two parameter resolutions agree after interpolation") {
  auto m = perturbed_metric(2, 0.1);
  auto Q = BoundaryQ::constant(1.2);
  NormalFormSpec coarse = small_spec();
  coarse.n_x = 2;
  coarse.n_rho = 5;
  NormalFormSpec fine = coarse;
  fine.n_param = 2 * coarse.n_param - 1;
  NormalFormGrid a = build_theta_form(m, Q, coarse);
  NormalFormGrid b = build_theta_form(m, Q, fine);
  double dev = 0.0;
  for (size_t p = 0; p < a.params.size(); ++p)
    for (int ix = 0; ix < a.x_flat_count(); ++ix)
      for (size_t ir = 0; ir < a.rho_nodes.size(); ++ir) {
        Mat want = interp_param(b, a.params[p], ix, static_cast<int>(ir));
        dev = std::max(dev, (a.hbar_at(static_cast<int>(p), ix,
                                       static_cast<int>(ir)) -
                             want)
                                .cwiseAbs()
                                .maxCoeff());
      }
  CHECK(dev < 1e-6);
}
