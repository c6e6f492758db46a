// Python surface: metric evaluation, curvature, the regularized flow, the
// compactified exponential map, normal-form grids and the verification
// suites.

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cornerflow/normal_form.hpp"
#include "cornerflow/suite.hpp"

namespace py = pybind11;
using namespace cornerflow;

namespace {

PolarPoint point_of(const AdmissibleMetric& m, double theta, const Vec& x,
                    double rho) {
  if (static_cast<int>(x.size()) != m.n() - 1)
    throw domain_error("x has wrong length for this metric");
  PolarPoint p;
  p.theta = theta;
  p.x = x;
  p.rho = rho;
  return p;
}

AdmissibleMetric make_metric(const std::string& family, int n, double amplitude,
                             double eta) {
  if (family == "hyperbolic") return hyperbolic_metric(n);
  if (family == "warped-k") return warped_k_metric(n, eta);
  if (family == "perturbed") return perturbed_metric(n, amplitude);
  throw domain_error("unknown metric family '" + family + "'");
}

py::array_t<double> christoffel_array(const AdmissibleMetric& m, double theta,
                                      const Vec& x, double rho) {
  SymTensor g = christoffel(m, point_of(m, theta, x, rho));
  const int N = g.N();
  py::array_t<double> out({N, N, N});
  std::copy(g.data().begin(), g.data().end(), out.mutable_data());
  return out;
}

py::array_t<double> riemann_array(const AdmissibleMetric& m, double theta,
                                  const Vec& x, double rho) {
  SymTensor r = riemann(m, point_of(m, theta, x, rho));
  const int N = r.N();
  py::array_t<double> out({N, N, N, N});
  std::copy(r.data().begin(), r.data().end(), out.mutable_data());
  return out;
}

py::dict trajectory_dict(const AdmissibleMetric& m, const Trajectory& tr) {
  const int n = tr.n;
  const py::ssize_t rows = static_cast<py::ssize_t>(tr.samples.size());
  py::array_t<double> t(rows), theta(rows), rho(rows), xibar0(rows), drift(rows);
  py::array_t<double> x({rows, static_cast<py::ssize_t>(n - 1)});
  py::array_t<double> xibar({rows, static_cast<py::ssize_t>(n)});
  for (py::ssize_t i = 0; i < rows; ++i) {
    const auto& s = tr.samples[i];
    t.mutable_at(i) = s.t;
    theta.mutable_at(i) = s.state.theta;
    rho.mutable_at(i) = s.state.rho;
    xibar0.mutable_at(i) = s.state.xibar0;
    drift.mutable_at(i) = s.norm_drift;
    for (int j = 0; j < n - 1; ++j) x.mutable_at(i, j) = s.state.x[j];
    for (int j = 0; j < n; ++j) xibar.mutable_at(i, j) = s.state.xibar[j];
  }
  py::dict d;
  d["t"] = t;
  d["theta"] = theta;
  d["x"] = x;
  d["rho"] = rho;
  d["xibar0"] = xibar0;
  d["xibar"] = xibar;
  d["norm_drift"] = drift;
  d["reason"] = tr.reason == Trajectory::Termination::kReachedThetaMin
                    ? "theta_min"
                    : "t_end";
  (void)m;
  return d;
}

py::dict grid_dict(const NormalFormGrid& nf) {
  py::dict d;
  d["form"] = nf.form == NormalFormGrid::Form::kTheta ? "theta" : "u";
  d["theta0"] = nf.theta0;
  d["params"] = nf.params;
  d["x_nodes"] = nf.x_nodes;
  d["rho_nodes"] = nf.rho_nodes;
  const py::ssize_t P = static_cast<py::ssize_t>(nf.params.size());
  const py::ssize_t X = nf.x_flat_count();
  const py::ssize_t R = static_cast<py::ssize_t>(nf.rho_nodes.size());
  const py::ssize_t nn = nf.n;
  py::array_t<double> hbar({P, X, R, nn, nn});
  for (py::ssize_t p = 0; p < P; ++p)
    for (py::ssize_t ix = 0; ix < X; ++ix)
      for (py::ssize_t ir = 0; ir < R; ++ir) {
        const Mat& hb = nf.hbar_at(static_cast<int>(p), static_cast<int>(ix),
                                   static_cast<int>(ir));
        for (py::ssize_t a = 0; a < nn; ++a)
          for (py::ssize_t b = 0; b < nn; ++b)
            hbar.mutable_at(p, ix, ir, a, b) = hb(a, b);
      }
  d["hbar"] = hbar;
  d["max_cross_residual"] = nf.max_cross_residual;
  d["max_unit_dev"] = nf.max_unit_dev;
  return d;
}

NormalFormSpec spec_of(int n_param, int n_x, double x_min, double x_max,
                       int n_rho, double rho_max, double tol) {
  NormalFormSpec s;
  s.n_param = n_param;
  s.n_x = n_x;
  s.x_min = x_min;
  s.x_max = x_max;
  s.n_rho = n_rho;
  s.rho_max = rho_max;
  s.tol = tol;
  return s;
}

}  // namespace

PYBIND11_MODULE(_cornerflow, mod) {
  mod.doc() = "corner normal-form numerics for admissible blowup metrics";

  py::register_exception<domain_error>(mod, "DomainError");
  py::register_exception<accuracy_error>(mod, "AccuracyError");
  py::register_exception<integration_error>(mod, "IntegrationError");
  py::register_exception<config_error>(mod, "ConfigError");

  mod.def("polar_from_cartesian", &polar_from_cartesian, py::arg("r"),
          py::arg("y"));
  mod.def("cartesian_from_polar", &cartesian_from_polar, py::arg("theta"),
          py::arg("rho"));
  mod.def("v_of_theta", &v_of_theta);
  mod.def("theta_of_v", &theta_of_v);
  mod.def("fiber_theta", &boundary_fiber_theta, py::arg("theta_q"), py::arg("t"));

  py::class_<AdmissibleMetric>(mod, "Metric")
      .def_property_readonly("n", &AdmissibleMetric::n)
      .def("__repr__", [](const AdmissibleMetric& m) {
        return "<cornerflow.Metric n=" + std::to_string(m.n()) + ">";
      });
  mod.def("make_metric", &make_metric, py::arg("family"), py::arg("n") = 2,
          py::arg("amplitude") = 0.1, py::arg("eta") = 0.3);

  py::class_<BoundaryQ>(mod, "Boundary")
      .def("psi", [](const BoundaryQ& q, const Vec& x, double rho) {
        return q.psi(x, rho);
      });
  mod.def("constant_boundary", &BoundaryQ::constant, py::arg("theta0"));
  mod.def("plane_boundary", &BoundaryQ::plane, py::arg("alpha"));
  mod.def("tilted_boundary", &BoundaryQ::tilted, py::arg("theta0"),
          py::arg("rho_coef"), py::arg("rho_x_coef") = 0.0);
  mod.def("graph_boundary", &BoundaryQ::graph, py::arg("theta0"),
          py::arg("x_coef"), py::arg("rho_coef"));
  mod.def("corner_angle", &fiber_angle_function, py::arg("metric"),
          py::arg("boundary"), py::arg("x"));

  mod.def("metric_at",
          [](const AdmissibleMetric& m, double theta, const Vec& x, double rho) {
            return m.metric(point_of(m, theta, x, rho));
          });
  mod.def("metric_inverse_at",
          [](const AdmissibleMetric& m, double theta, const Vec& x, double rho) {
            return m.metric_inverse(point_of(m, theta, x, rho));
          });
  mod.def("compactified_at",
          [](const AdmissibleMetric& m, double theta, const Vec& x, double rho) {
            return m.compactified(point_of(m, theta, x, rho));
          });
  mod.def("christoffel_at", &christoffel_array);
  mod.def("riemann_at", &riemann_array);
  mod.def("sectional_curvature_at",
          [](const AdmissibleMetric& m, double theta, const Vec& x, double rho,
             int i, int j) {
            PolarPoint p = point_of(m, theta, x, rho);
            return sectional_curvature(riemann(m, p), m.metric(p), i, j);
          });
  mod.def("hessian_cot_residual_at",
          [](const AdmissibleMetric& m, double theta, const Vec& x, double rho) {
            auto [E, norm] = hessian_cot_residual(m, point_of(m, theta, x, rho));
            return py::make_tuple(E.to_matrix(), norm);
          });
  mod.def("pinch_residual_norm_at",
          [](const AdmissibleMetric& m, double theta, const Vec& x, double rho) {
            PolarPoint p = point_of(m, theta, x, rho);
            return g_norm(pinch_residual(m, p), m, p);
          });

  mod.def(
      "integrate_geodesic",
      [](const AdmissibleMetric& m, const BoundaryQ& Q, const Vec& x,
         double rho, double t_end, double tol, double theta_min) {
        PolarPoint q = Q.at(x, rho);
        IntegrateOptions io;
        io.theta_min = theta_min;
        Trajectory tr = integrate(m, initial_state(m, Q, q), t_end, tol, io);
        return trajectory_dict(m, tr);
      },
      py::arg("metric"), py::arg("boundary"), py::arg("x"), py::arg("rho"),
      py::arg("t_end") = 20.0, py::arg("tol") = 1e-10,
      py::arg("theta_min") = 0.0);

  py::class_<ExpMap>(mod, "ExponentialMap")
      .def("shoot",
           [](const ExpMap& em, double tau, const Vec& x, double rho) {
             PolarPoint p = em.shoot(tau, x, rho);
             return py::make_tuple(p.theta, Vec(p.x), p.rho);
           })
      .def("decay_constant", &ExpMap::decay_constant)
      .def("jacobian_det",
           [](const ExpMap& em, double tau, const Vec& x, double rho, double h) {
             return jacobian_det(em, tau, x, rho, h);
           },
           py::arg("tau"), py::arg("x"), py::arg("rho"), py::arg("h") = 1e-4);
  mod.def(
      "make_expmap",
      [](const AdmissibleMetric& m, const BoundaryQ& Q, double tol) {
        ExpMapOptions eo;
        eo.tol = tol;
        return std::make_unique<ExpMap>(m, Q, eo);
      },
      py::arg("metric"), py::arg("boundary"), py::arg("tol") = 1e-11,
      py::keep_alive<0, 1>(), py::keep_alive<0, 2>());

  mod.def(
      "build_theta_form",
      [](const AdmissibleMetric& m, const BoundaryQ& Q, int n_param, int n_x,
         double x_min, double x_max, int n_rho, double rho_max, double tol) {
        return grid_dict(build_theta_form(
            m, Q, spec_of(n_param, n_x, x_min, x_max, n_rho, rho_max, tol)));
      },
      py::arg("metric"), py::arg("boundary"), py::arg("n_param") = 9,
      py::arg("n_x") = 3, py::arg("x_min") = -0.5, py::arg("x_max") = 0.5,
      py::arg("n_rho") = 9, py::arg("rho_max") = 0.25, py::arg("tol") = 1e-12);
  mod.def(
      "build_u_form",
      [](const AdmissibleMetric& m, const BoundaryQ& Q, int n_param, int n_x,
         double x_min, double x_max, int n_rho, double rho_max, double tol) {
        return grid_dict(build_u_form(
            m, Q, spec_of(n_param, n_x, x_min, x_max, n_rho, rho_max, tol)));
      },
      py::arg("metric"), py::arg("boundary"), py::arg("n_param") = 9,
      py::arg("n_x") = 3, py::arg("x_min") = -0.5, py::arg("x_max") = 0.5,
      py::arg("n_rho") = 9, py::arg("rho_max") = 0.25, py::arg("tol") = 1e-12);

  mod.def(
      "injectivity_scan",
      [](const AdmissibleMetric& m, const BoundaryQ& Q, int points, long pairs,
         double rho_min, double rho_max, std::uint64_t seed) {
        ExpMap em(m, Q);
        ScanSpec spec;
        spec.points = points;
        spec.pairs = pairs;
        spec.rho_min = rho_min;
        spec.rho_max = rho_max;
        spec.seed = seed;
        spec.jacobian_grid = 4;
        return injectivity_scan(em, spec).to_json();
      },
      py::arg("metric"), py::arg("boundary"), py::arg("points") = 100,
      py::arg("pairs") = 3000, py::arg("rho_min") = 0.1,
      py::arg("rho_max") = 0.4, py::arg("seed") = 0);

  mod.def("suite_names", &suite_names);
  mod.def(
      "run_suites",
      [](const std::string& family, const std::vector<std::string>& suites,
         std::uint64_t seed, double tol) {
        RunConfig cfg;
        cfg.family = family;
        cfg.suites = suites;
        cfg.seed = seed;
        cfg.tol = tol;
        SuiteReport rep = run_suites(cfg);
        return py::make_tuple(rep.all_pass(), rep.to_json());
      },
      py::arg("family") = "hyperbolic",
      py::arg("suites") = std::vector<std::string>{"metric-invariants"},
      py::arg("seed") = 0, py::arg("tol") = 1e-10);
}
