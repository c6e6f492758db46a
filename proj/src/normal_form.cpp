#include "cornerflow/normal_form.hpp"

#include "cornerflow/parallel.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace cornerflow {

namespace {

std::vector<double> lobatto_nodes(double lo, double hi, int count) {
  std::vector<double> nodes(count);
  for (int j = 0; j < count; ++j)
    nodes[j] = lo + (hi - lo) * 0.5 * (1.0 - std::cos(M_PI * j / (count - 1)));
  nodes.front() = lo;
  nodes.back() = hi;
  return nodes;
}

// Fornberg weights for the m-th derivative at z on arbitrary nodes.
std::vector<double> fornberg_weights(double z, const std::vector<double>& x,
                                     int m) {
  const int nd = static_cast<int>(x.size()) - 1;
  std::vector<std::vector<double>> c(nd + 1, std::vector<double>(m + 1, 0.0));
  double c1 = 1.0, c4 = x[0] - z;
  c[0][0] = 1.0;
  for (int i = 1; i <= nd; ++i) {
    int mn = std::min(i, m);
    double c2 = 1.0, c5 = c4;
    c4 = x[i] - z;
    for (int j = 0; j < i; ++j) {
      double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k)
          c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k)
        c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(nd + 1);
  for (int i = 0; i <= nd; ++i) w[i] = c[i][m];
  return w;
}

struct SliceEval {
  Mat hbar;
  double cross = 0.0;     // normalized gauge cross term
  double unit_dev = 0.0;  // |rescaled norm - 1| at the slice point
};

// One grid node of either form. W is the conformal weight sin(phi)/sin(theta)
// (theta-form) or u/sin(theta) (u-form); its u -> 0 limit comes from the tail
// decay constant A = lim e^t theta.
SliceEval eval_slice(const ExpMap& em, NormalFormGrid::Form form, double theta0,
                     double u, const Vec& x, double rho_q, double hx, double hr) {
  const AdmissibleMetric& m = em.metric();
  const int n = m.n();
  const double tau = 1.0 - u;

  FlowState s = em.state(tau, x, rho_q);
  Mat gb = m.compactified(s.point());

  std::vector<Vec> X(n);
  for (int a = 1; a <= n; ++a)
    X[a - 1] = dexp_dq(em, tau, x, rho_q, a, a == n ? hr : hx);

  double W;
  if (u > 0.0) {
    double sin_im = std::sin(s.theta);
    W = (form == NormalFormGrid::Form::kTheta)
            ? std::sin(theta_of_v(u * v_of_theta(theta0))) / sin_im
            : u / sin_im;
  } else {
    double A = em.decay_constant(x, rho_q);
    W = (form == NormalFormGrid::Form::kTheta) ? 2.0 * v_of_theta(theta0) / A
                                               : 1.0 / A;
  }

  double rr;  // rho_q / rho_image, by the corner ratio at the rho = 0 row
  if (rho_q > 0.0) rr = rho_q / s.rho;
  else rr = 1.0 / X[n - 1][n];  // 1 / (d rho_im / d rho_q)

  SliceEval out;
  out.hbar = Mat(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = a; b < n; ++b) {
      out.hbar(a, b) = W * W * rr * rr * X[a].dot(gb * X[b]);
      out.hbar(b, a) = out.hbar(a, b);
    }

  Vec dir = em.dexp_dtau(tau, x, rho_q);
  double dn = dir.dot(gb * dir);
  for (int a = 0; a < n; ++a) {
    double xn = X[a].dot(gb * X[a]);
    if (dn > 0.0 && xn > 0.0)
      out.cross = std::max(out.cross,
                           std::abs(dir.dot(gb * X[a])) / std::sqrt(dn * xn));
  }
  out.unit_dev = std::abs(rescaled_norm(m, s) - 1.0);
  return out;
}

NormalFormGrid build_grid(const AdmissibleMetric& m, const BoundaryQ& Q,
                          const NormalFormSpec& spec, NormalFormGrid::Form form) {
  const int n = m.n();
  NormalFormGrid nf;
  nf.form = form;
  nf.n = n;

  if (form == NormalFormGrid::Form::kTheta) {
    if (!Q.constant_corner_angle(n))
      throw precondition_error(
          "theta-form needs a constant corner angle; use the u-form");
    nf.theta0 = Q.psi(Vec::Zero(n - 1), 0.0);
    nf.params = lobatto_nodes(0.0, nf.theta0, spec.n_param);
  } else {
    nf.params = lobatto_nodes(0.0, 1.0, spec.n_param);
  }

  nf.x_nodes.resize(spec.n_x);
  for (int i = 0; i < spec.n_x; ++i)
    nf.x_nodes[i] = spec.n_x == 1 ? 0.5 * (spec.x_min + spec.x_max)
                                  : spec.x_min + (spec.x_max - spec.x_min) * i /
                                        (spec.n_x - 1.0);
  nf.rho_nodes.resize(spec.n_rho);
  for (int i = 0; i < spec.n_rho; ++i)
    nf.rho_nodes[i] = spec.rho_max * i / (spec.n_rho - 1.0);

  // FD steps tied to the grid spacing, clamped into the band where stencil
  // truncation and integrator noise are both negligible.
  auto clamp_step = [](double s) { return std::min(std::max(s, 5e-4), 4e-3); };
  const double hx = clamp_step(
      spec.n_x > 1 ? 0.25 * (nf.x_nodes[1] - nf.x_nodes[0]) : 2e-3);
  const double hr = clamp_step(0.25 * (nf.rho_nodes[1] - nf.rho_nodes[0]));

  ExpMapOptions eo;
  eo.tol = spec.tol;
  ExpMap em(m, Q, eo);

  const int xflat = nf.x_flat_count();
  nf.hbar.assign(static_cast<size_t>(spec.n_param) * xflat * spec.n_rho, Mat());

  // Columns at fixed q are independent; each worker owns whole columns and
  // writes to indexed slots, so the assembled grid does not depend on the
  // schedule.
  std::vector<double> col_cross(static_cast<size_t>(xflat) * spec.n_rho, 0.0);
  std::vector<double> col_unit(static_cast<size_t>(xflat) * spec.n_rho, 0.0);
  parallel_for(xflat * spec.n_rho, [&](int col) {
    const int ix = col / spec.n_rho;
    const int ir = col % spec.n_rho;
    Vec x = nf.x_at(ix);
    for (int p = 0; p < spec.n_param; ++p) {
      double u = (form == NormalFormGrid::Form::kTheta)
                     ? v_of_theta(nf.params[p]) / v_of_theta(nf.theta0)
                     : nf.params[p];
      SliceEval se = eval_slice(em, form, nf.theta0, u, x, nf.rho_nodes[ir],
                                hx, hr);
      nf.hbar[(static_cast<size_t>(p) * xflat + ix) * spec.n_rho + ir] =
          std::move(se.hbar);
      col_cross[col] = std::max(col_cross[col], se.cross);
      col_unit[col] = std::max(col_unit[col], se.unit_dev);
    }
  });
  for (double v : col_cross) nf.max_cross_residual = std::max(nf.max_cross_residual, v);
  for (double v : col_unit) nf.max_unit_dev = std::max(nf.max_unit_dev, v);
  return nf;
}

}  // namespace

int NormalFormGrid::x_flat_count() const {
  int c = 1;
  for (int i = 0; i < n - 1; ++i) c *= static_cast<int>(x_nodes.size());
  return c;
}

Vec NormalFormGrid::x_at(int flat) const {
  Vec x(n - 1);
  int base = static_cast<int>(x_nodes.size());
  for (int i = 0; i < n - 1; ++i) {
    x[i] = x_nodes[flat % base];
    flat /= base;
  }
  return x;
}

const Mat& NormalFormGrid::hbar_at(int p, int xflat, int ir) const {
  return hbar[(static_cast<size_t>(p) * x_flat_count() + xflat) * rho_nodes.size() +
              ir];
}

Mat NormalFormGrid::h_at(int p, int xflat, int ir) const {
  double r = rho_nodes[ir];
  return hbar_at(p, xflat, ir) / (r * r);
}

NormalFormGrid build_u_form(const AdmissibleMetric& m, const BoundaryQ& Q,
                            const NormalFormSpec& spec) {
  return build_grid(m, Q, spec, NormalFormGrid::Form::kU);
}

NormalFormGrid build_theta_form(const AdmissibleMetric& m, const BoundaryQ& Q,
                                const NormalFormSpec& spec) {
  return build_grid(m, Q, spec, NormalFormGrid::Form::kTheta);
}

namespace {

double corner_derivative(const NormalFormGrid& nf,
                         const std::vector<int>& param_subset) {
  std::vector<double> nodes;
  for (int j : param_subset) nodes.push_back(nf.params[j]);
  double worst = 0.0;
  const int xflat = nf.x_flat_count();
  for (size_t z = 0; z < nodes.size(); ++z) {
    std::vector<double> w = fornberg_weights(nodes[z], nodes, 1);
    for (int ix = 0; ix < xflat; ++ix) {
      Mat d = Mat::Zero(nf.n, nf.n);
      for (size_t j = 0; j < nodes.size(); ++j)
        d += w[j] * nf.hbar_at(param_subset[j], ix, 0);
      worst = std::max(worst, d.cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

}  // namespace

double corner_stationarity(const NormalFormGrid& nf, double floor) {
  if (nf.form != NormalFormGrid::Form::kTheta)
    throw precondition_error("corner stationarity applies to theta-form grids");
  if (nf.rho_nodes.empty() || nf.rho_nodes[0] != 0.0)
    throw precondition_error("grid lacks the rho = 0 row");

  const int P = static_cast<int>(nf.params.size());
  std::vector<int> all(P);
  for (int j = 0; j < P; ++j) all[j] = j;
  double full = corner_derivative(nf, all);

  if (P >= 7) {
    std::vector<int> thin;
    for (int j = 0; j < P; j += 2) thin.push_back(j);
    if (thin.back() != P - 1) thin.push_back(P - 1);
    double coarse = corner_derivative(nf, thin);
    if (full > floor && coarse > floor &&
        std::abs(full - coarse) > 0.5 * std::max(full, coarse))
      throw accuracy_error("corner-stationarity estimate unstable under "
                           "node thinning; grid too coarse");
  }
  return full;
}

std::vector<Mat> induced_boundary_metric(const AdmissibleMetric& m,
                                         const BoundaryQ& Q,
                                         const NormalFormSpec& spec) {
  NormalFormSpec one = spec;
  one.n_param = std::max(3, std::min(spec.n_param, 5));
  NormalFormGrid nf = build_u_form(m, Q, one);
  std::vector<Mat> out;
  const int xflat = nf.x_flat_count();
  out.reserve(static_cast<size_t>(xflat) * nf.rho_nodes.size());
  for (int ix = 0; ix < xflat; ++ix)
    for (size_t ir = 0; ir < nf.rho_nodes.size(); ++ir)
      out.push_back(nf.hbar_at(0, ix, static_cast<int>(ir)));
  return out;
}

double fiber_angle_function(const AdmissibleMetric& m, const BoundaryQ& Q,
                            const Vec& x) {
  (void)m;
  return Q.psi(x, 0.0);
}

Mat interp_param(const NormalFormGrid& nf, double p, int xflat, int ir) {
  const int P = static_cast<int>(nf.params.size());
  // Barycentric weights on arbitrary nodes.
  std::vector<double> w(P, 1.0);
  for (int j = 0; j < P; ++j)
    for (int k = 0; k < P; ++k)
      if (k != j) w[j] /= (nf.params[j] - nf.params[k]);
  Mat num = Mat::Zero(nf.n, nf.n);
  double den = 0.0;
  for (int j = 0; j < P; ++j) {
    double d = p - nf.params[j];
    if (std::abs(d) < 1e-14) return nf.hbar_at(j, xflat, ir);
    double c = w[j] / d;
    num += c * nf.hbar_at(j, xflat, ir);
    den += c;
  }
  return num / den;
}

void NormalFormGrid::save(std::ostream& os) const {
  nlohmann::ordered_json j;
  j["format_version"] = 1;
  j["form"] = form == Form::kTheta ? "theta" : "u";
  j["n"] = n;
  j["theta0"] = theta0;
  j["params"] = params;
  j["x_nodes"] = x_nodes;
  j["rho_nodes"] = rho_nodes;
  j["max_cross_residual"] = max_cross_residual;
  j["max_unit_dev"] = max_unit_dev;
  os << j.dump() << "\n";

  os << "param";
  for (int i = 1; i < n; ++i) os << ",x" << i;
  os << ",rho";
  for (int a = 0; a < n; ++a)
    for (int b = a; b < n; ++b) os << ",hbar_" << a << b;
  for (int a = 0; a < n; ++a)
    for (int b = a; b < n; ++b) os << ",h_" << a << b;
  os << "\n";

  char buf[32];
  auto emit = [&](double v, bool lead_comma) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    if (lead_comma) os << ",";
    os << buf;
  };
  const int xflat = x_flat_count();
  for (size_t p = 0; p < params.size(); ++p)
    for (int ix = 0; ix < xflat; ++ix)
      for (size_t ir = 0; ir < rho_nodes.size(); ++ir) {
        emit(params[p], false);
        Vec x = x_at(ix);
        for (int i = 0; i < n - 1; ++i) emit(x[i], true);
        emit(rho_nodes[ir], true);
        const Mat& hb = hbar_at(static_cast<int>(p), ix, static_cast<int>(ir));
        for (int a = 0; a < n; ++a)
          for (int b = a; b < n; ++b) emit(hb(a, b), true);
        double r2 = rho_nodes[ir] * rho_nodes[ir];
        for (int a = 0; a < n; ++a)
          for (int b = a; b < n; ++b) emit(hb(a, b) / r2, true);
        os << "\n";
      }
}

NormalFormGrid NormalFormGrid::load(std::istream& is) {
  std::string header;
  if (!std::getline(is, header)) throw domain_error("empty grid file");
  nlohmann::json j = nlohmann::json::parse(header);
  if (j.at("format_version").get<int>() != 1)
    throw domain_error("unsupported grid format version");

  NormalFormGrid nf;
  nf.form = j.at("form").get<std::string>() == "theta" ? Form::kTheta : Form::kU;
  nf.n = j.at("n").get<int>();
  nf.theta0 = j.at("theta0").get<double>();
  nf.params = j.at("params").get<std::vector<double>>();
  nf.x_nodes = j.at("x_nodes").get<std::vector<double>>();
  nf.rho_nodes = j.at("rho_nodes").get<std::vector<double>>();
  nf.max_cross_residual = j.at("max_cross_residual").get<double>();
  nf.max_unit_dev = j.at("max_unit_dev").get<double>();

  std::string line;
  std::getline(is, line);  // column header
  const int xflat = nf.x_flat_count();
  nf.hbar.assign(nf.params.size() * xflat * nf.rho_nodes.size(), Mat());
  const int ncomp = nf.n * (nf.n + 1) / 2;
  for (auto& hb : nf.hbar) {
    if (!std::getline(is, line)) throw domain_error("grid file truncated");
    std::vector<double> vals;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) vals.push_back(std::strtod(cell.c_str(), nullptr));
    if (static_cast<int>(vals.size()) != nf.n + 1 + 2 * ncomp)
      throw domain_error("grid row has wrong column count");
    Mat m(nf.n, nf.n);
    int idx = nf.n + 1;
    for (int a = 0; a < nf.n; ++a)
      for (int b = a; b < nf.n; ++b) {
        m(a, b) = vals[idx];
        m(b, a) = vals[idx];
        ++idx;
      }
    hb = std::move(m);
  }
  return nf;
}

}  // namespace cornerflow
