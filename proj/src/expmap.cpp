#include "cornerflow/expmap.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <random>

#include "json.hpp"

namespace cornerflow {

namespace {

std::size_t key_of(const Vec& x, double rho) {
  auto mix = [](std::size_t h, double v) {
    std::size_t b = std::bit_cast<std::size_t>(v);
    h ^= b + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
  };
  std::size_t h = mix(0x1234567, rho);
  for (Eigen::Index i = 0; i < x.size(); ++i) h = mix(h, x[i]);
  return h;
}

}  // namespace

ExpMap::ExpMap(const AdmissibleMetric& m, const BoundaryQ& Q, ExpMapOptions opts)
    : m_(&m), q_(&Q), opts_(opts) {}

std::shared_ptr<const ExpMap::Geodesic> ExpMap::geodesic(const Vec& x,
                                                         double rho) const {
  const std::size_t key = key_of(x, rho);
  {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }
  auto geo = std::make_shared<Geodesic>();
  PolarPoint q = q_->at(x, rho);
  geo->start = initial_state(*m_, *q_, q);

  IntegrateOptions io;
  io.theta_min = opts_.handoff;
  geo->flow = integrate(*m_, geo->start, opts_.t_max, opts_.tol, io);
  geo->t_handoff = geo->flow.t_final();

  const FlowState& hand = geo->flow.samples.back().state;
  if (hand.theta > opts_.handoff * (1.0 + 1e-6))
    throw integration_error("geodesic failed to reach the tail handoff angle",
                            geo->t_handoff);
  TailOptions to;
  to.handoff_threshold = opts_.handoff * (1.0 + 1e-6);
  to.t_start = geo->t_handoff;
  geo->tail = theta_parametrized_tail(*m_, hand, 0.0, opts_.tol, to);
  geo->flow.reason = Trajectory::Termination::kTailCompleted;

  std::lock_guard<std::mutex> lock(cache_mutex_);
  auto [it, inserted] = cache_.emplace(key, geo);
  return it->second;  // first writer wins
}

FlowState ExpMap::state(double tau, const Vec& x, double rho) const {
  if (tau < 0.0 || tau > 1.0) throw domain_error("tau outside [0, 1]");
  auto geo = geodesic(x, rho);
  if (tau == 0.0) return geo->start;
  if (tau == 1.0) return geo->tail.endpoint();
  double t = -std::log1p(-tau);
  if (t <= geo->t_handoff) return geo->flow.at(t);

  // Invert t(theta) = lambda(theta) - log(theta) on the tail by bisection
  // in log(theta).
  const TailSegment& tail = geo->tail;
  double guess = std::exp(tail.lambda_limit - t);
  double lo = std::log(std::max(1e-300, 0.125 * guess));
  double hi = std::log(tail.theta_start);
  for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
    double mid = 0.5 * (lo + hi);
    double th = std::exp(mid);
    if (tail.t_at(th) > t) lo = mid;  // t increases as theta decreases
    else hi = mid;
  }
  return tail.state_at(std::exp(0.5 * (lo + hi)));
}

PolarPoint ExpMap::shoot(double tau, const Vec& x, double rho) const {
  if (tau == 0.0) return q_->at(x, rho);  // zero section, exact
  FlowState s = state(tau, x, rho);
  PolarPoint p;
  p.theta = s.theta;
  p.x = s.x;
  p.rho = s.rho;
  return p;
}

Vec ExpMap::dexp_dtau(double tau, const Vec& x, double rho) const {
  const int N = m_->dim();
  if (tau < 1.0) {
    FlowState s = state(tau, x, rho);
    return Vec(flow_velocity(*m_, s) / (1.0 - tau));
  }
  auto geo = geodesic(x, rho);
  FlowState end = geo->tail.endpoint();
  Vec d = Vec::Zero(N);
  // theta ~ A e^{-t}: the limit direction is purely d/dtheta with
  // coefficient A * xibar0 (H_00 = 1 on the face).
  d[0] = geo->tail.angle_decay_constant() * end.xibar0;
  return d;
}

double ExpMap::decay_constant(const Vec& x, double rho) const {
  return geodesic(x, rho)->tail.angle_decay_constant();
}

// 4th-order first-derivative stencils: central and fully one-sided.
Vec dexp_dq(const ExpMap& em, double tau, const Vec& x, double rho, int a,
            double h) {
  const int n = em.metric().n();
  auto probe = [&](double d) -> Vec {
    Vec xx = x;
    double rr = rho;
    if (a == n) rr += d;
    else xx[a - 1] += d;
    PolarPoint p = em.shoot(tau, xx, rr);
    Vec img(n + 1);
    img[0] = p.theta;
    img.segment(1, n - 1) = p.x;
    img[n] = p.rho;
    return img;
  };
  if (a == n && rho - 2.0 * h < 0.0) {
    // forward 5-point stencil at the corner row
    return (-25.0 * probe(0.0) + 48.0 * probe(h) - 36.0 * probe(2 * h) +
            16.0 * probe(3 * h) - 3.0 * probe(4 * h)) /
           (12.0 * h);
  }
  return (probe(-2 * h) - 8.0 * probe(-h) + 8.0 * probe(h) - probe(2 * h)) /
         (12.0 * h);
}

namespace {

Mat differential_matrix(const ExpMap& em, double tau, const Vec& x, double rho,
                        double h) {
  const int N = em.metric().dim();
  Mat D(N, N);
  D.col(0) = em.dexp_dtau(tau, x, rho);
  for (int a = 1; a < N; ++a) D.col(a) = dexp_dq(em, tau, x, rho, a, h);
  return D;
}

}  // namespace

double jacobian_det(const ExpMap& em, double tau, const Vec& x, double rho,
                    double h, bool verify_steps) {
  double det = differential_matrix(em, tau, x, rho, h).determinant();
  if (verify_steps) {
    double det2 = differential_matrix(em, tau, x, rho, 0.5 * h).determinant();
    double scale = std::max({std::abs(det), std::abs(det2), 1e-12});
    if (std::abs(det - det2) > 0.1 * scale)
      throw accuracy_error("jacobian determinant disagrees under step halving");
    det = det2;
  }
  return det;
}

double differential_lower_bound(const ExpMap& em, double tau, const Vec& x,
                                double rho, double h) {
  const AdmissibleMetric& m = em.metric();
  const int n = m.n();
  PolarPoint base = em.boundary().at(x, rho);
  Mat gb_base = m.compactified(base);
  PolarPoint img = em.shoot(tau, x, rho);
  Mat gb_img = m.compactified(img);

  std::vector<Vec> cols(n);
  std::vector<Vec> tans(n);
  for (int a = 1; a <= n; ++a) {
    cols[a - 1] = dexp_dq(em, tau, x, rho, a, h);
    Vec T = Vec::Zero(n + 1);
    T[0] = em.boundary().dtheta(a, x, rho, m.fd());
    T[a] = 1.0;
    tans[a - 1] = T;
  }
  double c = std::numeric_limits<double>::infinity();
  auto ratio = [&](const Vec& X, const Vec& T) {
    double num = X.dot(gb_img * X);
    double den = T.dot(gb_base * T);
    return std::sqrt(std::max(num, 0.0) / den);
  };
  for (int a = 0; a < n; ++a) c = std::min(c, ratio(cols[a], tans[a]));
  if (n >= 2) {
    Vec Xm = cols[0] + cols[n - 1], Tm = tans[0] + tans[n - 1];
    c = std::min(c, ratio(Xm, Tm));
    Vec Xd = cols[0] - cols[n - 1], Td = tans[0] - tans[n - 1];
    c = std::min(c, ratio(Xd, Td));
  }
  return c;
}

double image_distance(const AdmissibleMetric& m, const PolarPoint& a,
                      const PolarPoint& b) {
  const int n = m.n();
  double dv = v_of_theta(a.theta) - v_of_theta(b.theta);
  Vec dz(n);
  for (int s = 0; s < n - 1; ++s)
    dz[s] = std::remainder(a.x[s] - b.x[s], 2.0 * M_PI);
  dz[n - 1] = a.rho - b.rho;
  Mat gb = m.compactified(a).block(1, 1, n, n);
  return std::sqrt(dv * dv + dz.dot(gb * dz));
}

ScanReport injectivity_scan(const ExpMap& em, const ScanSpec& spec) {
  const AdmissibleMetric& m = em.metric();
  const int n = m.n();
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  struct Sample {
    double tau, rho;
    Vec x;
    PolarPoint image;
  };
  std::vector<Sample> pts;
  pts.reserve(spec.points);
  for (int i = 0; i < spec.points; ++i) {
    Sample s;
    s.tau = spec.tau_max * u01(rng);
    s.x = Vec(n - 1);
    for (int j = 0; j < n - 1; ++j)
      s.x[j] = spec.x_min + (spec.x_max - spec.x_min) * u01(rng);
    s.rho = spec.rho_min + (spec.rho_max - spec.rho_min) * u01(rng);
    s.image = em.shoot(s.tau, s.x, s.rho);
    pts.push_back(std::move(s));
  }

  ScanReport rep;
  const double wx = spec.x_max - spec.x_min;
  const double wr = spec.rho_max - spec.rho_min;
  rep.min_image_distance = std::numeric_limits<double>::infinity();
  std::uniform_int_distribution<int> pick(0, spec.points - 1);
  long counted = 0;
  for (long k = 0; k < spec.pairs; ++k) {
    int i = pick(rng), j = pick(rng);
    if (i == j) continue;
    const Sample &a = pts[i], &b = pts[j];
    double d2 = (a.tau - b.tau) * (a.tau - b.tau) +
                (a.rho - b.rho) * (a.rho - b.rho) / (wr * wr);
    for (int s = 0; s < n - 1; ++s) {
      double dx = (a.x[s] - b.x[s]) / wx;
      d2 += dx * dx;
    }
    if (std::sqrt(d2) <= spec.min_param_separation) continue;
    ++counted;
    rep.min_image_distance = std::min(rep.min_image_distance,
                                      image_distance(m, a.image, b.image));
  }
  rep.pairs = counted;

  // Determinant and differential-bound sweep over a structured grid.
  rep.c_measured = std::numeric_limits<double>::infinity();
  rep.jacobian_min_abs = std::numeric_limits<double>::infinity();
  double sign = 0.0;
  const int G = spec.jacobian_grid;
  for (int it = 0; it < G; ++it) {
    double tau = spec.tau_max * it / (G - 1.0);
    for (int ix = 0; ix < G; ++ix) {
      Vec x = Vec::Constant(n - 1,
                            spec.x_min + (spec.x_max - spec.x_min) * ix / (G - 1.0));
      for (int ir = 0; ir < G; ++ir) {
        double rho =
            spec.rho_min + (spec.rho_max - spec.rho_min) * ir / (G - 1.0);
        double det = jacobian_det(em, tau, x, rho, spec.fd_step, false);
        if (sign == 0.0) sign = det > 0 ? 1.0 : -1.0;
        if (det * sign <= 0.0) rep.jacobian_sign_consistent = false;
        rep.jacobian_min_abs = std::min(rep.jacobian_min_abs, std::abs(det));
        rep.c_measured = std::min(
            rep.c_measured, differential_lower_bound(em, tau, x, rho, spec.fd_step));
      }
    }
  }

  // Boundary bending bound over the scanned window.
  rep.kappa = 0.0;
  for (int ix = 0; ix < G; ++ix) {
    Vec x = Vec::Constant(n - 1,
                          spec.x_min + (spec.x_max - spec.x_min) * ix / (G - 1.0));
    for (int ir = 0; ir < G; ++ir) {
      double rho = spec.rho_min + (spec.rho_max - spec.rho_min) * ir / (G - 1.0);
      rep.kappa = std::max(rep.kappa,
                           shape_operator(m, em.boundary(), em.boundary().at(x, rho)).kappa);
    }
  }

  // Curvature bound along a few geodesics of the tube, with a 5% margin.
  double max_sec = -std::numeric_limits<double>::infinity();
  for (int ig = 0; ig < 3; ++ig) {
    Vec x = Vec::Constant(n - 1, spec.x_min + 0.5 * wx * ig / 2.0);
    double rho = spec.rho_min + 0.5 * wr * ig / 2.0;
    auto geo = em.geodesic(x, rho);
    for (double t = 0.0; t <= std::min(6.0, geo->t_handoff); t += 0.5) {
      FlowState s = geo->flow.at(t);
      SymTensor R = riemann(m, s.point());
      Mat g = m.metric(s.point());
      for (int i = 0; i <= n; ++i)
        for (int j = i + 1; j <= n; ++j)
          max_sec = std::max(max_sec, sectional_curvature(R, g, i, j));
      std::uniform_real_distribution<double> un(-1.0, 1.0);
      for (int r = 0; r < 4; ++r) {
        Vec X(n + 1), Y(n + 1);
        for (int i = 0; i <= n; ++i) {
          X[i] = un(rng);
          Y[i] = un(rng);
        }
        max_sec = std::max(max_sec, sectional_curvature(R, g, X, Y));
      }
    }
  }
  rep.beta = 0.95 * (-max_sec);

  rep.pass = rep.min_image_distance > 1e-6 && rep.c_measured > 0.0 &&
             rep.jacobian_sign_consistent && rep.jacobian_min_abs > 0.0;
  return rep;
}

std::string ScanReport::to_json() const {
  nlohmann::ordered_json j;
  j["pairs"] = pairs;
  j["min_image_distance"] = min_image_distance;
  j["c_measured"] = c_measured;
  j["kappa"] = kappa;
  j["beta"] = beta;
  j["jacobian_min_abs"] = jacobian_min_abs;
  j["jacobian_sign_consistent"] = jacobian_sign_consistent;
  j["pass"] = pass;
  return j.dump(2);
}

JacobiRun jacobi_transport(const AdmissibleMetric& m, const Trajectory& traj,
                           const Vec& J0, const Vec& DJ0, double t_end,
                           double tol) {
  const int N = m.dim();
  if (t_end > traj.t_final() + 1e-12)
    throw precondition_error("jacobi transport exceeds the trajectory range");

  OdeRhs rhs = [&](double t, const Vec& y) {
    FlowState s = traj.at(t);
    PolarPoint p = s.point();
    Vec vel = flow_velocity(m, s);
    SymTensor gamma = christoffel(m, p);
    SymTensor R = riemann(m, p);
    Mat gi = m.metric_inverse(p);
    Vec J = y.segment(0, N), V = y.segment(N, N);
    Vec dJ(N), dV(N);
    Vec RJ = curvature_operator(R, gi, J, vel);
    for (int k = 0; k < N; ++k) {
      double cj = 0.0, cv = 0.0;
      for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
          cj += gamma.at(k, i, j) * vel[i] * J[j];
          cv += gamma.at(k, i, j) * vel[i] * V[j];
        }
      dJ[k] = V[k] - cj;
      dV[k] = -RJ[k] - cv;
    }
    Vec dy(2 * N);
    dy.segment(0, N) = dJ;
    dy.segment(N, N) = dV;
    return dy;
  };

  Vec y0(2 * N);
  y0.segment(0, N) = J0;
  y0.segment(N, N) = DJ0;
  Rk45Options rk;
  rk.abs_tol = rk.rel_tol = tol;
  Rk45Solution sol = rk45_integrate(rhs, 0.0, y0, t_end, rk);

  JacobiRun run;
  auto push = [&](double t, const Vec& y) {
    run.t.push_back(t);
    run.J.push_back(y.segment(0, N));
    run.DJ.push_back(y.segment(N, N));
    Mat g = m.metric(traj.at(t).point());
    run.norm.push_back(std::sqrt(std::max(0.0, run.J.back().dot(g * run.J.back()))));
  };
  push(0.0, y0);
  for (const auto& st : sol.steps) {
    double t1 = st.t0 + st.h;
    if (t1 > sol.t_end) break;
    push(t1, st.eval(t1));
  }
  return run;
}

std::pair<Vec, Vec> jacobi_initial_data(const AdmissibleMetric& m,
                                        const BoundaryQ& Q, const PolarPoint& q,
                                        int direction) {
  const int N = m.dim();
  const int n = m.n();
  if (direction < 1 || direction > n) throw domain_error("bad tangential index");

  Vec J0 = Vec::Zero(N);
  J0[0] = Q.dtheta(direction, q.x, q.rho, m.fd());
  J0[direction] = 1.0;

  // DJ0 = covariant derivative of the unit normal field along J0.
  auto nu_at = [&](double s) -> Vec {
    Vec x = q.x;
    double rho = q.rho;
    if (direction == n) rho += s;
    else x[direction - 1] += s;
    return unit_normal(m, Q, Q.at(x, rho));
  };
  const double h = 1e-5 * std::max(q.rho, 0.01);
  Vec dnu = (nu_at(-2 * h) - 8.0 * nu_at(-h) + 8.0 * nu_at(h) - nu_at(2 * h)) /
            (12.0 * h);
  SymTensor gamma = christoffel(m, q);
  Vec nu = unit_normal(m, Q, q);
  Vec DJ0(N);
  for (int k = 0; k < N; ++k) {
    double c = 0.0;
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) c += gamma.at(k, i, j) * J0[i] * nu[j];
    DJ0[k] = dnu[k] + c;
  }
  return {J0, DJ0};
}

}  // namespace cornerflow
