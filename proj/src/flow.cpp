#include "cornerflow/flow.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <ostream>

namespace cornerflow {

namespace {

PolarPoint raw_point(double theta, const Vec& x, double rho) {
  PolarPoint p;  // trial RK stages may probe slightly past a face
  p.theta = theta;
  p.x = x;
  p.rho = rho;
  return p;
}

struct FrameEval {
  Mat H;                // inverse frame matrix
  std::vector<Mat> dH;  // partials, coordinate indexed
  double s, co;
};

FrameEval eval_frame(const AdmissibleMetric& m, const PolarPoint& p,
                     bool with_derivs) {
  FrameEval fe;
  fe.s = std::sin(p.theta);
  fe.co = std::cos(p.theta);
  Mat G = m.frame(p);
  fe.H = G.inverse();
  if (with_derivs) fe.dH = m.frame_inverse_d1(p, fe.H);
  return fe;
}

}  // namespace

PolarPoint FlowState::point() const { return raw_point(theta, x, rho); }

Vec FlowState::pack() const {
  const int nn = n();
  Vec y(2 * nn + 2);
  y[0] = theta;
  y.segment(1, nn - 1) = x;
  y[nn] = rho;
  y[nn + 1] = xibar0;
  y.segment(nn + 2, nn) = xibar;
  return y;
}

FlowState FlowState::unpack(const Vec& y, int n) {
  FlowState s;
  s.theta = y[0];
  s.x = y.segment(1, n - 1);
  s.rho = y[n];
  s.xibar0 = y[n + 1];
  s.xibar = y.segment(n + 2, n);
  return s;
}

double rescaled_norm(const AdmissibleMetric& m, const FlowState& st) {
  const int n = st.n();
  FrameEval fe = eval_frame(m, st.point(), false);
  double acc = fe.H(0, 0) * st.xibar0 * st.xibar0;
  for (int mu = 1; mu <= n; ++mu) {
    acc += 2.0 * fe.s * fe.H(0, mu) * st.xibar0 * st.xibar[mu - 1];
    for (int nu = 1; nu <= n; ++nu)
      acc += fe.s * fe.s * fe.H(mu, nu) * st.xibar[mu - 1] * st.xibar[nu - 1];
  }
  return acc;
}

Vec flow_velocity(const AdmissibleMetric& m, const FlowState& st) {
  const int n = st.n();
  FrameEval fe = eval_frame(m, st.point(), false);
  const double s = fe.s;
  Vec vel(n + 1);
  double th_dot = s * fe.H(0, 0) * st.xibar0;
  for (int mu = 1; mu <= n; ++mu) th_dot += s * s * fe.H(0, mu) * st.xibar[mu - 1];
  vel[0] = th_dot;
  for (int mu = 1; mu <= n; ++mu) {
    double v = st.rho * s * fe.H(0, mu) * st.xibar0;
    for (int nu = 1; nu <= n; ++nu)
      v += st.rho * s * s * fe.H(mu, nu) * st.xibar[nu - 1];
    vel[mu] = v;
  }
  return vel;
}

namespace {

// The regularized vector field in terms of H = G^{-1}; every combination
// appearing here is smooth up to rho = 0 and theta = 0.
FlowState rhs_impl(const AdmissibleMetric& m, const FlowState& st) {
  const int n = st.n();
  FrameEval fe = eval_frame(m, st.point(), true);
  const Mat& H = fe.H;
  const double s = fe.s, co = fe.co, rho = st.rho;
  const double xb0 = st.xibar0;
  const Vec& xb = st.xibar;

  FlowState d;
  d.x = Vec::Zero(n - 1);
  d.xibar = Vec::Zero(n);

  double h0mu_xb = 0.0;  // sum H(0,mu) xibar_mu
  for (int mu = 1; mu <= n; ++mu) h0mu_xb += H(0, mu) * xb[mu - 1];

  d.theta = s * s * h0mu_xb + s * H(0, 0) * xb0;
  for (int mu = 1; mu <= n; ++mu) {
    double v = rho * s * H(0, mu) * xb0;
    for (int nu = 1; nu <= n; ++nu) v += rho * s * s * H(mu, nu) * xb[nu - 1];
    if (mu < n) d.x[mu - 1] = v;
    else d.rho = v;
  }

  double A = s * H(0, n) * xb0;  // rho_dot / rho
  for (int nu = 1; nu <= n; ++nu) A += s * s * H(n, nu) * xb[nu - 1];

  for (int mu = 1; mu <= n; ++mu) {
    const Mat& dHmu = fe.dH[mu];
    double quad = 0.0, cross = 0.0;
    for (int sg = 1; sg <= n; ++sg) {
      cross += dHmu(0, sg) * xb[sg - 1];
      for (int lm = 1; lm <= n; ++lm)
        quad += dHmu(sg, lm) * xb[sg - 1] * xb[lm - 1];
    }
    double d1 = rho * cross;  // contraction of D1 with xibar
    if (mu == n)
      for (int sg = 1; sg <= n; ++sg) d1 -= H(0, sg) * xb[sg - 1];
    double d2 = rho * dHmu(0, 0);
    if (mu == n) d2 -= 2.0 * H(0, 0);

    double v = A * xb[mu - 1] - (mu == n ? 1.0 : 0.0) -
               0.5 * rho * s * s * quad - s * xb0 * d1 - 0.5 * d2 * xb0 * xb0;
    d.xibar[mu - 1] = v;
  }

  {
    const Mat& dH0 = fe.dH[0];
    double quad = 0.0, cross = 0.0;
    for (int sg = 1; sg <= n; ++sg) {
      cross += dH0(0, sg) * xb[sg - 1];
      for (int lm = 1; lm <= n; ++lm)
        quad += dH0(sg, lm) * xb[sg - 1] * xb[lm - 1];
    }
    d.xibar0 = (s * co * h0mu_xb + co * H(0, 0) * xb0) * xb0 - co -
               0.5 * s * s * s * quad - s * s * xb0 * cross -
               0.5 * s * dH0(0, 0) * xb0 * xb0;
  }
  return d;
}

}  // namespace

FlowState flow_rhs(const AdmissibleMetric& m, const FlowState& st) {
  if (st.theta <= 0.0)
    throw domain_error("flow RHS needs theta > 0; use the theta-parametrized tail");
  return rhs_impl(m, st);
}

FlowState initial_state(const AdmissibleMetric& m, const BoundaryQ& Q,
                        const PolarPoint& q) {
  require_on_boundary(Q, q);
  const int n = m.n();
  FlowState s;
  s.theta = q.theta;
  s.x = q.x;
  s.rho = q.rho;
  if (q.rho == 0.0) {  // corner fiber limit data
    s.xibar0 = -1.0;
    s.xibar = Vec::Zero(n);
    return s;
  }
  Vec psi_d(n + 1);
  for (int a = 1; a <= n; ++a) psi_d[a] = Q.dtheta(a, q.x, q.rho, m.fd());

  Mat H = m.frame_inverse(q);
  double phi = H(0, 0);
  for (int mu = 1; mu <= n; ++mu) {
    phi -= 2.0 * q.rho * H(0, mu) * psi_d[mu];
    for (int nu = 1; nu <= n; ++nu)
      phi += q.rho * q.rho * H(mu, nu) * psi_d[mu] * psi_d[nu];
  }
  const double sp = std::sqrt(phi);
  s.xibar0 = -1.0 / sp;
  s.xibar = Vec(n);
  for (int mu = 1; mu <= n; ++mu)
    s.xibar[mu - 1] = q.rho * psi_d[mu] / (std::sin(q.theta) * sp);
  return s;
}

double boundary_fiber_theta(double theta_q, double t) {
  if (theta_q <= 0.0 || theta_q >= M_PI)
    throw domain_error("theta_q must lie in (0, pi)");
  return theta_of_v(v_of_theta(theta_q) * std::exp(-t));
}

Trajectory integrate(const AdmissibleMetric& m, const FlowState& s0,
                     double t_end, double tol, const IntegrateOptions& opts) {
  if (tol < 1e-12 || tol > 1e-4)
    throw precondition_error("integration tolerance outside [1e-12, 1e-4]");
  const int n = s0.n();

  Rk45Options rk;
  rk.abs_tol = rk.rel_tol = tol / 10.0;  // keep norm drift well under 100*tol
  rk.max_steps = opts.max_steps;
  rk.initial_step = 1e-4;

  OdeRhs f = [&m, n](double, const Vec& y) {
    return rhs_impl(m, FlowState::unpack(y, n)).pack();
  };
  OdeEvent ev = nullptr;
  if (opts.theta_min > 0.0)
    ev = [&opts](double, const Vec& y) { return y[0] - opts.theta_min; };

  Trajectory traj;
  traj.n = n;
  traj.tol = tol;
  traj.ode = rk45_integrate(f, 0.0, s0.pack(), t_end, rk, ev);
  traj.reason = traj.ode.event_stopped ? Trajectory::Termination::kReachedThetaMin
                                       : Trajectory::Termination::kReachedTEnd;

  traj.samples.reserve(traj.ode.steps.size() + 1);
  auto push = [&](double t, const Vec& y) {
    TrajectorySample smp;
    smp.t = t;
    smp.state = FlowState::unpack(y, n);
    smp.norm_drift = std::abs(rescaled_norm(m, smp.state) - 1.0);
    traj.samples.push_back(std::move(smp));
  };
  push(0.0, s0.pack());
  for (const auto& st : traj.ode.steps) {
    double t1 = st.t0 + st.h;
    if (t1 > traj.ode.t_end) break;
    push(t1, st.eval(t1));
  }
  if (traj.samples.back().t < traj.ode.t_end)
    push(traj.ode.t_end, traj.ode.y_end);
  return traj;
}

std::vector<TauSample> reparam_tau(const Trajectory& traj) {
  std::vector<TauSample> out;
  out.reserve(traj.samples.size());
  for (const auto& s : traj.samples)
    out.push_back({1.0 - std::exp(-s.t), s.state});
  return out;
}

namespace {

struct TailWork {
  const AdmissibleMetric* m;
  int n;
  bool with_lambda;
  // phase-B polynomial for dlambda/dtheta
  double p0 = 0.0, p1 = 0.0, p2 = 0.0;
  bool poly = false;
  double min_den;

  // y = [x (n-1), rho, xibar0, xibar (n), lambda]
  Vec operator()(double theta, const Vec& y) const {
    const int nn = n;
    Vec x = y.segment(0, nn - 1);
    double rho = y[nn - 1];
    double xb0 = y[nn];
    Vec xb = y.segment(nn + 1, nn);

    PolarPoint p = raw_point(theta, x, rho);
    const AdmissibleMetric& mm = *m;
    Mat G = mm.frame(p);
    Mat H = G.inverse();
    std::vector<Mat> dH = mm.frame_inverse_d1(p, H);
    const double s = std::sin(theta), co = std::cos(theta);

    double h0mu_xb = 0.0;
    for (int mu = 1; mu <= nn; ++mu) h0mu_xb += H(0, mu) * xb[mu - 1];
    double den = s * h0mu_xb + H(0, 0) * xb0;
    if (std::abs(den) < min_den)
      throw integration_error("tail regularity failure: theta-velocity "
                              "denominator too small", theta);

    // Psi = (H00 xibar0^2 - 1)/sin(theta) via the conserved norm.
    double psi = -2.0 * h0mu_xb * xb0;
    for (int mu = 1; mu <= nn; ++mu)
      for (int nu = 1; nu <= nn; ++nu)
        psi -= s * H(mu, nu) * xb[mu - 1] * xb[nu - 1];

    // dH_00 / sin(theta), assembled with the sin factored out exactly:
    // H = H0 - rho sin(theta) H ell H0 splits off the row-0 smallness.
    Vec t_over_s = Vec::Zero(nn + 1);  // index by coordinate c = 1..n
    if (!mm.ell().zero()) {
      Mat ell = mm.ell().value(p);
      Mat kinv = mm.k().value(p).inverse();
      Mat H0 = Mat::Identity(nn + 1, nn + 1);
      H0.block(1, 1, nn - 1, nn - 1) = kinv;
      Mat H1 = -H * ell * H0;
      Mat HellH = H * ell * H;
      for (int c = 1; c <= nn; ++c) {
        Mat dk = mm.k().deriv1(c, p, mm.fd());
        double quad = 0.0;
        for (int a = 1; a < nn; ++a)
          for (int b = 1; b < nn; ++b)
            quad += H1(0, a) * dk(a - 1, b - 1) * H1(0, b);
        Mat dell = mm.ell().deriv1(c, p, mm.fd());
        Mat HdellH = H * dell * H;
        t_over_s[c] = -rho * rho * s * quad - rho * HdellH(0, 0);
        if (c == nn) t_over_s[c] -= HellH(0, 0);
      }
    } else {
      // Without a perturbation H is block-diagonal: row 0 of dH vanishes in
      // the mu columns and dH_00 = 0 identically.
      for (int c = 1; c <= nn; ++c) t_over_s[c] = 0.0;
    }

    double a_rho = H(0, nn) * xb0;
    for (int nu = 1; nu <= nn; ++nu) a_rho += s * H(nn, nu) * xb[nu - 1];

    Vec dy(y.size());
    for (int mu = 1; mu <= nn; ++mu) {  // x slots 0..n-2, rho slot n-1
      double v = rho * H(0, mu) * xb0;
      for (int nu = 1; nu <= nn; ++nu) v += rho * s * H(mu, nu) * xb[nu - 1];
      dy[mu - 1] = v / den;
    }

    for (int mu = 1; mu <= nn; ++mu) {
      const Mat& dHmu = dH[mu];
      double quad = 0.0, cross = 0.0;
      for (int sg = 1; sg <= nn; ++sg) {
        cross += dHmu(0, sg) * xb[sg - 1];
        for (int lm = 1; lm <= nn; ++lm)
          quad += dHmu(sg, lm) * xb[sg - 1] * xb[lm - 1];
      }
      double v = a_rho * xb[mu - 1] - 0.5 * rho * s * quad -
                 0.5 * rho * t_over_s[mu] * xb0 * xb0;
      if (mu == nn) {
        v += psi;
        double d1 = 0.0;
        for (int sg = 1; sg <= nn; ++sg)
          d1 += (rho * dHmu(0, sg) - H(0, sg)) * xb[sg - 1];
        v -= d1 * xb0;
      } else {
        v -= rho * cross * xb0;
      }
      dy[nn + 1 + (mu - 1)] = v / den;
    }

    {
      const Mat& dH0 = dH[0];
      double quad = 0.0, cross = 0.0;
      for (int sg = 1; sg <= nn; ++sg) {
        cross += dH0(0, sg) * xb[sg - 1];
        for (int lm = 1; lm <= nn; ++lm)
          quad += dH0(sg, lm) * xb[sg - 1] * xb[lm - 1];
      }
      dy[nn] = (co * (h0mu_xb * xb0 + psi) - 0.5 * s * s * quad -
                s * cross * xb0 - 0.5 * dH0(0, 0) * xb0 * xb0) /
               den;
    }

    if (with_lambda) {
      if (poly)
        dy[2 * nn + 1] = p0 + theta * (p1 + theta * p2);
      else
        dy[2 * nn + 1] = (theta + s * den) / (theta * s * den);
    }
    return dy;
  }
};

}  // namespace

FlowState TailSegment::state_at(double theta) const {
  Vec y = ode.eval(theta);
  FlowState s;
  s.theta = theta;
  s.x = y.segment(0, n - 1);
  s.rho = y[n - 1];
  s.xibar0 = y[n];
  s.xibar = y.segment(n + 1, n);
  return s;
}

double TailSegment::t_at(double theta) const {
  if (theta <= 0.0) throw domain_error("t diverges at theta = 0");
  Vec y = ode.eval(theta);
  return y[2 * n + 1] - std::log(theta);
}

TailSegment theta_parametrized_tail(const AdmissibleMetric& m, const FlowState& s,
                                    double theta_stop, double tol,
                                    const TailOptions& opts) {
  const int n = s.n();
  if (s.theta > opts.handoff_threshold * (1.0 + 1e-9))
    throw precondition_error("tail handoff requires a small starting theta");
  if (theta_stop < 0.0 || theta_stop >= s.theta)
    throw precondition_error("theta_stop must lie in [0, theta_start)");

  TailSegment tail;
  tail.n = n;
  tail.theta_start = s.theta;
  tail.theta_stop = theta_stop;
  tail.t_start = opts.t_start;

  Vec y0(2 * n + 2);
  y0.segment(0, n - 1) = s.x;
  y0[n - 1] = s.rho;
  y0[n] = s.xibar0;
  y0.segment(n + 1, n) = s.xibar;
  y0[2 * n + 1] = opts.t_start + std::log(s.theta);

  TailWork work;
  work.m = &m;
  work.n = n;
  work.with_lambda = true;
  work.min_den = opts.min_denominator;

  Rk45Options rk;
  rk.abs_tol = rk.rel_tol = tol / 10.0;
  rk.initial_step = s.theta / 64.0;

  const double cut = std::max(theta_stop, std::min(opts.lambda_cutoff, 0.5 * s.theta));
  OdeRhs fa = [&work](double th, const Vec& y) { return work(th, y); };
  Rk45Solution phase_a = rk45_integrate(fa, s.theta, y0, cut, rk);

  tail.ode = std::move(phase_a);
  if (cut > theta_stop) {
    // Below the cutoff the lambda integrand is a smooth function of theta
    // whose direct evaluation loses digits; freeze it to a quadratic fitted
    // on the already-integrated stretch and finish the run with it.
    const int kFit = 6;
    Eigen::MatrixXd Afit(kFit, 3);
    Vec bfit(kFit);
    for (int j = 0; j < kFit; ++j) {
      double th = cut * (1.0 + 0.5 * j);
      th = std::min(th, 0.99 * s.theta);
      Vec y = tail.ode.eval(th);
      Vec dy = work(th, y);
      Afit(j, 0) = 1.0;
      Afit(j, 1) = th;
      Afit(j, 2) = th * th;
      bfit[j] = dy[2 * n + 1];
    }
    Vec coef = Afit.colPivHouseholderQr().solve(bfit);
    work.poly = true;
    work.p0 = coef[0];
    work.p1 = coef[1];
    work.p2 = coef[2];

    OdeRhs fb = [&work](double th, const Vec& y) { return work(th, y); };
    Rk45Options rkb = rk;
    rkb.initial_step = cut / 16.0;
    Rk45Solution phase_b =
        rk45_integrate(fb, tail.ode.t_end, tail.ode.y_end, theta_stop, rkb);
    for (auto& st : phase_b.steps) tail.ode.steps.push_back(std::move(st));
    tail.ode.t_end = phase_b.t_end;
    tail.ode.y_end = phase_b.y_end;
  }
  tail.lambda_limit = tail.ode.y_end[2 * n + 1];
  return tail;
}

TrajectoryStats trajectory_stats(const AdmissibleMetric& m, const Trajectory& traj,
                                 const BoundaryQ* Q) {
  TrajectoryStats st;
  if (traj.samples.empty()) return st;
  const double rho0 = traj.samples.front().state.rho;
  const Vec x0 = traj.samples.front().state.x;
  st.angle_lower = st.rho_lower = std::numeric_limits<double>::infinity();
  double prev_theta = traj.samples.front().state.theta + 1.0;
  bool left_boundary = false;
  for (const auto& smp : traj.samples) {
    const FlowState& s = smp.state;
    st.norm_drift_max = std::max(st.norm_drift_max, smp.norm_drift);
    if (smp.t > 0.0 && s.theta >= prev_theta) st.theta_monotone = false;
    prev_theta = s.theta;
    double et = std::exp(smp.t);
    st.angle_lower = std::min(st.angle_lower, et * std::sin(s.theta));
    st.angle_upper = std::max(st.angle_upper, et * std::sin(s.theta));
    if (rho0 > 0.0) {
      st.rho_lower = std::min(st.rho_lower, s.rho / rho0);
      st.rho_upper = std::max(st.rho_upper, s.rho / rho0);
    }
    st.x_drift = std::max(st.x_drift, chart_distance(s.x, x0));
    for (int mu = 0; mu < s.xibar.size(); ++mu)
      st.cov_growth = std::max(st.cov_growth, std::abs(s.xibar[mu]) / (1.0 + smp.t));
    st.cov0_decay = std::max(st.cov0_decay, std::abs(s.xibar0 + 1.0) * et);
    if (Q) {
      double h = s.theta - Q->psi(s.x, s.rho);
      if (h < -1e-3) left_boundary = true;
      else if (left_boundary && h > -1e-9) st.q_return = true;
    }
  }
  (void)m;
  return st;
}

namespace {

void format_row(const TrajectorySample& smp, std::vector<double>& row) {
  row.clear();
  row.push_back(smp.t);
  row.push_back(1.0 - std::exp(-smp.t));
  row.push_back(smp.state.theta);
  for (int i = 0; i < smp.state.x.size(); ++i) row.push_back(smp.state.x[i]);
  row.push_back(smp.state.rho);
  row.push_back(smp.state.xibar0);
  for (int i = 0; i < smp.state.xibar.size(); ++i) row.push_back(smp.state.xibar[i]);
  row.push_back(smp.norm_drift);
}

}  // namespace

void write_trajectory_csv(std::ostream& os, const AdmissibleMetric& m,
                          const Trajectory& traj) {
  const int n = traj.n;
  os << "t,tau,theta";
  for (int i = 1; i < n; ++i) os << ",x" << i;
  os << ",rho,xibar0";
  for (int i = 1; i <= n; ++i) os << ",xibar" << i;
  os << ",norm_drift\n";
  char buf[32];
  std::vector<double> row;
  for (const auto& smp : traj.samples) {
    format_row(smp, row);
    for (size_t i = 0; i < row.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", row[i]);
      os << (i ? "," : "") << buf;
    }
    os << "\n";
  }
}

void write_trajectory_binary(std::ostream& os, const AdmissibleMetric& m,
                             const Trajectory& traj) {
  const unsigned char version = 1;
  os.write(reinterpret_cast<const char*>(&version), 1);
  std::uint32_t n = static_cast<std::uint32_t>(traj.n);
  std::uint64_t rows = traj.samples.size();
  os.write(reinterpret_cast<const char*>(&n), sizeof n);
  os.write(reinterpret_cast<const char*>(&rows), sizeof rows);
  std::vector<double> row;
  for (const auto& smp : traj.samples) {
    format_row(smp, row);
    os.write(reinterpret_cast<const char*>(row.data()),
             static_cast<std::streamsize>(row.size() * sizeof(double)));
  }
}

}  // namespace cornerflow
