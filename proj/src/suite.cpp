#include "cornerflow/suite.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <sstream>

#include "json.hpp"

#include "cornerflow/normal_form.hpp"
#include "cornerflow/parallel.hpp"
#include "cornerflow/ratefit.hpp"

namespace cornerflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Ctx {
  const RunConfig& cfg;
  SuiteReport* rep;
  std::mt19937_64 rng;

  void add(const std::string& suite, const std::string& anchor,
           const std::string& claim, double measured, double target, bool pass,
           std::string detail = "") {
    if (measured > cfg.max_measured) pass = false;
    rep->entries.push_back({suite, anchor, claim, measured, target, pass,
                            std::move(detail)});
  }

  PolarPoint sample_point(double rho_lo, double rho_hi) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double theta = 0.4 + 2.2 * u(rng);
    Vec x(cfg.n - 1);
    for (int i = 0; i < cfg.n - 1; ++i)
      x[i] = cfg.x_min + (cfg.x_max - cfg.x_min) * u(rng);
    double rho = rho_lo + (rho_hi - rho_lo) * u(rng);
    return PolarPoint(theta, x, rho);
  }
};

// ---------------------------------------------------------------- metric ----

// Closed-form Christoffel symbols of the model csc^2[dth^2 + (drho^2+|dx|^2)/rho^2].
double hyperbolic_christoffel(int n, const PolarPoint& p, int k, int i, int j) {
  const double cot = std::cos(p.theta) / std::sin(p.theta);
  if (k == 0) {
    if (i == 0 && j == 0) return -cot;
    if (i == j && i >= 1) return cot / (p.rho * p.rho);
    return 0.0;
  }
  auto is_x = [n](int a) { return a >= 1 && a < n; };
  if (i > j) std::swap(i, j);
  if (k == n) {
    if (i == 0 && j == n) return -cot;
    if (is_x(i) && i == j) return 1.0 / p.rho;
    if (i == n && j == n) return -1.0 / p.rho;
    return 0.0;
  }
  // k is an x index
  if (i == 0 && j == k) return -cot;
  if (i == k && j == n) return -1.0 / p.rho;
  return 0.0;
}

void suite_metric_invariants(Ctx& ctx) {
  const char* S = "metric-invariants";
  AdmissibleMetric m = ctx.cfg.make_metric();
  AdmissibleMetric mp = perturbed_metric(ctx.cfg.n, 0.3);

  double asym = 0.0, min_eig = kInf, inv_dev = 0.0, conf_dev = 0.0;
  for (int s = 0; s < 24; ++s) {
    PolarPoint p = ctx.sample_point(0.02, 2.0 * ctx.cfg.rho_max);
    for (const AdmissibleMetric* mm : {&m, &mp}) {
      Mat g = mm->metric(p);
      asym = std::max(asym, (g - g.transpose()).cwiseAbs().maxCoeff());
      Eigen::SelfAdjointEigenSolver<Mat> es(g, Eigen::EigenvaluesOnly);
      min_eig = std::min(min_eig, es.eigenvalues().minCoeff() /
                                      es.eigenvalues().maxCoeff());
      Mat gi = mm->metric_inverse(p);
      inv_dev = std::max(inv_dev,
                         (g * gi - Mat::Identity(g.rows(), g.cols()))
                             .cwiseAbs()
                             .maxCoeff());
      double r2 = p.r() * p.r();
      Mat gb = mm->compactified(p);
      conf_dev = std::max(conf_dev, ((gb - r2 * g).cwiseAbs().maxCoeff()) /
                                        gb.cwiseAbs().maxCoeff());
    }
  }
  ctx.add(S, "metric-symmetry", "assembled metric equals its transpose bit-exactly",
          asym, 0.0, asym == 0.0);
  ctx.add(S, "metric-positive-definite",
          "metric positive definite at sampled interior points (relative min eigenvalue)",
          min_eig, 0.0, min_eig > 0.0);
  ctx.add(S, "inverse-consistency", "max |g g^-1 - I| over samples", inv_dev,
          1e-10, inv_dev <= 1e-10);
  ctx.add(S, "conformal-consistency",
          "compactified metric equals (rho sin theta)^2 g (relative)", conf_dev,
          1e-12, conf_dev <= 1e-12);
}

void suite_hyperbolic_exactness(Ctx& ctx) {
  const char* S = "hyperbolic-exactness";
  const int n = ctx.cfg.n;
  AdmissibleMetric m = hyperbolic_metric(n);

  double worst = 0.0;
  for (int s = 0; s < 6; ++s) {
    PolarPoint p = ctx.sample_point(0.3, 2.0);
    SymTensor gam = christoffel(m, p);
    for (int k = 0; k <= n; ++k)
      for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j)
          worst = std::max(worst, std::abs(gam.at(k, i, j) -
                                           hyperbolic_christoffel(n, p, k, i, j)));
    Mat g = m.metric(p);
    SymTensor R = riemann(m, p);
    for (int i = 0; i <= n; ++i)
      for (int j = i + 1; j <= n; ++j)
        worst = std::max(worst, std::abs(sectional_curvature(R, g, i, j) + 1.0));
    worst = std::max(worst, g_norm(pinch_residual(m, p), m, p));
    worst = std::max(worst, hessian_cot_residual(m, p).second);
  }
  ctx.add(S, "hyperbolic-exact",
          "model Christoffels, sectional curvature -1, pinch and Hessian "
          "residuals reproduce closed forms",
          worst, 1e-8, worst <= 1e-8);

  // First Bianchi on a perturbed metric (pair symmetries hold bit-exactly
  // by assembly).
  AdmissibleMetric mp = perturbed_metric(n, 0.3);
  double bianchi = 0.0;
  for (int s = 0; s < 4; ++s) {
    PolarPoint p = ctx.sample_point(0.1, 0.5);
    SymTensor R = riemann(mp, p);
    double scale = 0.0;
    for (double v : R.data()) scale = std::max(scale, std::abs(v));
    for (int i = 0; i <= n; ++i)
      for (int j = 0; j <= n; ++j)
        for (int k = 0; k <= n; ++k)
          for (int l = 0; l <= n; ++l) {
            double c = R.at(i, j, k, l) + R.at(i, k, l, j) + R.at(i, l, j, k);
            bianchi = std::max(bianchi, std::abs(c) / scale);
          }
  }
  ctx.add(S, "riemann-symmetries",
          "curvature pair symmetries bit-exact; first Bianchi relative residual",
          bianchi, 1e-8, bianchi <= 1e-8);
}

void suite_decay_rates(Ctx& ctx) {
  const char* S = "decay-rates";
  const int n = ctx.cfg.n;
  const std::vector<double> rhos{0.2, 0.1, 0.05, 0.025};
  const std::vector<double> sins{0.4, 0.2, 0.1, 0.05};
  Vec x = Vec::Constant(n - 1, 0.1);

  double hess_slope = kInf, pinch_rho_slope = kInf, pinch_sin_slope = kInf;
  bool hess_ok = true, pr_ok = true, ps_ok = true;
  std::ostringstream detail;
  for (double amp : {0.1, 0.3}) {
    AdmissibleMetric mp = perturbed_metric(n, amp);
    std::vector<double> eh, ep;
    for (double rho : rhos) {
      PolarPoint p(1.0, x, rho);
      eh.push_back(hessian_cot_residual(mp, p).second);
      ep.push_back(g_norm(pinch_residual(mp, p), mp, p));
    }
    RateFit fh = rate_fit(rhos, eh, 0.9);
    RateFit fp = rate_fit(rhos, ep, 0.9);
    std::vector<double> es;
    for (double sv : sins) {
      PolarPoint p(std::asin(sv), x, 0.1);
      es.push_back(g_norm(pinch_residual(mp, p), mp, p));
    }
    RateFit fs = rate_fit(sins, es, 0.9);
    hess_slope = std::min(hess_slope, fh.exact ? kInf : fh.slope);
    pinch_rho_slope = std::min(pinch_rho_slope, fp.exact ? kInf : fp.slope);
    pinch_sin_slope = std::min(pinch_sin_slope, fs.exact ? kInf : fs.slope);
    hess_ok = hess_ok && fh.pass;
    pr_ok = pr_ok && fp.pass;
    ps_ok = ps_ok && fs.pass;
    detail << "amp=" << amp << ": hess " << fh.slope << " (r2 " << fh.r2
           << "), pinch-rho " << fp.slope << " (r2 " << fp.r2
           << "), pinch-sin " << fs.slope << " (r2 " << fs.r2 << "); ";
  }
  ctx.add(S, "hessian-decay-rho",
          "Hessian residual of cot(theta) vanishes linearly in rho (log-log slope)",
          hess_slope, 0.9, hess_ok, detail.str());
  ctx.add(S, "pinch-decay-rho",
          "curvature pinch residual vanishes linearly in rho (log-log slope)",
          pinch_rho_slope, 0.9, pr_ok);
  ctx.add(S, "pinch-decay-sintheta",
          "curvature pinch residual vanishes linearly in sin(theta) (log-log slope)",
          pinch_sin_slope, 0.9, ps_ok);
}

// ------------------------------------------------------------------ flow ----

void suite_flow_oracle(Ctx& ctx) {
  const char* S = "flow-oracle";
  const int n = ctx.cfg.n;
  AdmissibleMetric m = hyperbolic_metric(n);
  const double tol = std::min(ctx.cfg.tol, 1e-11);

  double worst = 0.0, drift = 0.0;
  int non_monotone = 0;
  for (double theta0 : {M_PI / 4, M_PI / 2, 2 * M_PI / 3}) {
    for (double rho0 : {0.5, 1.0, 2.0}) {
      BoundaryQ Q = BoundaryQ::constant(theta0);
      PolarPoint q(theta0, Vec::Zero(n - 1), rho0);
      Trajectory tr = integrate(m, initial_state(m, Q, q), ctx.cfg.t_end, tol,
                                {0.0, 4000000});
      HyperbolicOracle orc(1.0 / std::tan(theta0), rho0, Vec::Zero(n - 1));
      for (int i = 0; i <= 100; ++i) {
        double t = ctx.cfg.t_end * i / 100.0;
        FlowState got = tr.at(t), want = orc.state(t);
        worst = std::max(worst, std::abs(got.theta - want.theta));
        worst = std::max(worst, std::abs(got.rho - want.rho));
        worst = std::max(worst, (got.x - want.x).cwiseAbs().maxCoeff());
        worst = std::max(worst, std::abs(got.xibar0 + 1.0));
        worst = std::max(worst, got.xibar.cwiseAbs().maxCoeff());
      }
      TrajectoryStats st = trajectory_stats(m, tr, &Q);
      drift = std::max(drift, st.norm_drift_max);
      if (!st.theta_monotone) ++non_monotone;
    }
  }
  ctx.add(S, "oracle-agreement",
          "integrated model geodesics match the circle family in every "
          "coordinate on [0, t_end]",
          worst, 1e-8, worst <= 1e-8);

  double fiber_dev = 0.0;
  for (double theta_q : {M_PI / 4, M_PI / 2, 2 * M_PI / 3}) {
    FlowState s0;
    s0.theta = theta_q;
    s0.x = Vec::Constant(n - 1, 0.3);
    s0.rho = 0.0;
    s0.xibar0 = -1.0;
    s0.xibar = Vec::Zero(n);
    Trajectory tr = integrate(m, s0, 20.0, tol, {0.0, 4000000});
    for (const auto& smp : tr.samples) {
      fiber_dev = std::max(fiber_dev, std::abs(smp.state.theta -
                                               boundary_fiber_theta(theta_q, smp.t)));
      fiber_dev = std::max(fiber_dev,
                           (smp.state.x - s0.x).cwiseAbs().maxCoeff());
      fiber_dev = std::max(fiber_dev, std::abs(smp.state.rho));
      fiber_dev = std::max(fiber_dev, std::abs(smp.state.xibar0 + 1.0));
      fiber_dev = std::max(fiber_dev, smp.state.xibar.cwiseAbs().maxCoeff());
      drift = std::max(drift, smp.norm_drift);
    }
  }
  ctx.add(S, "fiber-exactness",
          "corner-fiber trajectories reproduce the exact linear-in-v solution",
          fiber_dev, 1e-9, fiber_dev <= 1e-9);
  ctx.add(S, "norm-conservation", "max norm drift across suite trajectories",
          drift, 100.0 * tol, drift <= 100.0 * tol);
  ctx.add(S, "theta-monotonicity",
          "theta strictly decreasing along every normal trajectory",
          static_cast<double>(non_monotone), 0.0, non_monotone == 0);
}

void suite_flow_asymptotics(Ctx& ctx) {
  const char* S = "flow-asymptotics";
  const int n = ctx.cfg.n;
  AdmissibleMetric m = ctx.cfg.make_metric();
  BoundaryQ Q = ctx.cfg.make_boundary();
  const double tol = std::min(ctx.cfg.tol, 1e-11);

  auto residual = [&](const FlowState& s) {
    return hessian_cot_residual(m, s.point()).second;
  };

  double worst_violation = 0.0, min_lead = kInf;
  double a1 = kInf, a2 = 0.0, cov = 0.0;
  bool sandwich_ok = true, growth_ok = true;
  std::vector<double> rho_sweep{0.1, 0.05, 0.02, 0.01};
  std::vector<double> ratio_sweep, drift_sweep;
  for (double rho0 : rho_sweep) {
    Vec x0 = Vec::Constant(n - 1, 0.15);
    PolarPoint q = Q.at(x0, rho0);
    Trajectory tr = integrate(m, initial_state(m, Q, q), ctx.cfg.t_end, tol,
                              {0.0, 4000000});
    SandwichReport sr = sandwich_check(m, tr, residual);
    sandwich_ok = sandwich_ok && sr.value_sandwich && sr.derivative_sandwich;
    growth_ok = growth_ok && sr.growth_floor;
    worst_violation = std::min(worst_violation, sr.worst_violation);
    min_lead = std::min(min_lead, sr.envelope.leading_coefficient());

    TrajectoryStats st = trajectory_stats(m, tr, &Q);
    a1 = std::min(a1, st.angle_lower);
    a2 = std::max(a2, st.angle_upper);
    ratio_sweep.push_back(st.rho_upper / st.rho_lower);
    drift_sweep.push_back(st.x_drift);
    cov = std::max(cov, std::max(st.cov_growth, st.cov0_decay));
  }

  ctx.add(S, "sandwich-bounds",
          "cot(theta) and its derivative stay inside the comparison envelopes "
          "(with the measured residual bound); growth floor holds",
          -worst_violation, 0.0, sandwich_ok && growth_ok);
  ctx.add(S, "envelope-positivity",
          "leading comparison coefficient positive at every accepted start",
          min_lead, 0.0, min_lead > 0.0);
  ctx.add(S, "angle-decay",
          "e^t sin(theta) pinched between positive finite constants (measured sup)",
          a2, 0.0, a1 > 0.0 && std::isfinite(a2),
          "A1=" + std::to_string(a1) + " A2=" + std::to_string(a2));

  bool conf_ok = ratio_sweep.back() <= 1.25;
  for (size_t i = 0; i + 1 < ratio_sweep.size(); ++i)
    conf_ok = conf_ok && ratio_sweep[i + 1] <= ratio_sweep[i] * (1.0 + 1e-6);
  {
    std::ostringstream ss;
    ss << "C/eps over rho0 sweep:";
    for (double r : ratio_sweep) ss << " " << r;
    ctx.add(S, "radial-confinement",
            "rho confined to [eps, C] rho0 with C/eps -> 1 as rho0 -> 0",
            ratio_sweep.back(), 1.25, conf_ok, ss.str());
  }

  {
    bool exact = true;
    for (double d : drift_sweep) exact = exact && d < 1e-14;
    double slope = 2.0;
    bool ok = true;
    std::string det = "numerically exact";
    if (!exact) {
      RateFit rf = rate_fit(rho_sweep, drift_sweep, 1.7);
      slope = rf.slope;
      ok = rf.slope >= 1.7 && rf.slope <= 2.3 && rf.r2 >= 0.95;
      det = "r2=" + std::to_string(rf.r2);
    }
    ctx.add(S, "tangential-drift",
            "sup_t |x(t) - x(0)| scales like rho0^2 (log-log slope 2 +- 0.3)",
            slope, 2.0, ok, det);
  }
  ctx.add(S, "covariable-growth",
          "covariables bounded: sup |xibar_mu|/(1+t) and sup e^t |xibar0 + 1|",
          cov, 1e3, std::isfinite(cov) && cov < 1e3);
}

// ---------------------------------------------------------------- expmap ----

void suite_expmap(Ctx& ctx) {
  const char* S = "expmap";
  const int n = ctx.cfg.n;
  AdmissibleMetric m = ctx.cfg.make_metric();
  BoundaryQ Q = ctx.cfg.make_boundary();
  ExpMapOptions eo;
  eo.tol = std::min(ctx.cfg.tol, 1e-11);
  eo.handoff = ctx.cfg.handoff;
  ExpMap em(m, Q, eo);

  double zero_dev = 0.0;
  for (int s = 0; s < 8; ++s) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Vec x = Vec::Constant(n - 1, ctx.cfg.x_min +
                                     (ctx.cfg.x_max - ctx.cfg.x_min) * u(ctx.rng));
    double rho = ctx.cfg.rho_min +
                 (ctx.cfg.rho_max - ctx.cfg.rho_min) * u(ctx.rng);
    PolarPoint img = em.shoot(0.0, x, rho);
    zero_dev = std::max(zero_dev, std::abs(img.theta - Q.psi(x, rho)));
    zero_dev = std::max(zero_dev, (img.x - x).cwiseAbs().maxCoeff());
    zero_dev = std::max(zero_dev, std::abs(img.rho - rho));
  }
  ctx.add(S, "zero-section-identity", "exp(0, q) = q", zero_dev, 1e-12,
          zero_dev <= 1e-12);

  double fiber_dev = 0.0, vlin = 0.0;
  for (double xv : {-0.3, 0.2}) {
    Vec x = Vec::Constant(n - 1, xv);
    double theta_q = Q.psi(x, 0.0);
    for (int i = 0; i <= 10; ++i) {
      double tau = i / 10.0;
      PolarPoint img = em.shoot(tau, x, 0.0);
      fiber_dev = std::max(fiber_dev, std::abs(img.rho));
      fiber_dev = std::max(fiber_dev, (img.x - x).cwiseAbs().maxCoeff());
      vlin = std::max(vlin, std::abs(v_of_theta(img.theta) -
                                     v_of_theta(theta_q) * (1.0 - tau)));
    }
  }
  ctx.add(S, "fiber-preservation",
          "corner-fiber points stay on their fiber with x frozen", fiber_dev,
          1e-12, fiber_dev <= 1e-12);
  ctx.add(S, "v-linearity", "v(theta) along fibers is linear in tau", vlin,
          1e-9, vlin <= 1e-9);

  double c_measured = kInf;
  for (double tau : {0.0, 0.5, 0.9, 1.0}) {
    for (int i = 0; i < 3; ++i) {
      Vec x = Vec::Constant(n - 1, ctx.cfg.x_min +
                                       (ctx.cfg.x_max - ctx.cfg.x_min) * i / 2.0);
      double rho = ctx.cfg.rho_min +
                   (ctx.cfg.rho_max - ctx.cfg.rho_min) * (i + 1) / 4.0;
      c_measured = std::min(c_measured,
                            differential_lower_bound(em, tau, x, rho, 1e-4));
    }
  }
  ctx.add(S, "differential-lower-bound",
          "|d exp(Y)|_gbar >= c |Y|_gbar with positive measured c up to tau = 1",
          c_measured, 0.0, c_measured > 0.0);

  // Jacobi floor with measured kappa and beta.
  double floor_margin = kInf;
  bool floor_ok = true;
  std::ostringstream jdetail;
  for (int i = 0; i < 2; ++i) {
    Vec x = Vec::Constant(n - 1, 0.1 * (i + 1));
    double rho = std::max(ctx.cfg.rho_min, 0.05) * (i + 1);
    PolarPoint q = Q.at(x, rho);
    FlowState s0 = initial_state(m, Q, q);
    Trajectory tr = integrate(m, s0, 8.0, eo.tol, {0.0, 4000000});

    double kappa = shape_operator(m, Q, q).kappa;
    double max_sec = -kInf;
    for (double t = 0.0; t <= 8.0; t += 1.0) {
      PolarPoint p = tr.at(t).point();
      SymTensor R = riemann(m, p);
      Mat g = m.metric(p);
      for (int a = 0; a <= n; ++a)
        for (int b = a + 1; b <= n; ++b)
          max_sec = std::max(max_sec, sectional_curvature(R, g, a, b));
    }
    double beta = 0.95 * (-max_sec);
    if (kappa * kappa >= beta) continue;  // floor hypothesis needs kappa < sqrt(beta)

    auto [J0, DJ0] = jacobi_initial_data(m, Q, q, 1);
    JacobiRun run = jacobi_transport(m, tr, J0, DJ0, 8.0, 1e-10);
    double floor = 0.5 * (1.0 - kappa * kappa / beta) * run.norm[0] * run.norm[0];
    for (size_t k = 0; k < run.norm.size(); ++k) {
      double margin = run.norm[k] * run.norm[k] / floor;
      floor_margin = std::min(floor_margin, margin);
      if (margin < 1.0 - 1e-6) floor_ok = false;
    }
    jdetail << "kappa=" << kappa << " beta=" << beta << "; ";
  }
  ctx.add(S, "jacobi-floor",
          "|J(t)|^2 stays above (1 - kappa^2/beta)/2 |J(0)|^2 with measured "
          "kappa, beta",
          floor_margin, 1.0, floor_ok, jdetail.str());

  int returns = 0;
  for (int i = 0; i < 4; ++i) {
    Vec x = Vec::Constant(n - 1, ctx.cfg.x_min +
                                     (ctx.cfg.x_max - ctx.cfg.x_min) * i / 3.0);
    double rho = ctx.cfg.rho_min + (ctx.cfg.rho_max - ctx.cfg.rho_min) * i / 3.0;
    PolarPoint q = Q.at(x, std::max(rho, 0.02));
    Trajectory tr = integrate(m, initial_state(m, Q, q), ctx.cfg.t_end, eo.tol,
                              {0.0, 4000000});
    if (trajectory_stats(m, tr, &Q).q_return) ++returns;
  }
  ctx.add(S, "no-q-return",
          "no sampled trajectory re-crosses the boundary graph after leaving",
          static_cast<double>(returns), 0.0, returns == 0);
}

// ----------------------------------------------------------- normal form ----

void suite_normal_form(Ctx& ctx) {
  const char* S = "normal-form";
  const int n = ctx.cfg.n;
  AdmissibleMetric m = ctx.cfg.make_metric();
  // The theta-form needs a constant corner angle; fall back to the constant
  // boundary at cfg.theta0 when the configured graph is not constant there.
  BoundaryQ Q = ctx.cfg.make_boundary();
  if (!Q.constant_corner_angle(n)) Q = BoundaryQ::constant(ctx.cfg.theta0);

  NormalFormSpec spec;
  spec.n_param = std::max(5, ctx.cfg.n_param);
  spec.n_x = std::min(ctx.cfg.n_x, 3);
  spec.x_min = ctx.cfg.x_min;
  spec.x_max = ctx.cfg.x_max;
  spec.n_rho = std::max(5, ctx.cfg.n_rho);
  spec.rho_max = ctx.cfg.rho_max;
  spec.tol = 1e-12;

  NormalFormGrid theta_grid = build_theta_form(m, Q, spec);
  NormalFormGrid u_grid = build_u_form(m, Q, spec);

  double cross = std::max(theta_grid.max_cross_residual, u_grid.max_cross_residual);
  ctx.add(S, "gauge-residual",
          "du (dtheta) cross terms of the pulled-back metric vanish "
          "(normalized)", cross, 1e-8, cross <= 1e-8);
  double unit = std::max(theta_grid.max_unit_dev, u_grid.max_unit_dev);
  ctx.add(S, "unit-normal-coefficient",
          "du^2 (dtheta^2) coefficient matches u^-2 (csc^2 theta)", unit, 1e-8,
          unit <= 1e-8);

  // Endpoint identities: the u = 1 row is the induced boundary-graph metric;
  // the theta-form top row carries the extra sin^2(theta0) factor.
  double endpoint_dev = 0.0;
  {
    const int P = static_cast<int>(u_grid.params.size());
    const double s0 = std::sin(theta_grid.theta0);
    for (int ix = 0; ix < u_grid.x_flat_count(); ++ix)
      for (size_t ir = 1; ir < u_grid.rho_nodes.size(); ++ir) {
        Vec x = u_grid.x_at(ix);
        double rho = u_grid.rho_nodes[ir];
        Mat induced = shape_operator(m, Q, Q.at(x, rho)).induced_metric;
        Mat want_u = rho * rho * induced;
        Mat want_th = s0 * s0 * want_u;
        endpoint_dev = std::max(
            endpoint_dev,
            (u_grid.hbar_at(P - 1, ix, static_cast<int>(ir)) - want_u)
                    .cwiseAbs()
                    .maxCoeff() /
                want_u.cwiseAbs().maxCoeff());
        endpoint_dev = std::max(
            endpoint_dev,
            (theta_grid.hbar_at(P - 1, ix, static_cast<int>(ir)) - want_th)
                    .cwiseAbs()
                    .maxCoeff() /
                want_th.cwiseAbs().maxCoeff());
      }
    // u = 0 row against the separately built boundary slice.
    std::vector<Mat> h0 = induced_boundary_metric(m, Q, spec);
    size_t k = 0;
    for (int ix = 0; ix < u_grid.x_flat_count(); ++ix)
      for (size_t ir = 0; ir < u_grid.rho_nodes.size(); ++ir, ++k)
        endpoint_dev = std::max(
            endpoint_dev,
            (u_grid.hbar_at(0, ix, static_cast<int>(ir)) - h0[k])
                    .cwiseAbs()
                    .maxCoeff() /
                std::max(1e-12, h0[k].cwiseAbs().maxCoeff()));
  }
  ctx.add(S, "endpoint-identities",
          "u = 1 row reproduces the induced boundary metric; u = 0 row "
          "matches the boundary-at-infinity slice",
          endpoint_dev, 1e-8, endpoint_dev <= 1e-8);

  double min_eig = kInf, max_eig = 0.0;
  for (const NormalFormGrid* g : {&theta_grid, &u_grid})
    for (const Mat& hb : g->hbar) {
      Eigen::SelfAdjointEigenSolver<Mat> es(hb, Eigen::EigenvaluesOnly);
      min_eig = std::min(min_eig, es.eigenvalues().minCoeff());
      max_eig = std::max(max_eig, es.eigenvalues().maxCoeff());
    }
  ctx.add(S, "conformal-compactness",
          "eigenvalues of rho^2 h stay inside fixed positive bounds",
          min_eig, 1e-2, min_eig > 1e-2 && max_eig < 1e2,
          "max=" + std::to_string(max_eig));

  double ah_dev = 0.0;
  for (size_t p = 0; p < theta_grid.params.size(); ++p)
    for (int ix = 0; ix < theta_grid.x_flat_count(); ++ix) {
      Mat hb = theta_grid.hbar_at(static_cast<int>(p), ix, 0);
      ah_dev = std::max(ah_dev, std::abs(hb.inverse()(n - 1, n - 1) - 1.0));
    }
  ctx.add(S, "ah-normalization",
          "|d rho|^2 = 1 at rho = 0 in every theta slice", ah_dev, 1e-6,
          ah_dev <= 1e-6);

  {
    NormalFormSpec fine = spec;
    fine.n_param = 2 * spec.n_param - 1;
    NormalFormGrid fine_grid = build_theta_form(m, Q, fine);
    double corner = corner_stationarity(fine_grid);
    ctx.add(S, "corner-stationarity",
            "d/dtheta of rho^2 h vanishes on the corner row", corner, 1e-5,
            corner <= 1e-5);

    double stab = 0.0;
    for (size_t p = 0; p < theta_grid.params.size(); ++p)
      for (int ix = 0; ix < theta_grid.x_flat_count(); ++ix)
        for (size_t ir = 0; ir < theta_grid.rho_nodes.size(); ++ir) {
          Mat a = theta_grid.hbar_at(static_cast<int>(p), ix, static_cast<int>(ir));
          Mat b = interp_param(fine_grid, theta_grid.params[p], ix,
                               static_cast<int>(ir));
          stab = std::max(stab, (a - b).cwiseAbs().maxCoeff());
        }
    ctx.add(S, "resolution-stability",
            "two parameter resolutions agree after interpolation", stab, 1e-6,
            stab <= 1e-6);
  }
}

}  // namespace

bool SuiteReport::all_pass() const {
  for (const auto& e : entries)
    if (!e.pass) return false;
  return true;
}

std::string SuiteReport::to_json() const {
  nlohmann::ordered_json j;
  j["report_version"] = 1;
  j["pass"] = all_pass();
  auto arr = nlohmann::ordered_json::array();
  for (const auto& e : entries) {
    nlohmann::ordered_json o;
    o["suite"] = e.suite;
    o["anchor"] = e.anchor;
    o["claim"] = e.claim;
    o["measured"] = e.measured;
    o["target"] = e.target;
    o["pass"] = e.pass;
    if (!e.detail.empty()) o["detail"] = e.detail;
    arr.push_back(std::move(o));
  }
  j["checks"] = std::move(arr);
  return j.dump(2);
}

void SuiteReport::write_csv_summaries(const std::string& dir) const {
  std::map<std::string, std::string> per_suite;
  for (const auto& e : entries) {
    auto& body = per_suite[e.suite];
    if (body.empty()) body = "anchor,claim,measured,target,pass\n";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g,%.17g", e.measured, e.target);
    body += e.anchor + ",\"" + e.claim + "\"," + buf + "," +
            (e.pass ? "PASS" : "FAIL") + "\n";
  }
  std::filesystem::create_directories(dir);
  for (const auto& [suite, body] : per_suite)
    write_file_atomic(dir + "/" + suite + ".csv", body);
}

std::vector<std::string> suite_names() {
  return {"metric-invariants", "hyperbolic-exactness", "decay-rates",
          "flow-oracle",       "flow-asymptotics",     "expmap",
          "normal-form"};
}

SuiteReport run_suites(const RunConfig& cfg) {
  SuiteReport rep;
  const auto known = suite_names();
  for (const auto& s : cfg.suites)
    if (std::find(known.begin(), known.end(), s) == known.end())
      throw config_error("unknown suite '" + s + "'");

  for (const auto& name : known) {
    if (std::find(cfg.suites.begin(), cfg.suites.end(), name) ==
        cfg.suites.end())
      continue;
    Ctx ctx{cfg, &rep, std::mt19937_64(cfg.seed ^ std::hash<std::string>{}(name))};
    if (name == "metric-invariants") suite_metric_invariants(ctx);
    else if (name == "hyperbolic-exactness") suite_hyperbolic_exactness(ctx);
    else if (name == "decay-rates") suite_decay_rates(ctx);
    else if (name == "flow-oracle") suite_flow_oracle(ctx);
    else if (name == "flow-asymptotics") suite_flow_asymptotics(ctx);
    else if (name == "expmap") suite_expmap(ctx);
    else if (name == "normal-form") suite_normal_form(ctx);
  }
  return rep;
}

}  // namespace cornerflow
