#ifndef CORNERFLOW_RK45_HPP_
#define CORNERFLOW_RK45_HPP_

#include <cmath>
#include <functional>
#include <vector>

#include "cornerflow/errors.hpp"
#include "cornerflow/polar.hpp"

namespace cornerflow {

/// Embedded Dormand-Prince 5(4) pair with the standard quartic dense-output
/// interpolant. Integrates in either time direction; an optional scalar event
/// function stops the run at its first zero crossing from positive values
/// (located on the dense output by bisection).
struct Rk45Options {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  double initial_step = 1e-3;
  long max_steps = 2000000;
};

struct Rk45Step {
  double t0 = 0.0, h = 0.0;
  Vec rc1, rc2, rc3, rc4, rc5;

  Vec eval(double t) const {
    double s = (t - t0) / h;
    double s1 = 1.0 - s;
    return rc1 + s * (rc2 + s1 * (rc3 + s * (rc4 + s1 * rc5)));
  }
};

struct Rk45Solution {
  std::vector<Rk45Step> steps;
  double t_begin = 0.0, t_end = 0.0;
  Vec y_end;
  bool event_stopped = false;
  long n_accepted = 0, n_rejected = 0;

  bool forward() const { return t_end >= t_begin; }

  /// Dense evaluation; t is clamped to the covered interval.
  Vec eval(double t) const {
    if (steps.empty()) return y_end;
    if (forward() ? t >= t_end : t <= t_end) return y_end;
    size_t lo = 0, hi = steps.size();
    while (hi - lo > 1) {
      size_t mid = (lo + hi) / 2;
      bool left = forward() ? t < steps[mid].t0 : t > steps[mid].t0;
      if (left) hi = mid; else lo = mid;
    }
    return steps[lo].eval(t);
  }
};

using OdeRhs = std::function<Vec(double, const Vec&)>;
using OdeEvent = std::function<double(double, const Vec&)>;

inline Rk45Solution rk45_integrate(const OdeRhs& f, double t0, const Vec& y0,
                                   double t1, const Rk45Options& opt,
                                   const OdeEvent& event = nullptr) {
  static const double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static const double a21 = 1.0 / 5;
  static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                      a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                      a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                      a65 = -5103.0 / 18656;
  static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                      b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static const double e1 = b1 - 5179.0 / 57600, e3 = b3 - 7571.0 / 16695,
                      e4 = b4 - 393.0 / 640, e5 = b5 + 92097.0 / 339200,
                      e6 = b6 - 187.0 / 2100, e7 = -1.0 / 40;
  static const double d1 = -12715105075.0 / 11282082432.0,
                      d3 = 87487479700.0 / 32700410799.0,
                      d4 = -10690763975.0 / 1880347072.0,
                      d5 = 701980252875.0 / 199316789632.0,
                      d6 = -1453857185.0 / 822651844.0,
                      d7 = 69997945.0 / 29380423.0;

  Rk45Solution sol;
  sol.t_begin = t0;
  sol.t_end = t0;
  sol.y_end = y0;
  if (t1 == t0) return sol;

  const double dir = t1 > t0 ? 1.0 : -1.0;
  double t = t0;
  Vec y = y0;
  Vec k1 = f(t, y);
  double h = dir * std::min(std::abs(opt.initial_step), std::abs(t1 - t0));
  double ev_prev = event ? event(t, y) : 1.0;

  for (long step = 0; step < opt.max_steps; ++step) {
    bool last = false;
    if (dir * (t + h - t1) > 0.0) {
      h = t1 - t;
      last = true;
    }
    if (std::abs(h) < 1e-14 * std::max(1.0, std::abs(t))) {
      if (last) {  // within an ulp of the target
        sol.t_end = t;
        sol.y_end = y;
        return sol;
      }
      throw integration_error("step size collapsed", t,
                              {y.data(), y.data() + y.size()});
    }

    Vec k2 = f(t + c2 * h, y + h * (a21 * k1));
    Vec k3 = f(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
    Vec k4 = f(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
    Vec k5 = f(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    Vec k6 = f(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    Vec dy = h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    Vec y1 = y + dy;
    Vec k7 = f(t + h, y1);

    Vec err_vec = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    double err = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      double sc = opt.abs_tol +
                  opt.rel_tol * std::max(std::abs(y[i]), std::abs(y1[i]));
      double r = err_vec[i] / sc;
      err += r * r;
    }
    err = std::sqrt(err / static_cast<double>(y.size()));

    if (err <= 1.0) {
      Rk45Step st;
      st.t0 = t;
      st.h = h;
      st.rc1 = y;
      st.rc2 = dy;
      st.rc3 = h * k1 - dy;
      st.rc4 = dy - h * k7 - st.rc3;
      st.rc5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
      sol.steps.push_back(st);
      ++sol.n_accepted;

      t += h;
      y = y1;
      k1 = k7;  // FSAL

      if (event) {
        double ev = event(t, y);
        if (ev_prev > 0.0 && ev <= 0.0) {
          // Bisect on the dense interpolant of the step just taken.
          double lo = st.t0, hi = t;
          for (int it = 0; it < 200 && std::abs(hi - lo) > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
            double mid = 0.5 * (lo + hi);
            if (event(mid, st.eval(mid)) > 0.0) lo = mid; else hi = mid;
          }
          sol.t_end = hi;
          sol.y_end = st.eval(hi);
          sol.event_stopped = true;
          return sol;
        }
        ev_prev = ev;
      }

      if (last || t == t1 || dir * (t - t1) >= 0.0) {
        sol.t_end = t1;
        sol.y_end = y;
        return sol;
      }
      double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
      h *= std::min(5.0, std::max(0.2, fac));
    } else {
      ++sol.n_rejected;
      double fac = 0.9 * std::pow(err, -0.2);
      h *= std::min(1.0, std::max(0.1, fac));
    }
  }
  throw integration_error("maximum step count exceeded", t,
                          {y.data(), y.data() + y.size()});
}

}  // namespace cornerflow

#endif  // CORNERFLOW_RK45_HPP_
