#include "sbcm/ode.hpp"

#include <algorithm>
#include <cmath>

namespace sbcm {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

double max_norm(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

bool should_stop(const StepControl& ctl, const Eigen::VectorXd& f) {
  return ctl.stop_tol > 0.0 && max_norm(f) < ctl.stop_tol;
}

OdeOutcome run_rk4(const Rhs& rhs, Eigen::VectorXd y, double t_end, const StepControl& ctl,
                   const StepObserver& observer) {
  if (!(ctl.fixed_step > 0.0)) throw ValidationError("rk4 needs a positive fixed step");
  const auto n = y.size();
  Eigen::VectorXd k1(n), k2(n), k3(n), k4(n);
  OdeOutcome out;
  double t = 0.0;
  rhs(y, k1);
  if (observer && !observer(t, y, k1)) {
    out.stopped_early = true;
  } else if (should_stop(ctl, k1)) {
    out.stopped_early = true;
  }
  while (!out.stopped_early && t < t_end) {
    if (out.steps >= ctl.max_steps) throw IntegrationError("step budget exhausted", y, t);
    double h = std::min(ctl.fixed_step, t_end - t);
    rhs(y + 0.5 * h * k1, k2);
    rhs(y + 0.5 * h * k2, k3);
    rhs(y + h * k3, k4);
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    // Avoid accumulating drift in t when the last step lands on t_end.
    t = (t_end - t - h <= 1e-12 * t_end) ? t_end : t + h;
    ++out.steps;
    if (!y.allFinite()) throw IntegrationError("non-finite state", y, t);
    rhs(y, k1);
    if (observer && !observer(t, y, k1)) out.stopped_early = true;
    if (should_stop(ctl, k1)) out.stopped_early = true;
  }
  out.y = std::move(y);
  out.t = t;
  return out;
}

OdeOutcome run_dopri5(const Rhs& rhs, Eigen::VectorXd y, double t_end, const StepControl& ctl,
                      const StepObserver& observer) {
  const auto n = y.size();
  Eigen::VectorXd k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ynew(n), err(n), tmp(n);
  OdeOutcome out;
  double t = 0.0;
  double h = std::min(ctl.initial_step, t_end);
  const double hmax = ctl.max_step > 0.0 ? ctl.max_step : t_end;
  rhs(y, k1);
  if ((observer && !observer(t, y, k1)) || should_stop(ctl, k1)) out.stopped_early = true;

  while (!out.stopped_early && t < t_end) {
    if (out.steps + out.rejected >= ctl.max_steps)
      throw IntegrationError("step budget exhausted", y, t);
    if (h < 1e-14 * std::max(1.0, std::abs(t)))
      throw IntegrationError("step size underflow at t = " + std::to_string(t), y, t);
    h = std::min({h, hmax, t_end - t});

    tmp = y + h * a21 * k1;
    rhs(tmp, k2);
    tmp = y + h * (a31 * k1 + a32 * k2);
    rhs(tmp, k3);
    tmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    rhs(tmp, k4);
    tmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    rhs(tmp, k5);
    tmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    rhs(tmp, k6);
    ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    rhs(ynew, k7);
    err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    double sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      double sc = ctl.atol + ctl.rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      double r = err[i] / sc;
      sum += r * r;
    }
    double enorm = n ? std::sqrt(sum / static_cast<double>(n)) : 0.0;
    if (!std::isfinite(enorm)) enorm = 1e10;

    if (enorm <= 1.0) {
      t = (t_end - t - h <= 1e-12 * t_end) ? t_end : t + h;
      y.swap(ynew);
      k1.swap(k7);
      ++out.steps;
      if (!y.allFinite()) throw IntegrationError("non-finite state", y, t);
      if (observer && !observer(t, y, k1)) out.stopped_early = true;
      if (should_stop(ctl, k1)) out.stopped_early = true;
      double fac = enorm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(enorm, -0.2), 0.2, 5.0);
      h *= fac;
    } else {
      ++out.rejected;
      h *= std::max(0.2, 0.9 * std::pow(enorm, -0.25));
    }
  }
  out.y = std::move(y);
  out.t = t;
  return out;
}

}  // namespace

OdeOutcome solve_ode(const Rhs& rhs, Eigen::VectorXd y0, double t_end, const StepControl& ctl,
                     const StepObserver& observer) {
  if (!(t_end > 0.0) || !std::isfinite(t_end))
    throw ValidationError("integration horizon must be positive and finite");
  if (!y0.allFinite()) throw ValidationError("initial state has non-finite entries");
  if (ctl.method == StepMethod::rk4) return run_rk4(rhs, std::move(y0), t_end, ctl, observer);
  return run_dopri5(rhs, std::move(y0), t_end, ctl, observer);
}

}  // namespace sbcm
