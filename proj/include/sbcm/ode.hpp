#pragma once

#include "sbcm/core.hpp"

#include <functional>

namespace sbcm {

enum class StepMethod { dopri5, rk4 };

struct StepControl {
  StepMethod method = StepMethod::dopri5;
  double rtol = 1e-8;
  double atol = 1e-10;
  double initial_step = 1e-2;
  // Step length for rk4; also the upper bound on adaptive steps when > 0.
  double fixed_step = 1e-2;
  double max_step = 0.0;
  long max_steps = 50'000'000;
  // Stop as soon as the right-hand side drops below this in the max norm.
  // Nonpositive disables the check.
  double stop_tol = 1e-10;
  // Minimum time between stored samples; 0 stores every accepted step.
  double output_interval = 0.0;
};

using Rhs = std::function<void(const Eigen::VectorXd& y, Eigen::VectorXd& dydt)>;
// Called on every accepted step (t, y, dy/dt at y). Return false to stop.
using StepObserver =
    std::function<bool(double t, const Eigen::VectorXd& y, const Eigen::VectorXd& dydt)>;

struct OdeOutcome {
  Eigen::VectorXd y;
  double t = 0.0;
  long steps = 0;
  long rejected = 0;
  bool stopped_early = false;
};

/// Integrates dy/dt = rhs(y) from t = 0 to t_end. Throws IntegrationError on
/// step-size underflow, non-finite values or exhausted step budget.
OdeOutcome solve_ode(const Rhs& rhs, Eigen::VectorXd y0, double t_end, const StepControl& ctl,
                     const StepObserver& observer = {});

}  // namespace sbcm
