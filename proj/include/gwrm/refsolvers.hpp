#pragma once

#include "gwrm/problems.hpp"
#include "gwrm/sir.hpp"

#include <limits>

namespace gwrm {

struct StepperConfig {
  double rel_tol = 1e-6;
  double abs_tol = 1e-9;
  double h0 = 0.0;      // 0 -> span/1000
  double h_min = 1e-14;
  double h_max = std::numeric_limits<double>::infinity();
  long max_steps = 100000;
  // Step attempts with h < max(2*h_min, 1e-6*span) allowed before the run is
  // declared stagnated; an accepted step at or above that threshold resets
  // the count.
  long stagnation_window = 10000;
};

// One classical RK4 step.
Eigen::VectorXd rk4_step(const OdeProblem::Rhs& rhs, double t, const Eigen::VectorXd& u,
                         double h);

// One implicit trapezoid step, solved by Newton iteration on
// x = u + (h/2)(f(t,u) + f(t+h,x)). Returns the step and whether the inner
// solve converged.
std::pair<Eigen::VectorXd, bool> trapezoid_step(const OdeProblem& p, double t,
                                                const Eigen::VectorXd& u, double h,
                                                const SolverConfig& newton);

// Adaptive RK4 with step-doubling error control: error = |u_{2x h/2} - u_h|/15
// against abs_tol + rel_tol*|u| per component, update factor
// 0.9*(1/error)^{1/5} clipped to [0.2, 5]. Setting h_min = h0 = h_max gives a
// fixed-step run (finite steps are then always accepted).
Trajectory rk4_adaptive(const OdeProblem& p, const StepperConfig& cfg);

// Adaptive implicit trapezoid (A-stable), step-halving error estimate with
// divisor 3 and controller exponent 1/3; the inner Newton solve reuses the
// fixed-point solver in newton mode with per-step Jacobian refresh.
Trajectory trapezoid_adaptive(const OdeProblem& p, const StepperConfig& cfg,
                              const SolverConfig& newton);

}  // namespace gwrm
