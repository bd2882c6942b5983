#include "gwrm/refsolvers.hpp"

#include <cmath>

namespace gwrm {

namespace {

constexpr double kHugeError = 1e10;

struct Controller {
  double safety = 0.9;
  double fac_min = 0.2;
  double fac_max = 5.0;
  double exponent;  // 1/(order+1)

  double next_h(double h, double err, double h_min, double h_max) const {
    double fac = safety * std::pow(1.0 / std::max(err, 1e-10), exponent);
    fac = std::clamp(fac, fac_min, fac_max);
    return std::clamp(h * fac, h_min, h_max);
  }
};

double scaled_error(const Eigen::VectorXd& diff, const Eigen::VectorXd& u,
                    const Eigen::VectorXd& unew, double divisor, double rtol, double atol) {
  if (!diff.allFinite() || !unew.allFinite()) return kHugeError;
  double err = 0.0;
  for (Eigen::Index i = 0; i < diff.size(); ++i) {
    double sc = atol + rtol * std::max(std::abs(u(i)), std::abs(unew(i)));
    err = std::max(err, std::abs(diff(i)) / divisor / sc);
  }
  return std::isfinite(err) ? err : kHugeError;
}

void validate(const StepperConfig& cfg, double h0) {
  if (!(cfg.h_min > 0 && cfg.h_min <= h0 && h0 <= cfg.h_max))
    throw std::invalid_argument("StepperConfig: need 0 < h_min <= h0 <= h_max");
  if (cfg.max_steps < 1) throw std::invalid_argument("StepperConfig: max_steps must be >= 1");
  if (!(cfg.rel_tol > 0) || !(cfg.abs_tol >= 0))
    throw std::invalid_argument("StepperConfig: tolerances must be positive");
}

// Shared adaptive loop; `attempt` returns (u_new, error) for a trial step.
template <typename Attempt>
Trajectory march(const OdeProblem& p, const StepperConfig& cfg, const Controller& ctrl,
                 const Attempt& attempt) {
  const double span = p.t_end - p.t_start;
  double h = cfg.h0 > 0 ? cfg.h0 : span / 1000.0;
  validate(cfg, h);
  const double stag_thresh = std::max(2.0 * cfg.h_min, 1e-6 * span);
  const bool fixed_step = cfg.h_min == cfg.h_max;

  Trajectory traj;
  double t = p.t_start;
  Eigen::VectorXd u = p.u0;
  traj.times.push_back(t);
  traj.states.push_back(u);
  traj.derivs.push_back(p.rhs(t, u));
  long small_attempts = 0;

  while (t < p.t_end) {
    double h_try = std::min(h, p.t_end - t);
    auto [unew, err] = attempt(t, u, h_try);

    if (!fixed_step) {
      if (h_try < stag_thresh)
        ++small_attempts;
      else if (err <= 1.0)
        small_attempts = 0;
      if (small_attempts >= cfg.stagnation_window) {
        traj.status = RunStatus::stagnated;
        return traj;
      }
    }

    bool finite = unew.allFinite();
    bool accept = (err <= 1.0) || (fixed_step && finite);
    if (accept) {
      t += h_try;
      u = unew;
      traj.times.push_back(t);
      traj.states.push_back(u);
      traj.derivs.push_back(p.rhs(t, u));
      ++traj.steps_taken;
      if (traj.steps_taken >= cfg.max_steps && t < p.t_end) {
        traj.status = RunStatus::stagnated;  // budget exhausted before t_end
        return traj;
      }
    } else {
      ++traj.steps_rejected;
      if (h_try <= cfg.h_min * (1.0 + 1e-12) && !finite) {
        traj.status = RunStatus::failed;  // cannot shrink further
        return traj;
      }
    }
    h = ctrl.next_h(h_try, err, cfg.h_min, cfg.h_max);
  }
  traj.status = RunStatus::completed;
  return traj;
}

}  // namespace

Eigen::VectorXd rk4_step(const OdeProblem::Rhs& rhs, double t, const Eigen::VectorXd& u,
                         double h) {
  Eigen::VectorXd k1 = rhs(t, u);
  Eigen::VectorXd k2 = rhs(t + 0.5 * h, u + 0.5 * h * k1);
  Eigen::VectorXd k3 = rhs(t + 0.5 * h, u + 0.5 * h * k2);
  Eigen::VectorXd k4 = rhs(t + h, u + h * k3);
  return u + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

std::pair<Eigen::VectorXd, bool> trapezoid_step(const OdeProblem& p, double t,
                                                const Eigen::VectorXd& u, double h,
                                                const SolverConfig& newton) {
  Eigen::VectorXd fn = p.rhs(t, u);
  if (!fn.allFinite()) return {u, false};
  Eigen::VectorXd base = u + 0.5 * h * fn;
  VectorMap psi = [&p, &base, t, h](const Eigen::VectorXd& x) {
    return Eigen::VectorXd(base + 0.5 * h * p.rhs(t + h, x));
  };
  try {
    auto [x, stats] = solve_fixed_point(psi, u + h * fn, newton);
    return {x, stats.converged};
  } catch (const SolveError&) {
    return {u, false};
  }
}

Trajectory rk4_adaptive(const OdeProblem& p, const StepperConfig& cfg) {
  Controller ctrl{.exponent = 0.2};
  auto attempt = [&p, &cfg](double t, const Eigen::VectorXd& u, double h) {
    Eigen::VectorXd u1 = rk4_step(p.rhs, t, u, h);
    Eigen::VectorXd mid = rk4_step(p.rhs, t, u, 0.5 * h);
    Eigen::VectorXd u2 = mid.allFinite() ? rk4_step(p.rhs, t + 0.5 * h, mid, 0.5 * h) : mid;
    double err = u1.allFinite() ? scaled_error(u2 - u1, u, u2, 15.0, cfg.rel_tol, cfg.abs_tol)
                                : kHugeError;
    return std::make_pair(std::move(u2), err);
  };
  return march(p, cfg, ctrl, attempt);
}

Trajectory trapezoid_adaptive(const OdeProblem& p, const StepperConfig& cfg,
                              const SolverConfig& newton) {
  Controller ctrl{.exponent = 1.0 / 3.0};
  auto attempt = [&p, &cfg, &newton](double t, const Eigen::VectorXd& u, double h) {
    auto [u1, ok1] = trapezoid_step(p, t, u, h, newton);
    auto [mid, ok2] = trapezoid_step(p, t, u, 0.5 * h, newton);
    std::pair<Eigen::VectorXd, bool> second =
        ok2 ? trapezoid_step(p, t + 0.5 * h, mid, 0.5 * h, newton) : std::make_pair(mid, false);
    if (!(ok1 && ok2 && second.second)) {
      // inner Newton failed: force rejection so the controller shrinks h
      Eigen::VectorXd bad =
          Eigen::VectorXd::Constant(u.size(), std::numeric_limits<double>::quiet_NaN());
      return std::make_pair(std::move(bad), kHugeError);
    }
    double err = scaled_error(second.first - u1, u, second.first, 3.0, cfg.rel_tol, cfg.abs_tol);
    return std::make_pair(std::move(second.first), err);
  };
  return march(p, cfg, ctrl, attempt);
}

}  // namespace gwrm
