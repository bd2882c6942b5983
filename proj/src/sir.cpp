#include "gwrm/sir.hpp"

#include <cmath>
#include <limits>

namespace gwrm {

namespace {

// Probing evaluations (initial point, Jacobian columns) report a broken map;
// non-finite values appearing while the iteration is underway are divergence.
Eigen::VectorXd apply_map(const VectorMap& phi, const Eigen::VectorXd& x) {
  Eigen::VectorXd fx = phi(x);
  if (!fx.allFinite()) throw EvaluationError("fixed-point map produced non-finite values");
  return fx;
}

Eigen::VectorXd apply_map_iterating(const VectorMap& phi, const Eigen::VectorXd& x) {
  Eigen::VectorXd fx = phi(x);
  if (!fx.allFinite()) throw DivergenceError("iteration left the finite domain");
  return fx;
}

Eigen::MatrixXd jacobian_fd_impl(const VectorMap& phi, const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& fx) {
  const auto n = x.size();
  Eigen::MatrixXd J(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double h = std::max(1e-7, 1e-7 * std::abs(x(j)));
    Eigen::VectorXd xp = x;
    xp(j) += h;
    J.col(j) = (apply_map(phi, xp) - fx) / h;
  }
  return J;
}

// Newton direction (I - J)^{-1} r, with a residual check standing in for a
// rank test (PartialPivLU does not reveal singularity).
Eigen::VectorXd newton_direction(const Eigen::MatrixXd& J, const Eigen::VectorXd& r) {
  const auto n = r.size();
  Eigen::MatrixXd M = Eigen::MatrixXd::Identity(n, n) - J;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
  Eigen::VectorXd d = lu.solve(r);
  if (!d.allFinite() || (M * d - r).norm() > 1e-8 * (r.norm() + 1e-300) * std::max(1.0, M.norm()))
    throw SingularMatrixError("I - J_phi is singular or badly conditioned");
  return d;
}

}  // namespace

const char* to_string(SolverMode m) {
  switch (m) {
    case SolverMode::picard: return "picard";
    case SolverMode::newton: return "newton";
    case SolverMode::semi_implicit: return "semi_implicit";
  }
  return "unknown";
}

SolverMode solver_mode_from_string(const std::string& s) {
  if (s == "picard") return SolverMode::picard;
  if (s == "newton") return SolverMode::newton;
  if (s == "semi_implicit") return SolverMode::semi_implicit;
  throw std::invalid_argument("unknown solver mode '" + s + "'");
}

Eigen::MatrixXd jacobian_fd(const VectorMap& phi, const Eigen::VectorXd& x) {
  return jacobian_fd_impl(phi, x, apply_map(phi, x));
}

std::pair<Eigen::VectorXd, SolveStats> solve_fixed_point(const VectorMap& phi,
                                                         const Eigen::VectorXd& x0,
                                                         const SolverConfig& cfg) {
  if (cfg.tol <= 0) throw std::invalid_argument("SolverConfig: tol must be positive");
  if (cfg.max_iters < 1) throw std::invalid_argument("SolverConfig: max_iters must be >= 1");

  SolveStats stats;
  Eigen::VectorXd x = x0;
  if (!x.allFinite()) throw DivergenceError("non-finite initial guess");

  Eigen::VectorXd fx = apply_map(phi, x);
  Eigen::VectorXd r = fx - x;
  double rnorm = r.lpNorm<Eigen::Infinity>();

  Eigen::MatrixXd J;
  double beta = std::clamp(cfg.damping_init, 0.0, 1.0);
  if (beta == 0.0) beta = 1.0;
  const double beta_floor = 1.0 / 1024.0;
  const int reuse = std::max(1, cfg.jacobian_reuse);

  while (rnorm > cfg.tol) {
    if (stats.iterations >= cfg.max_iters) {
      stats.final_residual = rnorm;
      return {x, stats};
    }

    if (cfg.mode == SolverMode::picard) {
      x = fx;
    } else {
      if (J.size() == 0 || stats.iterations % reuse == 0) {
        J = jacobian_fd_impl(phi, x, fx);
        ++stats.jacobian_evals;
      }
      Eigen::VectorXd d = newton_direction(J, r);

      if (cfg.mode == SolverMode::newton) {
        x += d;
      } else {
        // Damped step with a residual-monotonicity safeguard. A trial point
        // where the map blows up or fails counts as infinitely bad and is
        // backtracked like any other non-improving step.
        bool improved = false;
        while (true) {
          Eigen::VectorXd xt = x + beta * d;
          if (!xt.allFinite()) throw DivergenceError("non-finite iterate");
          Eigen::VectorXd ft;
          double rtn = std::numeric_limits<double>::infinity();
          Eigen::VectorXd rt;
          try {
            ft = phi(xt);
            if (ft.allFinite()) {
              rt = ft - xt;
              rtn = rt.lpNorm<Eigen::Infinity>();
            }
          } catch (const EvaluationError&) {
            // leave rtn infinite
          }
          if (rtn < rnorm || rtn <= cfg.tol) {
            x = xt;
            fx = ft;
            r = rt;
            rnorm = rtn;
            beta = std::min(1.0, 2.0 * beta);
            improved = true;
            break;
          }
          if (beta <= beta_floor) break;
          beta *= 0.5;
        }
        ++stats.iterations;
        if (!improved) {
          stats.final_residual = rnorm;
          return {x, stats};  // stalled below the damping floor
        }
        continue;
      }
    }

    if (!x.allFinite()) throw DivergenceError("non-finite iterate");
    fx = apply_map_iterating(phi, x);
    r = fx - x;
    rnorm = r.lpNorm<Eigen::Infinity>();
    ++stats.iterations;
  }

  stats.final_residual = rnorm;
  stats.converged = true;
  return {x, stats};
}

}  // namespace gwrm
