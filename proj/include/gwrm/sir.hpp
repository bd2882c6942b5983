#pragma once

#include <Eigen/Dense>

#include <functional>
#include <stdexcept>
#include <utility>

namespace gwrm {

// Error family raised by the fixed-point solver and the maps it drives.
struct SolveError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// An iterate or map evaluation left the finite domain.
struct DivergenceError : SolveError {
  using SolveError::SolveError;
};
// (I - J) could not be factored/solved reliably.
struct SingularMatrixError : SolveError {
  using SolveError::SolveError;
};
// A map or rhs evaluation produced non-finite values.
struct EvaluationError : SolveError {
  using SolveError::SolveError;
};

enum class SolverMode { picard, newton, semi_implicit };

const char* to_string(SolverMode m);
SolverMode solver_mode_from_string(const std::string& s);

struct SolverConfig {
  SolverMode mode = SolverMode::semi_implicit;
  double tol = 1e-10;          // residual infinity-norm bound
  int max_iters = 100;
  int jacobian_reuse = 3;      // iterations between finite-difference refreshes
  double damping_init = 1.0;   // initial beta for semi_implicit
};

struct SolveStats {
  int iterations = 0;
  double final_residual = 0.0;
  int jacobian_evals = 0;
  bool converged = false;
};

using VectorMap = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

// Forward-difference Jacobian of phi at x, step max(1e-7, 1e-7*|x_j|).
Eigen::MatrixXd jacobian_fd(const VectorMap& phi, const Eigen::VectorXd& x);

// Solve x = phi(x) with residual R(x) = phi(x) - x.
//
// picard:        x <- phi(x)
// newton:        x <- x + (I - J_phi)^{-1} R(x), J refreshed every
//                jacobian_reuse iterations
// semi_implicit: the Newton step scaled by beta; beta halves whenever the
//                residual norm fails to decrease and doubles (capped at 1)
//                after a successful step
//
// Non-convergence within max_iters is a result (converged=false), not an
// exception; a non-finite iterate throws DivergenceError and a singular
// (I - J) throws SingularMatrixError.
std::pair<Eigen::VectorXd, SolveStats> solve_fixed_point(const VectorMap& phi,
                                                         const Eigen::VectorXd& x0,
                                                         const SolverConfig& cfg);

}  // namespace gwrm
