#pragma once

#include "gwrm/chebyshev.hpp"
#include "gwrm/problems.hpp"
#include "gwrm/sir.hpp"

#include <optional>
#include <string>
#include <vector>

namespace gwrm {

struct GwrmConfig {
  int K = 8;                   // temporal order per interval
  double epsilon = 1e-3;       // tail-ratio acceptance bound
  double initial_dt = 0.0;     // 0 -> the full span
  double min_dt = 0.0;         // 0 -> 1e-9 * span
  double max_dt = 0.0;         // 0 -> span
  double shrink = 0.5;
  double grow = 1.5;
  double grow_threshold = 0.1;  // grow when ratio < grow_threshold * epsilon
  // Per-variable tails below tail_floor times the largest variable's
  // leading-coefficient mass (or below solver.tol) count as resolved:
  // a variable orders of magnitude smaller than the system scale cannot
  // support a purely relative demand once its tail is dominated by solve
  // noise, and letting it drive the policy freezes or thrashes dt.
  double tail_floor = 1e-6;
  SolverConfig solver;
};

enum class GwrmStatus { completed, partial };

// Piecewise Chebyshev solution over contiguous time intervals.
struct GwrmSolution {
  std::vector<ChebSeries> pieces;
  int interval_count = 0;
  long total_iterations = 0;
  int resolve_count = 0;               // shrink-and-resolve events
  std::vector<double> tail_ratios;     // accepted per-interval max ratio
  GwrmStatus status = GwrmStatus::completed;
  std::string message;

  double t_start() const { return pieces.front().interval().t0; }
  double t_end() const { return pieces.back().interval().t1; }
  long total_modes() const;            // sum over pieces of (K+1)

  Eigen::VectorXd eval(double t) const;
  Eigen::MatrixXd eval_many(const std::vector<double>& ts) const;
};

// The weighted-residual fixed-point map for one interval.
//
// b holds the initial-condition coefficients (b_{i0} = 2 u0_i, rest 0).
// phi maps flattened coefficients a (row-major, variable i major) to
// b + coefficients of the integral from t0 of the rhs applied to the
// candidate series, truncated back to order K with the zeroth mode
// re-anchored so the integral vanishes at t0. A fixed point represents
// u(t) = u0 + integral of F(t', u(t')) dt'.
struct IntervalMap {
  VectorMap phi;
  Eigen::MatrixXd b;
};

IntervalMap build_map(const OdeProblem& p, const Interval& iv, int K);
IntervalMap build_map(const OdeProblem& p, const Interval& iv, int K,
                      const Eigen::VectorXd& u0);

// Solve one interval from the given coefficient guess (N x (K+1)).
// The returned coefficients are one phi-application past the converged
// iterate: this pins piece(t0) to u0 at roundoff level and keeps
// integral-derived rows exactly consistent. For contractive maps the
// returned residual still meets cfg.tol; a strongly expansive map can
// dilute it by its local Lipschitz factor.
std::pair<ChebSeries, SolveStats> solve_interval(const OdeProblem& p, const Interval& iv,
                                                 int K, const Eigen::MatrixXd& guess,
                                                 const SolverConfig& cfg);
std::pair<ChebSeries, SolveStats> solve_interval(const OdeProblem& p, const Interval& iv,
                                                 int K, const Eigen::MatrixXd& guess,
                                                 const SolverConfig& cfg,
                                                 const Eigen::VectorXd& u0);

// March across the problem span. Per interval: solve, take the max
// tail_ratio over variables; on failure or ratio > epsilon shrink the
// interval and re-solve (down to min_dt); accepted intervals with ratio
// below grow_threshold*epsilon let the next interval grow (up to max_dt).
// The initial guess per interval is the constant extension of its start
// state. An interval failing at min_dt aborts with the partial solution.
GwrmSolution solve_adaptive(const OdeProblem& p, const GwrmConfig& cfg);

}  // namespace gwrm
