#pragma once

#include "gwrm/chebyshev.hpp"
#include "gwrm/gwrm.hpp"
#include "gwrm/problems.hpp"

#include <Eigen/Dense>

#include <functional>
#include <vector>

namespace gwrm {

// Steepness S = max|du/dt| / ((u_max - u_min) / span); a straight line has
// S = 1 and every other smooth signal is steeper.
struct SteepnessReport {
  double S = 0.0;
  double argmax_t = 0.0;  // where |du/dt| peaks
  double u_max = 0.0;
  double u_min = 0.0;
};

// Dense-grid scan (1000*K points per piece) of the derivative series.
// Constant signals (no range) raise std::domain_error.
SteepnessReport steepness(const ChebSeries& s, int var);
SteepnessReport steepness(const GwrmSolution& sol, int var);
// Sampled variant: segment slopes between consecutive samples; times must be
// strictly increasing with at least two entries.
SteepnessReport steepness(const std::vector<double>& times, const std::vector<double>& values);

// Integral-smoothing transform: with v = integral of (u + A) from t_start and
// w = dv/dt = u + A, the 2N-dimensional system is
//   dv/dt = w,   dw/dt = F(t, w - A),   v(t0) = 0,  w(t0) = u0 + A.
// The running average of u is (v - A*(t-t0))/(t-t0). A = 0 reduces to the
// plain running-integral form.
OdeProblem transform_ti(const OdeProblem& p, const Eigen::VectorXd& A);

struct TiRecovery {
  // Original variables, recovered per piece as d(v)/dt - A.
  GwrmSolution u;
  // Running average W(t) = (v(t) - A*(t - t0))/(t - t0); W(t0) = u(t0) by
  // continuity.
  std::function<Eigen::VectorXd(double)> running_average;
};

TiRecovery recover_from_ti(const GwrmSolution& sol, const Eigen::VectorXd& A);

// Offset heuristic for transform_ti: the negated mean slope over the span,
// A = -(u(T) - u0)/(T - t0), estimated with a coarse A-stable pre-solve.
Eigen::VectorXd ti_auto_offsets(const OdeProblem& p);

// Window-averaging transform: U(t) is the centered running average of u over
// [t-delta, t+delta]. With P = dU/dt and the two-point average V, where
// u(t +- delta) = V +- delta*P, the 2N-dimensional system is
//   dP/dt = (F(t+d, V+dP) - F(t-d, V-dP))/(2d)
//   dV/dt = (F(t+d, V+dP) + F(t-d, V-dP))/2
// on the shifted domain [t0+delta, T-delta]. Initial conditions at t0+delta
// are synthesized by a warm-up integration of the original problem over
// [t0, t0+2*delta] plus quadrature of the defining integrals.
struct TaTransform {
  OdeProblem problem;   // (P, V) system on the shifted domain
  double delta = 0.0;
  Eigen::VectorXd U0;   // running average at problem.t_start
};

TaTransform transform_ta(const OdeProblem& p, double delta, double warmup_tol = 1e-10);

// Running average over the shifted domain from a solved (P, V) system:
// U = U0 + integral of the P rows.
GwrmSolution recover_ta_average(const GwrmSolution& sol, const TaTransform& ta);

// Centered running average (1/2delta) * integral of u over [t-delta, t+delta]
// by adaptive Simpson quadrature, absolute tolerance 1e-10. Testing oracle.
double running_average_oracle(const std::function<double(double)>& u, double delta, double t);

}  // namespace gwrm
