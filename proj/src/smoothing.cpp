#include "gwrm/smoothing.hpp"

#include "gwrm/refsolvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gwrm {

namespace {

struct SlopeScan {
  double d_max = 0.0;
  double argmax_t = 0.0;
  double u_max = -std::numeric_limits<double>::infinity();
  double u_min = std::numeric_limits<double>::infinity();
};

void scan_piece(const ChebSeries& s, int var, SlopeScan& acc) {
  const ChebSeries du = differentiate(s);
  const int n = 1000 * std::max(1, s.order());
  const Interval& iv = s.interval();
  std::vector<double> ts(static_cast<std::size_t>(n) + 1);
  for (int j = 0; j <= n; ++j)
    ts[static_cast<std::size_t>(j)] = iv.t0 + iv.length() * static_cast<double>(j) / n;

  const Eigen::MatrixXd uv = s.eval_many(ts);
  const Eigen::MatrixXd dv = du.eval_many(ts);
  for (int j = 0; j <= n; ++j) {
    const double u = uv(var, j);
    const double d = std::abs(dv(var, j));
    acc.u_max = std::max(acc.u_max, u);
    acc.u_min = std::min(acc.u_min, u);
    if (d > acc.d_max) {
      acc.d_max = d;
      acc.argmax_t = ts[static_cast<std::size_t>(j)];
    }
  }
}

SteepnessReport finalize(const SlopeScan& acc, double span) {
  const double range = acc.u_max - acc.u_min;
  const double floor = 1e-13 * std::max(std::abs(acc.u_max), std::abs(acc.u_min));
  if (!(range > floor)) throw std::domain_error("steepness: signal is constant on the interval");
  SteepnessReport rep;
  rep.S = acc.d_max * span / range;
  rep.argmax_t = acc.argmax_t;
  rep.u_max = acc.u_max;
  rep.u_min = acc.u_min;
  return rep;
}

double simpson_rec(const std::function<double(double)>& f, double a, double fa, double m,
                   double fm, double b, double fb, double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  if (!std::isfinite(flm) || !std::isfinite(frm))
    throw std::domain_error("running_average_oracle: non-finite evaluation inside window");
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return simpson_rec(f, a, fa, lm, flm, m, fm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, fm, rm, frm, b, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

SteepnessReport steepness(const ChebSeries& s, int var) {
  if (var < 0 || var >= s.dim()) throw std::invalid_argument("steepness: variable out of range");
  SlopeScan acc;
  scan_piece(s, var, acc);
  return finalize(acc, s.interval().length());
}

SteepnessReport steepness(const GwrmSolution& sol, int var) {
  if (sol.pieces.empty()) throw std::invalid_argument("steepness: empty solution");
  if (var < 0 || var >= sol.pieces.front().dim())
    throw std::invalid_argument("steepness: variable out of range");
  SlopeScan acc;
  for (const ChebSeries& piece : sol.pieces) scan_piece(piece, var, acc);
  return finalize(acc, sol.t_end() - sol.t_start());
}

SteepnessReport steepness(const std::vector<double>& times, const std::vector<double>& values) {
  if (times.size() != values.size())
    throw std::invalid_argument("steepness: times/values size mismatch");
  if (times.size() < 2) throw std::domain_error("steepness: need at least 2 samples");

  SlopeScan acc;
  acc.u_max = values[0];
  acc.u_min = values[0];
  for (std::size_t i = 1; i < times.size(); ++i) {
    const double dt = times[i] - times[i - 1];
    if (!(dt > 0.0)) throw std::invalid_argument("steepness: times must be strictly increasing");
    const double d = std::abs((values[i] - values[i - 1]) / dt);
    acc.u_max = std::max(acc.u_max, values[i]);
    acc.u_min = std::min(acc.u_min, values[i]);
    if (d > acc.d_max) {
      acc.d_max = d;
      acc.argmax_t = 0.5 * (times[i] + times[i - 1]);
    }
  }
  return finalize(acc, times.back() - times.front());
}

OdeProblem transform_ti(const OdeProblem& p, const Eigen::VectorXd& A) {
  if (A.size() != p.dim) throw std::invalid_argument("transform_ti: offset dimension mismatch");
  const int N = p.dim;

  OdeProblem q;
  q.dim = 2 * N;
  q.t_start = p.t_start;
  q.t_end = p.t_end;
  q.params = p.params;
  q.u0 = Eigen::VectorXd::Zero(2 * N);
  q.u0.tail(N) = p.u0 + A;
  for (const std::string& l : p.labels) q.labels.push_back("v_" + l);
  for (const std::string& l : p.labels) q.labels.push_back("w_" + l);

  const OdeProblem::Rhs base_rhs = p.rhs;
  q.rhs = [base_rhs, A, N](double t, const Eigen::VectorXd& y) {
    Eigen::VectorXd out(2 * N);
    out.head(N) = y.tail(N);
    out.tail(N) = base_rhs(t, Eigen::VectorXd(y.tail(N) - A));
    return out;
  };
  if (p.has_jacobian()) {
    const OdeProblem::Jac base_jac = p.jacobian;
    q.jacobian = [base_jac, A, N](double t, const Eigen::VectorXd& y) {
      Eigen::MatrixXd J = Eigen::MatrixXd::Zero(2 * N, 2 * N);
      J.topRightCorner(N, N) = Eigen::MatrixXd::Identity(N, N);
      J.bottomRightCorner(N, N) = base_jac(t, Eigen::VectorXd(y.tail(N) - A));
      return J;
    };
  }
  return q;
}

TiRecovery recover_from_ti(const GwrmSolution& sol, const Eigen::VectorXd& A) {
  if (sol.pieces.empty()) throw std::invalid_argument("recover_from_ti: empty solution");
  const int N = static_cast<int>(A.size());
  if (sol.pieces.front().dim() != 2 * N)
    throw std::invalid_argument("recover_from_ti: solution dimension is not 2N");

  TiRecovery rec;
  rec.u.interval_count = sol.interval_count;
  rec.u.total_iterations = sol.total_iterations;
  rec.u.resolve_count = sol.resolve_count;
  rec.u.tail_ratios = sol.tail_ratios;
  rec.u.status = sol.status;
  rec.u.message = sol.message;
  for (const ChebSeries& piece : sol.pieces) {
    const ChebSeries v(piece.interval(), piece.coeffs().topRows(N));
    Eigen::MatrixXd m = differentiate(v).coeffs();
    m.col(0) -= 2.0 * A;  // constant shift: stored zeroth coefficient is doubled
    rec.u.pieces.emplace_back(piece.interval(), std::move(m));
  }

  const double t0 = sol.t_start();
  const double span = sol.t_end() - t0;
  const Eigen::VectorXd w0 = sol.pieces.front().eval(t0).tail(N);
  const Eigen::VectorXd u_start = w0 - A;
  rec.running_average = [sol, A, N, t0, span, u_start](double t) {
    const double dt = t - t0;
    if (dt <= 1e-12 * span) return u_start;
    const Eigen::VectorXd y = sol.eval(t);
    return Eigen::VectorXd((y.head(N) - A * dt) / dt);
  };
  return rec;
}

Eigen::VectorXd ti_auto_offsets(const OdeProblem& p) {
  StepperConfig cfg;
  cfg.rel_tol = 1e-4;
  cfg.abs_tol = 1e-7;
  SolverConfig newton;
  newton.mode = SolverMode::newton;

  const Trajectory traj = trapezoid_adaptive(p, cfg, newton);
  const double advance = traj.times.back() - traj.times.front();
  if (advance <= 0.0) return Eigen::VectorXd::Zero(p.dim);
  return Eigen::VectorXd(-(traj.states.back() - p.u0) / advance);
}

TaTransform transform_ta(const OdeProblem& p, double delta, double warmup_tol) {
  if (!(delta > 0.0)) throw std::invalid_argument("transform_ta: delta must be positive");
  if (!(warmup_tol > 0.0)) throw std::invalid_argument("transform_ta: warmup_tol must be positive");
  const double span = p.t_end - p.t_start;
  if (!(span > 2.0 * delta))
    throw std::domain_error("transform_ta: problem span must exceed 2*delta");
  const int N = p.dim;

  // warm-up on [t0, t0 + 2*delta], with the running integral of u carried as
  // extra quadrature variables
  OdeProblem aug;
  aug.dim = 2 * N;
  aug.t_start = p.t_start;
  aug.t_end = p.t_start + 2.0 * delta;
  aug.u0 = Eigen::VectorXd::Zero(2 * N);
  aug.u0.head(N) = p.u0;
  const OdeProblem::Rhs base_rhs = p.rhs;
  aug.rhs = [base_rhs, N](double t, const Eigen::VectorXd& y) {
    Eigen::VectorXd out(2 * N);
    out.head(N) = base_rhs(t, Eigen::VectorXd(y.head(N)));
    out.tail(N) = y.head(N);
    return out;
  };

  StepperConfig wcfg;
  wcfg.rel_tol = warmup_tol;
  wcfg.abs_tol = warmup_tol * 1e-3;
  const Trajectory warm = rk4_adaptive(aug, wcfg);
  if (warm.status != RunStatus::completed)
    throw std::runtime_error("transform_ta: warm-up integration did not complete");

  const Eigen::VectorXd u_end = warm.states.back().head(N);
  const Eigen::VectorXd quad = warm.states.back().tail(N);

  TaTransform ta;
  ta.delta = delta;
  ta.U0 = quad / (2.0 * delta);

  OdeProblem& q = ta.problem;
  q.dim = 2 * N;
  q.t_start = p.t_start + delta;
  q.t_end = p.t_end - delta;
  q.params = p.params;
  q.u0 = Eigen::VectorXd::Zero(2 * N);
  q.u0.head(N) = (u_end - p.u0) / (2.0 * delta);  // P = dU/dt
  q.u0.tail(N) = 0.5 * (p.u0 + u_end);            // V = two-point average
  for (const std::string& l : p.labels) q.labels.push_back("P_" + l);
  for (const std::string& l : p.labels) q.labels.push_back("V_" + l);

  q.rhs = [base_rhs, delta, N](double t, const Eigen::VectorXd& y) {
    const Eigen::VectorXd up = y.tail(N) + delta * y.head(N);
    const Eigen::VectorXd um = y.tail(N) - delta * y.head(N);
    const Eigen::VectorXd fp = base_rhs(t + delta, up);
    const Eigen::VectorXd fm = base_rhs(t - delta, um);
    Eigen::VectorXd out(2 * N);
    out.head(N) = (fp - fm) / (2.0 * delta);
    out.tail(N) = 0.5 * (fp + fm);
    return out;
  };
  if (p.has_jacobian()) {
    const OdeProblem::Jac base_jac = p.jacobian;
    q.jacobian = [base_jac, delta, N](double t, const Eigen::VectorXd& y) {
      const Eigen::VectorXd up = y.tail(N) + delta * y.head(N);
      const Eigen::VectorXd um = y.tail(N) - delta * y.head(N);
      const Eigen::MatrixXd Jp = base_jac(t + delta, up);
      const Eigen::MatrixXd Jm = base_jac(t - delta, um);
      Eigen::MatrixXd J(2 * N, 2 * N);
      J.topLeftCorner(N, N) = 0.5 * (Jp + Jm);
      J.topRightCorner(N, N) = (Jp - Jm) / (2.0 * delta);
      J.bottomLeftCorner(N, N) = 0.5 * delta * (Jp - Jm);
      J.bottomRightCorner(N, N) = 0.5 * (Jp + Jm);
      return J;
    };
  }
  return ta;
}

GwrmSolution recover_ta_average(const GwrmSolution& sol, const TaTransform& ta) {
  if (sol.pieces.empty()) throw std::invalid_argument("recover_ta_average: empty solution");
  const int N = static_cast<int>(ta.U0.size());
  if (sol.pieces.front().dim() != 2 * N)
    throw std::invalid_argument("recover_ta_average: solution dimension is not 2N");

  GwrmSolution out;
  out.interval_count = sol.interval_count;
  out.total_iterations = sol.total_iterations;
  out.resolve_count = sol.resolve_count;
  out.tail_ratios = sol.tail_ratios;
  out.status = sol.status;
  out.message = sol.message;

  Eigen::VectorXd u_start = ta.U0;
  for (const ChebSeries& piece : sol.pieces) {
    const ChebSeries pr(piece.interval(), piece.coeffs().topRows(N));
    Eigen::MatrixXd m = integrate_from_start(pr).coeffs();
    m.col(0) += 2.0 * u_start;  // constant shift: stored zeroth coefficient is doubled
    ChebSeries up(piece.interval(), std::move(m));
    u_start = up.eval(piece.interval().t1);
    out.pieces.push_back(std::move(up));
  }
  return out;
}

double running_average_oracle(const std::function<double(double)>& u, double delta, double t) {
  if (!(delta > 0.0))
    throw std::invalid_argument("running_average_oracle: delta must be positive");
  const double a = t - delta;
  const double b = t + delta;
  double fa, fm, fb;
  try {
    fa = u(a);
    fm = u(0.5 * (a + b));
    fb = u(b);
  } catch (const std::exception&) {
    throw std::domain_error("running_average_oracle: evaluator undefined inside window");
  }
  if (!std::isfinite(fa) || !std::isfinite(fm) || !std::isfinite(fb))
    throw std::domain_error("running_average_oracle: non-finite evaluation inside window");

  const double tol = 1e-10 * 2.0 * delta;  // integral tolerance for a 1e-10 average
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double integral = simpson_rec(u, a, fa, 0.5 * (a + b), fm, b, fb, whole, tol, 60);
  return integral / (2.0 * delta);
}

}  // namespace gwrm
