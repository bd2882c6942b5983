#include "gwrm/gwrm.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace gwrm {

namespace {

Eigen::VectorXd flatten(const Eigen::MatrixXd& a) {
  Eigen::VectorXd x(a.size());
  const int cols = static_cast<int>(a.cols());
  for (int i = 0; i < a.rows(); ++i)
    x.segment(static_cast<Eigen::Index>(i) * cols, cols) = a.row(i).transpose();
  return x;
}

Eigen::MatrixXd unflatten(const Eigen::VectorXd& x, int n, int cols) {
  Eigen::MatrixXd a(n, cols);
  for (int i = 0; i < n; ++i)
    a.row(i) = x.segment(static_cast<Eigen::Index>(i) * cols, cols).transpose();
  return a;
}

// Drop modes above K and re-fix the zeroth coefficient so the value at
// tau = -1 is preserved as zero (the integral anchor).
Eigen::MatrixXd truncate_anchored(const Eigen::MatrixXd& g, int K) {
  Eigen::MatrixXd out = g.leftCols(K + 1);
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(g.rows());
  for (int k = 1; k <= K; ++k) acc += (k % 2 == 0 ? 1.0 : -1.0) * out.col(k);
  out.col(0) = -2.0 * acc;
  return out;
}

}  // namespace

long GwrmSolution::total_modes() const {
  long m = 0;
  for (const auto& piece : pieces) m += piece.order() + 1;
  return m;
}

Eigen::VectorXd GwrmSolution::eval(double t) const {
  if (pieces.empty()) throw std::logic_error("GwrmSolution: no pieces");
  // first piece whose end covers t
  size_t lo = 0, hi = pieces.size() - 1;
  while (lo < hi) {
    size_t mid = (lo + hi) / 2;
    if (t <= pieces[mid].interval().t1)
      hi = mid;
    else
      lo = mid + 1;
  }
  return pieces[lo].eval(t);
}

Eigen::MatrixXd GwrmSolution::eval_many(const std::vector<double>& ts) const {
  if (pieces.empty()) throw std::logic_error("GwrmSolution: no pieces");
  Eigen::MatrixXd out(pieces.front().dim(), static_cast<Eigen::Index>(ts.size()));
  for (size_t j = 0; j < ts.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = eval(ts[j]);
  return out;
}

IntervalMap build_map(const OdeProblem& p, const Interval& iv, int K) {
  return build_map(p, iv, K, p.u0);
}

IntervalMap build_map(const OdeProblem& p, const Interval& iv, int K,
                      const Eigen::VectorXd& u0) {
  if (K < 1) throw std::invalid_argument("build_map: K must be >= 1");
  if (!u0.allFinite()) throw std::invalid_argument("build_map: non-finite initial state");
  const int N = p.dim;

  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(N, K + 1);
  b.col(0) = 2.0 * u0;

  std::vector<double> nodes = lobatto_nodes(K, iv);
  std::vector<double> taus(nodes.size());
  for (size_t j = 0; j < nodes.size(); ++j)
    taus[j] = std::sin(M_PI * (2.0 * static_cast<double>(j) - K) / (2.0 * K));

  OdeProblem::Rhs rhs = p.rhs;
  VectorMap phi = [N, K, iv, b, nodes, taus, rhs](const Eigen::VectorXd& x) {
    if (!x.allFinite()) throw EvaluationError("non-finite coefficients");
    Eigen::MatrixXd a = unflatten(x, N, K + 1);
    ChebSeries cand(iv, a);

    Eigen::MatrixXd F(N, K + 1);
    for (int j = 0; j <= K; ++j) {
      Eigen::VectorXd f = rhs(nodes[static_cast<size_t>(j)],
                              cand.eval_tau(taus[static_cast<size_t>(j)]));
      if (!f.allFinite()) throw EvaluationError("rhs produced non-finite values");
      F.col(j) = f;
    }
    ChebSeries integral = integrate_from_start(fit(F, iv));
    return flatten(b + truncate_anchored(integral.coeffs(), K));
  };
  return {std::move(phi), std::move(b)};
}

std::pair<ChebSeries, SolveStats> solve_interval(const OdeProblem& p, const Interval& iv,
                                                 int K, const Eigen::MatrixXd& guess,
                                                 const SolverConfig& cfg) {
  return solve_interval(p, iv, K, guess, cfg, p.u0);
}

std::pair<ChebSeries, SolveStats> solve_interval(const OdeProblem& p, const Interval& iv,
                                                 int K, const Eigen::MatrixXd& guess,
                                                 const SolverConfig& cfg,
                                                 const Eigen::VectorXd& u0) {
  if (guess.rows() != p.dim || guess.cols() != K + 1)
    throw std::invalid_argument("solve_interval: guess must be dim x (K+1)");
  IntervalMap map = build_map(p, iv, K, u0);
  auto [x, stats] = solve_fixed_point(map.phi, flatten(guess), cfg);
  Eigen::MatrixXd a = stats.converged ? unflatten(map.phi(x), p.dim, K + 1)
                                      : unflatten(x, p.dim, K + 1);
  return {ChebSeries(iv, std::move(a)), stats};
}

GwrmSolution solve_adaptive(const OdeProblem& p, const GwrmConfig& cfg) {
  const double span = p.t_end - p.t_start;
  if (!(span > 0) || !std::isfinite(span))
    throw std::invalid_argument("solve_adaptive: span must be finite and positive");

  double initial_dt = cfg.initial_dt > 0 ? cfg.initial_dt : span;
  double min_dt = cfg.min_dt > 0 ? cfg.min_dt : 1e-9 * span;
  double max_dt = cfg.max_dt > 0 ? cfg.max_dt : span;
  if (!(min_dt <= initial_dt && initial_dt <= max_dt))
    throw std::invalid_argument("solve_adaptive: need min_dt <= initial_dt <= max_dt");
  if (!(cfg.shrink > 0 && cfg.shrink < 1 && cfg.grow > 1))
    throw std::invalid_argument("solve_adaptive: need 0 < shrink < 1 < grow");
  if (!(cfg.epsilon > 0)) throw std::invalid_argument("solve_adaptive: epsilon must be positive");
  if (!(cfg.tail_floor >= 0)) throw std::invalid_argument("solve_adaptive: tail_floor must be >= 0");

  GwrmSolution sol;
  double t = p.t_start;
  Eigen::VectorXd u = p.u0;
  double dt = initial_dt;
  const double dust = 1e-12 * span;

  while (t < p.t_end - dust) {
    double ratio = std::numeric_limits<double>::infinity();
    std::optional<ChebSeries> accepted;
    SolveStats stats;

    while (true) {
      double t1 = std::min(t + dt, p.t_end);
      Interval iv(t, t1);
      Eigen::MatrixXd guess = Eigen::MatrixXd::Zero(p.dim, cfg.K + 1);
      guess.col(0) = 2.0 * u;

      bool solved = false;
      try {
        auto [piece, st] = solve_interval(p, iv, cfg.K, guess, cfg.solver, u);
        stats = st;
        if (st.converged) {
          Eigen::VectorXd ratios = tail_ratio(piece);
          const Eigen::MatrixXd& c = piece.coeffs();
          double scale_max = 0.0;
          for (int i = 0; i < c.rows(); ++i)
            scale_max = std::max(scale_max, std::abs(c(i, 0)) + std::abs(c(i, 1)));
          // Tails below the absolute floor are solve noise, not truncation
          // signal: treat those variables as resolved (see GwrmConfig).
          // Also covers identically zero variables, whose ratio is the
          // +inf sentinel for a zero denominator.
          const double floor_abs = std::max(cfg.solver.tol, cfg.tail_floor * scale_max);
          for (int i = 0; i < ratios.size(); ++i) {
            double tail_mass = std::abs(c(i, cfg.K - 1)) + std::abs(c(i, cfg.K));
            if (tail_mass <= floor_abs) ratios(i) = 0.0;
          }
          ratio = ratios.maxCoeff();
          if (ratio <= cfg.epsilon) {
            accepted.emplace(std::move(piece));
            solved = true;
          }
        }
      } catch (const SolveError&) {
        // divergence, singular linear solve, or a non-finite rhs: treat as
        // a failed attempt and shrink below
      }
      sol.total_iterations += stats.iterations;
      if (solved) break;

      if (dt <= min_dt * (1.0 + 1e-12)) {
        std::ostringstream msg;
        msg << "interval starting at t=" << t << " failed at min_dt=" << min_dt
            << " (tail ratio " << ratio << ", epsilon " << cfg.epsilon << ")";
        sol.status = GwrmStatus::partial;
        sol.message = msg.str();
        sol.interval_count = static_cast<int>(sol.pieces.size());
        return sol;
      }
      dt = std::max(dt * cfg.shrink, min_dt);
      ++sol.resolve_count;
    }

    u = accepted->eval(accepted->interval().t1);
    t = accepted->interval().t1;
    sol.tail_ratios.push_back(ratio);
    sol.pieces.push_back(std::move(*accepted));
    if (ratio < cfg.grow_threshold * cfg.epsilon) dt = std::min(dt * cfg.grow, max_dt);
  }

  sol.interval_count = static_cast<int>(sol.pieces.size());
  return sol;
}

}  // namespace gwrm
