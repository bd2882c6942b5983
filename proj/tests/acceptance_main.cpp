// Acceptance gate: ten end-to-end checks of the solver library, each with
// pinned tolerances. Prints exactly one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails.

#include "gwrm/chebyshev.hpp"
#include "gwrm/diagnostics.hpp"
#include "gwrm/gwrm.hpp"
#include "gwrm/problems.hpp"
#include "gwrm/refsolvers.hpp"
#include "gwrm/smoothing.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace gwrm;

namespace {

int g_failures = 0;

void report(int idx, const std::string& name, bool ok, const std::string& detail) {
  std::printf("%s %2d %s: %s\n", ok ? "PASS" : "FAIL", idx, name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

double now_minus(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> ts(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    ts[static_cast<std::size_t>(i)] =
        (i == n - 1) ? b : a + (b - a) * static_cast<double>(i) / (n - 1);
  return ts;
}

// Cubic Hermite dense output between accepted steps of a trajectory.
Eigen::VectorXd traj_eval(const Trajectory& traj, double t) {
  const std::vector<double>& ts = traj.times;
  if (t <= ts.front()) return traj.states.front();
  if (t >= ts.back()) return traj.states.back();
  const auto it = std::upper_bound(ts.begin(), ts.end(), t);
  const std::size_t j = static_cast<std::size_t>(it - ts.begin());
  const double h = ts[j] - ts[j - 1];
  const double s = (t - ts[j - 1]) / h;
  const double s2 = s * s, s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * traj.states[j - 1] + ((s3 - 2 * s2 + s) * h) * traj.derivs[j - 1] +
         (-2 * s3 + 3 * s2) * traj.states[j] + ((s3 - s2) * h) * traj.derivs[j];
}

SolverConfig newton_inner() {
  SolverConfig s;
  s.mode = SolverMode::newton;
  s.tol = 1e-12;
  s.max_iters = 50;
  s.jacobian_reuse = 1;
  return s;
}

std::string fmt(const char* pattern, ...) {
  va_list ap;
  va_start(ap, pattern);
  char buf[512];
  std::vsnprintf(buf, sizeof buf, pattern, ap);
  va_end(ap);
  return std::string(buf);
}

// --------------------------------------------------------------------------

void criterion_1() {
  const auto t0 = std::chrono::steady_clock::now();
  const OdeProblem p = make_problem("robertson", {});
  GwrmConfig cfg;
  cfg.K = 6;
  cfg.epsilon = 1e-3;
  cfg.initial_dt = 1e-6;
  cfg.min_dt = 1e-9;
  cfg.max_dt = 2.5e5;
  const GwrmSolution sol = solve_adaptive(p, cfg);
  const double wall = now_minus(t0);

  bool ok = (sol.status == GwrmStatus::completed) && sol.interval_count >= 25 &&
            sol.interval_count <= 100;

  std::vector<double> ts(1000);
  for (int i = 0; i < 1000; ++i) ts[static_cast<std::size_t>(i)] = std::pow(10.0, -6.0 + 12.0 * i / 999.0);

  double cons = 0.0;
  for (double t : ts) cons = std::max(cons, std::abs(sol.eval(t).sum() - 1.0));
  ok = ok && cons <= 1e-4;

  StepperConfig rc;
  rc.rel_tol = 1e-6;
  rc.abs_tol = 1e-12;
  const Trajectory ref = trapezoid_adaptive(p, rc, newton_inner());
  double rel = std::numeric_limits<double>::infinity();
  if (ref.status == RunStatus::completed) {
    rel = 0.0;
    for (double t : ts) {
      const Eigen::VectorXd u = sol.eval(t);
      const Eigen::VectorXd r = traj_eval(ref, t);
      rel = std::max(rel, std::abs(u(0) - r(0)) / (1e-3 + std::abs(r(0))));
      rel = std::max(rel, std::abs(u(2) - r(2)) / (1e-3 + std::abs(r(2))));
    }
  }
  ok = ok && rel <= 1e-3 && wall <= 60.0;

  report(1, "stiff kinetics, spectral solve", ok,
         fmt("%d intervals, conservation %.2e, vs implicit reference %.2e, %.2f s",
             sol.interval_count, cons, rel, wall));
}

void criterion_2() {
  const OdeProblem p = make_problem("robertson", {});
  StepperConfig cfg;
  cfg.rel_tol = 1e-3;
  cfg.abs_tol = 1e-6;
  cfg.max_steps = 100000;
  const Trajectory traj = rk4_adaptive(p, cfg);
  const bool ok = traj.status != RunStatus::completed && traj.times.back() < 100.0 &&
                  traj.steps_taken <= 50000;
  report(2, "stiff kinetics, explicit stepper stalls", ok,
         fmt("status %s at t=%.3g after %ld accepted steps", to_string(traj.status),
             traj.times.back(), traj.steps_taken));
}

void criterion_3() {
  const OdeProblem p = make_problem("robertson", {});
  StepperConfig cfg;
  cfg.rel_tol = 1e-3;
  cfg.abs_tol = 1e-6;
  cfg.h0 = 0.1;
  const Trajectory traj = trapezoid_adaptive(p, cfg, newton_inner());
  const bool ok = traj.status == RunStatus::completed && traj.steps_taken <= 500;
  report(3, "stiff kinetics, implicit stepper completes", ok,
         fmt("status %s, %ld accepted steps to t=%.3g", to_string(traj.status),
             traj.steps_taken, traj.times.back()));
}

void criterion_4() {
  const OdeProblem p = make_problem("lorenz84", {});
  GwrmConfig cfg;
  cfg.K = 8;
  cfg.epsilon = 1e-3;
  // start near the converged interval scale; by t ~ 22 the chaotic
  // divergence makes shoulder-vs-ripple details sensitive to the layout
  cfg.initial_dt = 0.5;
  cfg.min_dt = 1e-7;
  cfg.max_dt = 7.5;
  const GwrmSolution sol = solve_adaptive(p, cfg);

  bool ok = (sol.status == GwrmStatus::completed) && sol.interval_count >= 40 &&
            sol.interval_count <= 90;

  StepperConfig rc;
  rc.rel_tol = 1e-10;
  rc.abs_tol = 1e-13;
  const Trajectory ref = rk4_adaptive(p, rc);
  ok = ok && ref.status == RunStatus::completed;

  const std::vector<double> ts = linspace(0.0, 30.0, 6000);
  const int target[3] = {19, 44, 41};
  int counts[3] = {0, 0, 0};
  int ref_counts[3] = {0, 0, 0};
  for (int v = 0; v < 3; ++v) {
    std::vector<double> g(ts.size()), r(ts.size());
    for (std::size_t j = 0; j < ts.size(); ++j) {
      g[j] = sol.eval(ts[j])(v);
      r[j] = traj_eval(ref, ts[j])(v);
    }
    counts[v] = count_extrema(g);
    ref_counts[v] = count_extrema(r);
    ok = ok && std::abs(counts[v] - target[v]) <= 2 && std::abs(ref_counts[v] - target[v]) <= 2 &&
         std::abs(counts[v] - ref_counts[v]) <= 2;
  }

  report(4, "chaotic circulation, spectral solve", ok,
         fmt("%d intervals; extrema %d/%d/%d (reference %d/%d/%d, target 19/44/41 +-2)",
             sol.interval_count, counts[0], counts[1], counts[2], ref_counts[0], ref_counts[1],
             ref_counts[2]));
}

void criterion_5() {
  const auto t0 = std::chrono::steady_clock::now();
  const OdeProblem rob = make_problem("robertson", {});
  const OdeProblem lor = make_problem("lorenz84", {});

  Eigen::Vector3d s1(1.0, 0.0, 0.0);
  const LleReport r1 = lle(rob, 0.0, s1);
  bool ok = std::abs(r1.eigenvalues[0].real()) <= 1e-9 &&
            std::abs(r1.eigenvalues[1].real()) <= 1e-9 &&
            std::abs(r1.eigenvalues[2].real() + 0.04) <= 1e-9 &&
            r1.classification == Classification::neutral;

  Eigen::Vector3d s2(1.0, 1e-6, 0.0);
  const LleReport r2 = lle(rob, 0.0, s2);
  ok = ok && std::abs(r2.eigenvalues[0].real()) <= 1e-6 &&
       std::abs(r2.eigenvalues[1].real() + 0.05) <= 5e-4 &&
       std::abs(r2.eigenvalues[2].real() + 60.0) <= 0.5 &&
       r2.classification == Classification::stiff;

  const LleReport r3 = lle(lor, 0.0, lor.u0);
  const std::complex<double> g0 = r3.eigenvalues[0];
  const std::complex<double> g1 = r3.eigenvalues[1];
  const std::complex<double> g2 = r3.eigenvalues[2];
  ok = ok && std::abs(g0.real() - 1.9) <= 0.05 && std::abs(g0.imag()) <= 1e-9 &&
       std::abs(g1.real() + 1.1) <= 0.05 && std::abs(std::abs(g1.imag()) - 4.5) <= 0.05 &&
       g2 == std::conj(g1) && r3.classification == Classification::chaotic;

  const double wall = now_minus(t0);
  ok = ok && wall < 1.0;
  report(5, "frozen-Jacobian growth rates", ok,
         fmt("{%.1e, %.1e, %.4f}, {%.1e, %.4f, %.2f}, {%.3f, %.3f+-%.3fi}, %.3f s",
             r1.eigenvalues[0].real(), r1.eigenvalues[1].real(), r1.eigenvalues[2].real(),
             r2.eigenvalues[0].real(), r2.eigenvalues[1].real(), r2.eigenvalues[2].real(),
             g0.real(), g1.real(), std::abs(g1.imag()), wall));
}

void criterion_6() {
  const OdeProblem p = make_problem("linear", {{"lambda", -2400.0}});
  GwrmConfig cfg;
  cfg.K = 48;
  cfg.epsilon = 1e-3;
  cfg.initial_dt = 0.1;
  cfg.min_dt = 0.1;
  cfg.max_dt = 0.1;
  const GwrmSolution sol = solve_adaptive(p, cfg);

  double err = 0.0;
  for (double t : linspace(0.0, sol.t_end(), 1001))
    err = std::max(err, std::abs(sol.eval(t)(0) - std::exp(-2400.0 * t)));
  bool ok = sol.status == GwrmStatus::completed && err <= 1e-4;

  StepperConfig fixed;
  fixed.h0 = fixed.h_min = fixed.h_max = 0.1;
  const Trajectory rk = rk4_adaptive(p, fixed);
  const double final_mag = rk.states.back().cwiseAbs().maxCoeff();
  const bool diverged = rk.status == RunStatus::failed || final_mag > 1e10;
  ok = ok && diverged;

  report(6, "long intervals past the explicit stability limit", ok,
         fmt("spectral error %.2e with interval 0.1; fixed-step explicit %s (|u| = %.1e)", err,
             diverged ? "diverges" : "UNEXPECTEDLY STABLE", final_mag));
}

void criterion_7() {
  std::mt19937_64 rng(777);
  std::uniform_real_distribution<double> coeff(-2.0, 2.0);
  bool ok = true;
  std::string what = "all invariants hold";

  // round trip at the sample nodes for random polynomials
  for (int K : {3, 8, 17}) {
    const Interval iv(-0.7, 1.9);
    Eigen::MatrixXd a(2, K + 1);
    for (int i = 0; i < 2; ++i)
      for (int k = 0; k <= K; ++k) a(i, k) = coeff(rng);
    const ChebSeries truth(iv, a);
    const std::vector<double> ts = lobatto_nodes(K, iv);
    const Eigen::MatrixXd vals = truth.eval_many(ts);
    const ChebSeries refit = fit(vals, iv);
    const Eigen::MatrixXd back = refit.eval_many(ts);
    for (Eigen::Index i = 0; i < vals.rows() && ok; ++i)
      for (Eigen::Index j = 0; j < vals.cols(); ++j)
        if (std::abs(back(i, j) - vals(i, j)) > 1e-12 * std::max(1.0, std::abs(vals(i, j)))) {
          ok = false;
          what = fmt("round trip fails at K=%d", K);
          break;
        }
  }

  // geometric decay of the fit error for an entire function
  auto err_at = [](int K) {
    const Interval iv(-1.0, 1.0);
    Eigen::MatrixXd vals(1, K + 1);
    const std::vector<double> nodes = lobatto_nodes(K, iv);
    for (int j = 0; j <= K; ++j) vals(0, j) = std::exp(nodes[static_cast<std::size_t>(j)]);
    const ChebSeries s = fit(vals, iv);
    double e = 0.0;
    for (int j = 0; j < 400; ++j) {
      const double tau = -1.0 + 2.0 * j / 399.0;
      e = std::max(e, std::abs(s.eval(tau)(0) - std::exp(tau)));
    }
    return e;
  };
  if (ok && err_at(16) >= 1e-12) {
    ok = false;
    what = fmt("K=16 fit error %.2e >= 1e-12", err_at(16));
  }
  for (int K = 4; ok && K <= 14; K += 2) {
    const double e0 = err_at(K), e1 = err_at(K + 2);
    if (!(e1 / e0 < 0.1 || e1 <= 1e-14)) {
      ok = false;
      what = fmt("decay ratio %.2f at K=%d", e1 / e0, K);
    }
  }

  // differentiation inverts integration
  for (int trial = 0; trial < 20 && ok; ++trial) {
    const Interval iv(0.3 * trial - 2.0, 0.3 * trial + 0.5 + 0.2 * (trial % 3));
    Eigen::MatrixXd a(3, 11);
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k <= 10; ++k) a(i, k) = coeff(rng);
    const ChebSeries s(iv, a);
    const ChebSeries back = differentiate(integrate_from_start(s));
    if ((back.coeffs() - s.coeffs()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + a.cwiseAbs().maxCoeff())) {
      ok = false;
      what = fmt("calculus inverse fails on trial %d", trial);
    }
  }

  // full-order products agree with pointwise multiplication
  for (int trial = 0; trial < 20 && ok; ++trial) {
    const Interval iv(-1.5, 2.5);
    Eigen::MatrixXd a(1, 7), b(1, 9);
    for (int k = 0; k < 7; ++k) a(0, k) = coeff(rng);
    for (int k = 0; k < 9; ++k) b(0, k) = coeff(rng);
    const ChebSeries sa(iv, a), sb(iv, b);
    const ChebSeries prod = multiply(sa, sb, 14);  // 6 + 8: no truncation
    for (double t : linspace(-1.5, 2.5, 101)) {
      const double want = sa.eval(t)(0) * sb.eval(t)(0);
      if (std::abs(prod.eval(t)(0) - want) > 1e-12 * std::max(1.0, std::abs(want))) {
        ok = false;
        what = fmt("product mismatch on trial %d", trial);
        break;
      }
    }
  }

  report(7, "spectral operator invariants", ok, what);
}

void criterion_8() {
  // tight solver settings so transform errors, not adaption, dominate
  GwrmConfig cfg;
  cfg.K = 16;
  cfg.epsilon = 1e-8;
  cfg.solver.tol = 1e-12;
  cfg.tail_floor = 0.0;

  bool ok = true;
  std::string what;

  // window average of exponential decay has the closed form sinh(d)/d * e^{-t}
  const OdeProblem lin = make_problem("linear", {});
  const double delta = 0.1;
  const TaTransform ta = transform_ta(lin, delta);
  const GwrmSolution ta_sol = solve_adaptive(ta.problem, cfg);
  const GwrmSolution avg = recover_ta_average(ta_sol, ta);
  double ta_err = 0.0;
  const double shape = std::sinh(delta) / delta;
  for (double t : linspace(avg.t_start(), avg.t_end(), 51))
    ta_err = std::max(ta_err, std::abs(avg.eval(t)(0) - shape * std::exp(-t)));
  ok = ok && ta_err <= 1e-6;

  // running-integral round trip against the direct solve
  const GwrmSolution direct = solve_adaptive(lin, cfg);
  const Eigen::VectorXd A = Eigen::VectorXd::Constant(1, 0.7);
  const GwrmSolution ti_sol = solve_adaptive(transform_ti(lin, A), cfg);
  const TiRecovery rec = recover_from_ti(ti_sol, A);
  double ti_err = 0.0;
  for (double t : linspace(0.0, 1.0, 101)) {
    const double ud = direct.eval(t)(0);
    ti_err = std::max(ti_err, std::abs(rec.u.eval(t)(0) - ud) / (1.0 + std::abs(ud)));
  }
  ok = ok && ti_err <= 10.0 * cfg.solver.tol;

  // the recovered long-time average equals the analytic (1 - e^{-t})/t
  double lta_err = 0.0;
  for (double t : linspace(0.25, 1.0, 20))
    lta_err = std::max(lta_err, std::abs(rec.running_average(t)(0) - (1.0 - std::exp(-t)) / t));
  ok = ok && lta_err <= 1e-10;

  what = fmt("window avg %.2e (<=1e-6), round trip %.2e (<=%.0e), long-time avg %.2e (<=1e-10)",
             ta_err, ti_err, 10.0 * cfg.solver.tol, lta_err);
  report(8, "smoothing transforms", ok, what);
}

void criterion_9() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20260819u);
  std::uniform_int_distribution<int> m_dist(2, 6);
  std::uniform_real_distribution<double> amp(0.3, 1.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * M_PI);

  const int per_bucket = 25;
  std::vector<std::vector<int>> min_k(7);  // index by N_e, buckets 1..6
  const std::vector<double> ts = linspace(0.0, 1.0, 2001);

  int attempts = 0;
  auto bucket_full = [&] {
    for (int b = 1; b <= 6; ++b)
      if (static_cast<int>(min_k[static_cast<std::size_t>(b)].size()) < per_bucket) return false;
    return true;
  };

  while (!bucket_full() && attempts < 40000) {
    ++attempts;
    const int m = m_dist(rng);
    std::uniform_real_distribution<double> freq(0.25, 0.25 + 0.5 * m);
    std::vector<double> As(static_cast<std::size_t>(m)), fs(static_cast<std::size_t>(m)),
        ps(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) {
      As[static_cast<std::size_t>(j)] = amp(rng);
      fs[static_cast<std::size_t>(j)] = freq(rng);
      ps[static_cast<std::size_t>(j)] = phase(rng);
    }
    auto signal = [&](double t) {
      double v = 0.0;
      for (int j = 0; j < m; ++j)
        v += As[static_cast<std::size_t>(j)] *
             std::sin(2.0 * M_PI * fs[static_cast<std::size_t>(j)] * t + ps[static_cast<std::size_t>(j)]);
      return v;
    };

    std::vector<double> samples(ts.size());
    double umax = 0.0;
    for (std::size_t j = 0; j < ts.size(); ++j) {
      samples[j] = signal(ts[j]);
      umax = std::max(umax, std::abs(samples[j]));
    }
    const int ne = count_extrema(samples);
    if (ne < 1 || ne > 6 ||
        static_cast<int>(min_k[static_cast<std::size_t>(ne)].size()) >= per_bucket)
      continue;

    const Interval iv(0.0, 1.0);
    int found = -1;
    for (int K = 2; K <= 40 && found < 0; ++K) {
      Eigen::MatrixXd vals(1, K + 1);
      const std::vector<double> nodes = lobatto_nodes(K, iv);
      for (int j = 0; j <= K; ++j) vals(0, j) = signal(nodes[static_cast<std::size_t>(j)]);
      const ChebSeries s = fit(vals, iv);
      double err = 0.0;
      for (std::size_t j = 0; j < ts.size(); ++j)
        err = std::max(err, std::abs(s.eval(ts[j])(0) - samples[j]));
      if (err <= 0.01 * umax) found = K;
    }
    if (found > 0) min_k[static_cast<std::size_t>(ne)].push_back(found);
  }

  bool ok = bucket_full();
  std::ostringstream detail;
  int total = 0;
  for (int b = 1; b <= 6; ++b) {
    const auto& v = min_k[static_cast<std::size_t>(b)];
    total += static_cast<int>(v.size());
    double mean = 0.0;
    for (int k : v) mean += k;
    if (!v.empty()) mean /= static_cast<double>(v.size());
    const double predicted = 1.5 * b + 3.5;
    if (std::abs(mean - predicted) > 1.5) ok = false;
    detail << (b > 1 ? ", " : "") << b << ":" << fmt("%.1f/%.1f", mean, predicted);
  }
  const double wall = now_minus(t0);
  ok = ok && wall <= 120.0;
  report(9, "mode-count calibration", ok,
         fmt("%d signals, mean empirical K vs predicted per extrema count {%s}, %.1f s", total,
             detail.str().c_str(), wall));
}

void criterion_10() {
  const OdeProblem p = make_problem("linear", {});
  const double exact = std::exp(-1.0);

  auto order_of = [&](bool use_rk4) {
    std::vector<double> hs{0.1, 0.05, 0.025, 0.0125};
    std::vector<double> errs;
    for (double h : hs) {
      const int n = static_cast<int>(std::lround(1.0 / h));
      Eigen::VectorXd u = p.u0;
      for (int i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) * h;
        if (use_rk4) {
          u = rk4_step(p.rhs, t, u, h);
        } else {
          u = trapezoid_step(p, t, u, h, newton_inner()).first;
        }
      }
      errs.push_back(std::abs(u(0) - exact));
    }
    // least-squares slope of log err against log h
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const int n = static_cast<int>(hs.size());
    for (int i = 0; i < n; ++i) {
      const double x = std::log(hs[static_cast<std::size_t>(i)]);
      const double y = std::log(errs[static_cast<std::size_t>(i)]);
      sx += x, sy += y, sxx += x * x, sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
  };

  const double p4 = order_of(true);
  const double p2 = order_of(false);
  const bool ok = std::abs(p4 - 4.0) <= 0.2 && std::abs(p2 - 2.0) <= 0.1;
  report(10, "stepper convergence orders", ok,
         fmt("explicit fourth-order slope %.3f (4 +- 0.2), implicit second-order slope %.3f (2 +- 0.1)",
             p4, p2));
}

}  // namespace

int main() {
  using CriterionFn = void (*)();
  const CriterionFn criteria[] = {criterion_1, criterion_2, criterion_3, criterion_4,
                                  criterion_5, criterion_6, criterion_7, criterion_8,
                                  criterion_9, criterion_10};
  int idx = 0;
  for (CriterionFn fn : criteria) {
    ++idx;
    try {
      fn();
    } catch (const std::exception& e) {
      report(idx, "criterion raised", false, e.what());
    }
  }
  std::printf("%d/10 criteria passed\n", 10 - g_failures);
  return g_failures == 0 ? 0 : 1;
}
