#include "gwrm/gwrm.hpp"

#include "gwrm/refsolvers.hpp"

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

using namespace gwrm;

namespace {

Eigen::VectorXd flatten(const Eigen::MatrixXd& m) {
  Eigen::VectorXd v(m.size());
  for (int i = 0; i < m.rows(); ++i) v.segment(i * m.cols(), m.cols()) = m.row(i);
  return v;
}

OdeProblem constant_rhs(const Eigen::VectorXd& u0, const Eigen::VectorXd& c) {
  OdeProblem p;
  p.dim = static_cast<int>(u0.size());
  p.u0 = u0;
  p.rhs = [c](double, const Eigen::VectorXd&) { return c; };
  return p;
}

}  // namespace

TEST_CASE("build_map of a stationary problem returns the initial coefficients") {
  Eigen::VectorXd u0(2);
  u0 << 0.5, -2.0;
  OdeProblem p = constant_rhs(u0, Eigen::VectorXd::Zero(2));
  const int K = 6;
  auto map = build_map(p, Interval(0.0, 3.0), K);

  REQUIRE(map.b.rows() == 2);
  REQUIRE(map.b.cols() == K + 1);
  CHECK(map.b.col(0).isApprox(2.0 * u0, 1e-15));
  CHECK(map.b.rightCols(K).cwiseAbs().maxCoeff() == 0.0);

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::VectorXd a(2 * (K + 1));
    for (int i = 0; i < a.size(); ++i) a(i) = dist(rng);
    Eigen::VectorXd out = map.phi(a);
    CHECK((out - flatten(map.b)).lpNorm<Eigen::Infinity>() < 1e-14);
  }
}

TEST_CASE("build_map with unit rhs has the linear-time series as fixed point") {
  OdeProblem p = constant_rhs(Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1));
  const int K = 4;
  auto map = build_map(p, Interval(0.0, 2.0), K);

  Eigen::VectorXd fixed(K + 1);
  fixed << 2.0, 1.0, 0.0, 0.0, 0.0;  // u = t on [0,2]: midpoint 1, half-width 1
  Eigen::VectorXd out = map.phi(fixed);
  CHECK((out - fixed).lpNorm<Eigen::Infinity>() < 1e-14);

  // the rhs ignores its input, so any start lands on the fixed point at once
  Eigen::VectorXd anywhere = Eigen::VectorXd::Constant(K + 1, 3.7);
  CHECK((map.phi(anywhere) - fixed).lpNorm<Eigen::Infinity>() < 1e-14);
}

TEST_CASE("build_map rejects bad inputs and non-finite rhs values") {
  OdeProblem p = constant_rhs(Eigen::VectorXd::Ones(1), Eigen::VectorXd::Ones(1));
  CHECK_THROWS_AS((void)build_map(p, Interval(0.0, 1.0), 0), std::invalid_argument);

  OdeProblem bad = p;
  bad.u0 = Eigen::VectorXd::Constant(1, std::nan(""));
  CHECK_THROWS_AS((void)build_map(bad, Interval(0.0, 1.0), 4), std::invalid_argument);

  OdeProblem sqrt_p;
  sqrt_p.dim = 1;
  sqrt_p.u0 = Eigen::VectorXd::Constant(1, -1.0);
  sqrt_p.rhs = [](double, const Eigen::VectorXd& u) {
    return Eigen::VectorXd(u.array().sqrt());
  };
  auto map = build_map(sqrt_p, Interval(0.0, 1.0), 4);
  CHECK_THROWS_AS((void)map.phi(flatten(map.b)), EvaluationError);
}

TEST_CASE("single interval reproduces exponential decay") {
  OdeProblem p = linear_test(-1.0);
  SolverConfig scfg;
  Eigen::MatrixXd guess = Eigen::MatrixXd::Zero(1, 11);
  guess(0, 0) = 2.0;
  auto [piece, stats] = solve_interval(p, Interval(0.0, 1.0), 10, guess, scfg);

  CHECK(stats.converged);
  CHECK(std::abs(piece.eval(1.0)(0) - std::exp(-1.0)) <= 1e-8);
  CHECK(std::abs(piece.eval(0.0)(0) - 1.0) < 1e-13);

  double max_err = 0.0;
  for (int i = 0; i < 100; ++i) {
    double t = i / 99.0;
    max_err = std::max(max_err, std::abs(piece.eval(t)(0) - std::exp(-t)));
  }
  CHECK(max_err < 1e-7);
}

TEST_CASE("solve_interval from the exact fixed point stops immediately") {
  OdeProblem p = constant_rhs(Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1));
  Eigen::MatrixXd fixed(1, 5);
  fixed << 2.0, 1.0, 0.0, 0.0, 0.0;
  auto [piece, stats] = solve_interval(p, Interval(0.0, 2.0), 4, fixed, SolverConfig{});
  CHECK(stats.converged);
  CHECK(stats.iterations <= 1);
  CHECK((piece.coeffs() - fixed).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("solve_interval matches an adaptive reference on lorenz84") {
  OdeProblem p = lorenz84();
  p.t_end = 0.5;

  auto [piece, stats] = solve_interval(p, Interval(0.0, 0.5), 8,
                                       [&] {
                                         Eigen::MatrixXd g = Eigen::MatrixXd::Zero(3, 9);
                                         g.col(0) = 2.0 * p.u0;
                                         return g;
                                       }(),
                                       SolverConfig{});
  REQUIRE(stats.converged);

  StepperConfig ref;
  ref.rel_tol = 1e-10;
  ref.abs_tol = 1e-13;
  Trajectory traj = rk4_adaptive(p, ref);
  REQUIRE(traj.status == RunStatus::completed);

  double max_err = 0.0;
  for (size_t i = 0; i < traj.times.size(); ++i) {
    Eigen::VectorXd diff = piece.eval(traj.times[i]) - traj.states[i];
    max_err = std::max(max_err, diff.lpNorm<Eigen::Infinity>());
  }
  CHECK(max_err < 1e-4);
}

TEST_CASE("gentle decay resolves in a single adaptive interval") {
  OdeProblem p = linear_test(-0.1);
  GwrmConfig cfg;
  cfg.K = 8;
  GwrmSolution sol = solve_adaptive(p, cfg);
  CHECK(sol.status == GwrmStatus::completed);
  CHECK(sol.interval_count == 1);
  REQUIRE(sol.tail_ratios.size() == 1);
  CHECK(sol.tail_ratios[0] <= cfg.epsilon);
  CHECK(sol.total_modes() == 9);
}

TEST_CASE("adaptive pieces are contiguous, continuous, and within the tail bound") {
  OdeProblem p = lorenz84();
  p.t_end = 8.0;
  GwrmConfig cfg;
  cfg.K = 8;
  cfg.initial_dt = 0.5;
  GwrmSolution sol = solve_adaptive(p, cfg);
  REQUIRE(sol.status == GwrmStatus::completed);
  REQUIRE(sol.pieces.size() >= 2);
  CHECK(sol.interval_count == static_cast<int>(sol.pieces.size()));
  CHECK(sol.tail_ratios.size() == sol.pieces.size());

  for (double r : sol.tail_ratios) CHECK(r <= cfg.epsilon);

  for (size_t i = 0; i + 1 < sol.pieces.size(); ++i) {
    const auto& left = sol.pieces[i];
    const auto& right = sol.pieces[i + 1];
    CHECK(left.interval().t1 == right.interval().t0);
    Eigen::VectorXd a = left.eval(left.interval().t1);
    Eigen::VectorXd b = right.eval(right.interval().t0);
    double scale = std::max(1.0, a.lpNorm<Eigen::Infinity>());
    CHECK((a - b).lpNorm<Eigen::Infinity>() <= 1e-12 * scale);
  }

  CHECK(sol.t_start() == 0.0);
  CHECK(sol.t_end() == 8.0);
  CHECK(sol.total_modes() == 9 * static_cast<long>(sol.pieces.size()));
}

TEST_CASE("robertson adapts across ten decades within the expected interval band") {
  OdeProblem p = robertson();
  GwrmConfig cfg;
  cfg.K = 6;
  cfg.epsilon = 1e-3;
  cfg.initial_dt = 1e-6;
  cfg.min_dt = 1e-9;
  cfg.max_dt = 2.5e5;
  GwrmSolution sol = solve_adaptive(p, cfg);

  REQUIRE(sol.status == GwrmStatus::completed);
  CHECK(sol.interval_count >= 25);
  CHECK(sol.interval_count <= 100);

  // x + y + z is conserved by construction; the solution must preserve it
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    double t = std::pow(10.0, -6.0 + 12.0 * i / 999.0);
    worst = std::max(worst, std::abs(sol.eval(t).sum() - 1.0));
  }
  CHECK(worst <= 1e-4);
}

TEST_CASE("lorenz84 full span lands in the expected interval band") {
  OdeProblem p = lorenz84();
  GwrmConfig cfg;
  cfg.K = 8;
  cfg.epsilon = 1e-3;
  cfg.initial_dt = 0.5;
  cfg.min_dt = 1e-7;
  cfg.max_dt = 7.5;
  GwrmSolution sol = solve_adaptive(p, cfg);

  REQUIRE(sol.status == GwrmStatus::completed);
  CHECK(sol.interval_count >= 40);
  CHECK(sol.interval_count <= 90);
}

TEST_CASE("fixed intervals integrate far beyond the explicit stability limit") {
  OdeProblem p = linear_test(-2400.0);
  GwrmConfig cfg;
  cfg.K = 48;
  cfg.epsilon = 1e-3;
  cfg.initial_dt = 0.1;
  cfg.min_dt = 0.1;
  cfg.max_dt = 0.1;
  GwrmSolution sol = solve_adaptive(p, cfg);

  REQUIRE(sol.status == GwrmStatus::completed);
  CHECK(sol.interval_count == 10);
  for (const auto& piece : sol.pieces)
    CHECK(piece.interval().length() == doctest::Approx(0.1).epsilon(1e-12));

  double worst = 0.0;
  for (int i = 0; i <= 99; ++i) {
    double t = 0.01 + (1.0 - 0.01) * i / 99.0;
    worst = std::max(worst, std::abs(sol.eval(t)(0) - std::exp(-2400.0 * t)));
  }
  CHECK(worst <= 1e-4);
}

TEST_CASE("finite-time blowup aborts with a partial solution") {
  OdeProblem p;
  p.dim = 1;
  p.u0 = Eigen::VectorXd::Ones(1);
  p.t_end = 2.0;  // u' = u^2 from u0=1 blows up at t = 1
  p.rhs = [](double, const Eigen::VectorXd& u) { return Eigen::VectorXd(u.array().square()); };

  GwrmConfig cfg;
  cfg.K = 8;
  cfg.initial_dt = 0.25;
  cfg.min_dt = 1e-4;
  GwrmSolution sol = solve_adaptive(p, cfg);

  CHECK(sol.status == GwrmStatus::partial);
  CHECK_FALSE(sol.message.empty());
  REQUIRE_FALSE(sol.pieces.empty());
  CHECK(sol.t_end() < 1.05);
  CHECK(sol.resolve_count > 0);
  for (double r : sol.tail_ratios) CHECK(r <= cfg.epsilon);
}

TEST_CASE("interval growth is capped by max_dt") {
  OdeProblem p = linear_test(-0.01);
  p.t_end = 10.0;
  GwrmConfig cfg;
  cfg.K = 8;
  cfg.initial_dt = 0.1;
  cfg.max_dt = 0.5;
  GwrmSolution sol = solve_adaptive(p, cfg);

  REQUIRE(sol.status == GwrmStatus::completed);
  for (const auto& piece : sol.pieces) CHECK(piece.interval().length() <= 0.5 + 1e-12);
  // easy intervals keep growing, so far fewer than span/initial_dt are needed
  CHECK(sol.interval_count <= 30);
  for (size_t i = 0; i + 2 < sol.pieces.size(); ++i)  // last piece is clipped to the span
    CHECK(sol.pieces[i + 1].interval().length() >= sol.pieces[i].interval().length() - 1e-12);
}

TEST_CASE("solve_adaptive validates its configuration") {
  OdeProblem p = linear_test(-1.0);
  GwrmConfig cfg;
  cfg.initial_dt = 0.1;
  cfg.min_dt = 0.5;  // min above initial
  CHECK_THROWS_AS((void)solve_adaptive(p, cfg), std::invalid_argument);

  GwrmConfig bad_shrink;
  bad_shrink.shrink = 1.5;
  CHECK_THROWS_AS((void)solve_adaptive(p, bad_shrink), std::invalid_argument);

  OdeProblem reversed = p;
  reversed.t_end = reversed.t_start;
  CHECK_THROWS_AS((void)solve_adaptive(reversed, GwrmConfig{}), std::invalid_argument);
}
