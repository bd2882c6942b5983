#pragma once

#include <Eigen/Dense>

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace gwrm {

// First-order ODE system du/dt = F(t, u) with optional analytic Jacobian.
// Evaluators must be pure; problems are value-like descriptors.
struct OdeProblem {
  using Rhs = std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>;
  using Jac = std::function<Eigen::MatrixXd(double, const Eigen::VectorXd&)>;

  int dim = 0;
  Rhs rhs;
  Jac jacobian;  // empty when only the finite-difference fallback is available
  Eigen::VectorXd u0;
  double t_start = 0.0;
  double t_end = 1.0;
  std::map<std::string, double> params;
  std::vector<std::string> labels;

  bool has_jacobian() const { return static_cast<bool>(jacobian); }

  // Analytic Jacobian when present, else central differences with
  // per-component step max(1e-7, 1e-7*|u_i|).
  Eigen::MatrixXd jacobian_or_fd(double t, const Eigen::VectorXd& u) const;
};

enum class RunStatus { completed, stagnated, failed };

const char* to_string(RunStatus s);

// Accepted-step record of a time integration.
struct Trajectory {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
  std::vector<Eigen::VectorXd> derivs;  // rhs at each accepted state (dense output)
  long steps_taken = 0;
  long steps_rejected = 0;
  RunStatus status = RunStatus::completed;
};

// dx/dt = -a x + b y z, dy/dt = a x - b y z - c y^2, dz/dt = c y^2.
// u0 = (1, 0, 0), default span [0, 1e6].
OdeProblem robertson(double a = 0.04, double b = 1e4, double c = 3e7);

// dX/dt = -Y^2 - Z^2 - a X + a F
// dY/dt = X Y - b X Z - Y + G
// dZ/dt = b X Y + X Z - Z
// u0 = (0.96, -1.1, 0.5), default span [0, 30].
OdeProblem lorenz84(double a = 0.25, double b = 4.0, double F = 8.0, double G = 1.0);

// du/dt = lambda u, exact solution u0 e^{lambda t}, default span [0, 1].
OdeProblem linear_test(double lambda, double u0 = 1.0);

// Constant-coefficient linearization d(du)/dt = J(t, state) * du around the
// given state; initial condition defaults to zero (the fixed point).
OdeProblem linearized_problem(const OdeProblem& p, double t, const Eigen::VectorXd& state);

// Registry lookup by name ("robertson", "lorenz84", "linear") with parameter
// overrides; unknown names throw std::invalid_argument listing the registry.
OdeProblem make_problem(const std::string& name, const std::map<std::string, double>& overrides = {});

std::vector<std::string> problem_registry();

}  // namespace gwrm
