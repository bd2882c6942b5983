#include "gwrm/problems.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace gwrm {

Eigen::MatrixXd OdeProblem::jacobian_or_fd(double t, const Eigen::VectorXd& u) const {
  if (jacobian) return jacobian(t, u);
  const int n = dim;
  Eigen::MatrixXd J(n, n);
  for (int j = 0; j < n; ++j) {
    double h = std::max(1e-7, 1e-7 * std::abs(u(j)));
    Eigen::VectorXd up = u, um = u;
    up(j) += h;
    um(j) -= h;
    J.col(j) = (rhs(t, up) - rhs(t, um)) / (2.0 * h);
  }
  return J;
}

const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::completed: return "completed";
    case RunStatus::stagnated: return "stagnated";
    case RunStatus::failed: return "failed";
  }
  return "unknown";
}

OdeProblem robertson(double a, double b, double c) {
  if (!(a > 0 && b > 0 && c > 0))
    throw std::invalid_argument("robertson: rates must be positive");
  OdeProblem p;
  p.dim = 3;
  p.rhs = [a, b, c](double, const Eigen::VectorXd& u) {
    double x = u(0), y = u(1), z = u(2);
    Eigen::VectorXd f(3);
    f(0) = -a * x + b * y * z;
    f(1) = a * x - b * y * z - c * y * y;
    f(2) = c * y * y;
    return f;
  };
  p.jacobian = [a, b, c](double, const Eigen::VectorXd& u) {
    double y = u(1), z = u(2);
    Eigen::MatrixXd J(3, 3);
    J << -a, b * z, b * y,
          a, -b * z - 2.0 * c * y, -b * y,
          0.0, 2.0 * c * y, 0.0;
    return J;
  };
  p.u0 = Eigen::Vector3d(1.0, 0.0, 0.0);
  p.t_start = 0.0;
  p.t_end = 1e6;
  p.params = {{"a", a}, {"b", b}, {"c", c}};
  p.labels = {"x", "y", "z"};
  return p;
}

OdeProblem lorenz84(double a, double b, double F, double G) {
  OdeProblem p;
  p.dim = 3;
  p.rhs = [a, b, F, G](double, const Eigen::VectorXd& u) {
    double x = u(0), y = u(1), z = u(2);
    Eigen::VectorXd f(3);
    f(0) = -y * y - z * z - a * x + a * F;
    f(1) = x * y - b * x * z - y + G;
    f(2) = b * x * y + x * z - z;
    return f;
  };
  p.jacobian = [a, b](double, const Eigen::VectorXd& u) {
    double x = u(0), y = u(1), z = u(2);
    Eigen::MatrixXd J(3, 3);
    J << -a, -2.0 * y, -2.0 * z,
         y - b * z, x - 1.0, -b * x,
         b * y + z, b * x, x - 1.0;
    return J;
  };
  p.u0 = Eigen::Vector3d(0.96, -1.1, 0.5);
  p.t_start = 0.0;
  p.t_end = 30.0;
  p.params = {{"a", a}, {"b", b}, {"F", F}, {"G", G}};
  p.labels = {"X", "Y", "Z"};
  return p;
}

OdeProblem linear_test(double lambda, double u0) {
  OdeProblem p;
  p.dim = 1;
  p.rhs = [lambda](double, const Eigen::VectorXd& u) {
    Eigen::VectorXd f(1);
    f(0) = lambda * u(0);
    return f;
  };
  p.jacobian = [lambda](double, const Eigen::VectorXd&) {
    Eigen::MatrixXd J(1, 1);
    J(0, 0) = lambda;
    return J;
  };
  p.u0 = Eigen::VectorXd::Constant(1, u0);
  p.t_start = 0.0;
  p.t_end = 1.0;
  p.params = {{"lambda", lambda}, {"u0", u0}};
  p.labels = {"u"};
  return p;
}

OdeProblem linearized_problem(const OdeProblem& p, double t, const Eigen::VectorXd& state) {
  Eigen::MatrixXd J = p.jacobian_or_fd(t, state);
  OdeProblem q;
  q.dim = p.dim;
  q.rhs = [J](double, const Eigen::VectorXd& du) { return Eigen::VectorXd(J * du); };
  q.jacobian = [J](double, const Eigen::VectorXd&) { return J; };
  q.u0 = Eigen::VectorXd::Zero(p.dim);
  q.t_start = p.t_start;
  q.t_end = p.t_end;
  q.params = p.params;
  q.labels.reserve(p.labels.size());
  for (const auto& l : p.labels) q.labels.push_back("d" + l);
  return q;
}

std::vector<std::string> problem_registry() { return {"robertson", "lorenz84", "linear"}; }

OdeProblem make_problem(const std::string& name, const std::map<std::string, double>& ov) {
  auto get = [&ov](const std::string& key, double dflt) {
    auto it = ov.find(key);
    return it == ov.end() ? dflt : it->second;
  };
  if (name == "robertson")
    return robertson(get("a", 0.04), get("b", 1e4), get("c", 3e7));
  if (name == "lorenz84")
    return lorenz84(get("a", 0.25), get("b", 4.0), get("F", 8.0), get("G", 1.0));
  if (name == "linear")
    return linear_test(get("lambda", -1.0), get("u0", 1.0));
  std::ostringstream msg;
  msg << "unknown problem '" << name << "'; available:";
  for (const auto& n : problem_registry()) msg << ' ' << n;
  throw std::invalid_argument(msg.str());
}

}  // namespace gwrm
