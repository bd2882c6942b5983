#include "gwrm/chebyshev.hpp"

#include <cmath>
#include <limits>

namespace gwrm {

namespace {

double boundary_slack(const Interval& iv) {
  return 1e-9 * (std::abs(iv.t0) + std::abs(iv.t1) + iv.length());
}

double checked_tau(double t, const Interval& iv) {
  const double slack = boundary_slack(iv);
  if (t < iv.t0 - slack || t > iv.t1 + slack)
    throw std::domain_error("time outside series interval");
  double tau = (t - iv.at()) / iv.bt();
  return std::clamp(tau, -1.0, 1.0);
}

// T_k(tau) for k = 0..K by the three-term recurrence.
Eigen::VectorXd cheb_row(double tau, int K) {
  Eigen::VectorXd T(K + 1);
  T(0) = 1.0;
  if (K >= 1) T(1) = tau;
  for (int k = 2; k <= K; ++k) T(k) = 2.0 * tau * T(k - 1) - T(k - 2);
  return T;
}

}  // namespace

ChebSeries::ChebSeries(Interval iv, Eigen::MatrixXd coeffs)
    : iv_(iv), coeffs_(std::move(coeffs)) {
  if (coeffs_.rows() < 1 || coeffs_.cols() < 1)
    throw std::invalid_argument("ChebSeries: empty coefficient matrix");
  if (!coeffs_.allFinite())
    throw std::invalid_argument("ChebSeries: non-finite coefficients");
}

Eigen::VectorXd ChebSeries::eval_tau(double tau) const {
  const int K = order();
  const int N = dim();
  Eigen::VectorXd b1 = Eigen::VectorXd::Zero(N);
  Eigen::VectorXd b2 = Eigen::VectorXd::Zero(N);
  for (int k = K; k >= 1; --k) {
    Eigen::VectorXd next = 2.0 * tau * b1 - b2 + coeffs_.col(k);
    b2 = b1;
    b1 = next;
  }
  return tau * b1 - b2 + 0.5 * coeffs_.col(0);
}

Eigen::VectorXd ChebSeries::eval(double t) const {
  return eval_tau(checked_tau(t, iv_));
}

Eigen::MatrixXd ChebSeries::eval_many(const std::vector<double>& ts) const {
  Eigen::MatrixXd out(dim(), static_cast<Eigen::Index>(ts.size()));
  for (size_t j = 0; j < ts.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = eval(ts[j]);
  return out;
}

double map_to_interval(double t, const Interval& iv) { return checked_tau(t, iv); }

std::vector<double> lobatto_nodes(int K, const Interval& iv) {
  if (K < 1) throw std::invalid_argument("lobatto_nodes: K must be >= 1");
  std::vector<double> nodes(K + 1);
  // sin form of the Gauss-Lobatto abscissae: ascending, symmetric, and the
  // endpoints and midpoint come out exact.
  for (int j = 0; j <= K; ++j) {
    double tau = std::sin(M_PI * (2.0 * j - K) / (2.0 * K));
    nodes[j] = iv.at() + iv.bt() * tau;
  }
  nodes.front() = iv.t0;
  nodes.back() = iv.t1;
  return nodes;
}

ChebSeries fit(const Eigen::MatrixXd& values, const Interval& iv) {
  const int K = static_cast<int>(values.cols()) - 1;
  if (K < 1) throw std::invalid_argument("fit: need at least 2 samples");

  // a_k = (2/K) * sum''_j f(tau_j) T_k(tau_j), the double prime halving the
  // j=0 and j=K terms; the k=K row is halved once more. With the halved
  // zeroth storage no further adjustment of a_0 is needed.
  Eigen::MatrixXd T(K + 1, K + 1);
  for (int j = 0; j <= K; ++j) {
    double tau = std::sin(M_PI * (2.0 * j - K) / (2.0 * K));
    T.row(j) = cheb_row(tau, K).transpose();
  }
  Eigen::VectorXd w = Eigen::VectorXd::Constant(K + 1, 2.0 / K);
  w(0) *= 0.5;
  w(K) *= 0.5;

  Eigen::MatrixXd coeffs = values * w.asDiagonal() * T;
  coeffs.col(K) *= 0.5;
  return ChebSeries(iv, std::move(coeffs));
}

ChebSeries integrate_from_start(const ChebSeries& s) {
  const int K = s.order();
  const int N = s.dim();
  const double bt = s.interval().bt();
  const Eigen::MatrixXd& c = s.coeffs();

  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(N, K + 2);
  for (int k = 1; k <= K + 1; ++k) {
    Eigen::VectorXd lower = c.col(k - 1);
    Eigen::VectorXd upper = (k + 1 <= K) ? Eigen::VectorXd(c.col(k + 1))
                                         : Eigen::VectorXd(Eigen::VectorXd::Zero(N));
    g.col(k) = bt * (lower - upper) / (2.0 * k);
  }
  // anchor: g(tau=-1) = g_0/2 + sum_k g_k (-1)^k = 0
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(N);
  for (int k = 1; k <= K + 1; ++k) acc += (k % 2 == 0 ? 1.0 : -1.0) * g.col(k);
  g.col(0) = -2.0 * acc;
  return ChebSeries(s.interval(), std::move(g));
}

ChebSeries differentiate(const ChebSeries& s) {
  const int K = s.order();
  const int N = s.dim();
  const double bt = s.interval().bt();
  const Eigen::MatrixXd& c = s.coeffs();

  if (K == 0) return ChebSeries(s.interval(), Eigen::MatrixXd::Zero(N, 1));

  // D_{k-1} = D_{k+1} + 2k c_k, downward; valid as-is in halved storage.
  Eigen::MatrixXd ext = Eigen::MatrixXd::Zero(N, K + 2);
  for (int k = K; k >= 1; --k) ext.col(k - 1) = ext.col(k + 1) + 2.0 * k * c.col(k);
  Eigen::MatrixXd d = ext.leftCols(K) / bt;
  return ChebSeries(s.interval(), std::move(d));
}

ChebSeries multiply(const ChebSeries& a, const ChebSeries& b, int K) {
  const Interval& ia = a.interval();
  const Interval& ib = b.interval();
  if (ia.t0 != ib.t0 || ia.t1 != ib.t1)
    throw std::domain_error("multiply: operands live on different intervals");
  if (a.dim() != b.dim())
    throw std::invalid_argument("multiply: operand dimensions differ");
  if (K < 0) throw std::invalid_argument("multiply: negative target order");

  const int Ka = a.order(), Kb = b.order();
  const int N = a.dim();

  // Work with true (unhalved) coefficients, convolve, then re-halve.
  Eigen::MatrixXd A = a.coeffs();
  A.col(0) *= 0.5;
  Eigen::MatrixXd B = b.coeffs();
  B.col(0) *= 0.5;

  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(N, K + 1);
  for (int m = 0; m <= Ka; ++m) {
    for (int n = 0; n <= Kb; ++n) {
      Eigen::ArrayXd term = 0.5 * A.col(m).array() * B.col(n).array();
      int hi = m + n;
      int lo = std::abs(m - n);
      if (hi <= K) H.col(hi) += term.matrix();
      if (lo <= K) H.col(lo) += term.matrix();
    }
  }
  H.col(0) *= 2.0;
  return ChebSeries(ia, std::move(H));
}

Eigen::VectorXd tail_ratio(const ChebSeries& s) {
  const int K = s.order();
  if (K < 2) throw std::domain_error("tail_ratio: order must be >= 2");
  const Eigen::MatrixXd& c = s.coeffs();
  Eigen::VectorXd r(s.dim());
  for (int i = 0; i < s.dim(); ++i) {
    double num = std::abs(c(i, K - 1)) + std::abs(c(i, K));
    double den = std::abs(c(i, 0)) + std::abs(c(i, 1));
    r(i) = den > 0.0 ? num / den : std::numeric_limits<double>::infinity();
  }
  return r;
}

}  // namespace gwrm
