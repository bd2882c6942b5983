#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <vector>

namespace gwrm {

// Time interval [t0, t1] with the affine map to the Chebyshev variable
// tau = (t - at())/bt(), tau in [-1, 1].
struct Interval {
  double t0;
  double t1;

  Interval(double start, double end) : t0(start), t1(end) {
    if (!(end > start)) throw std::invalid_argument("Interval: t1 must exceed t0");
  }

  double at() const { return 0.5 * (t1 + t0); }
  double bt() const { return 0.5 * (t1 - t0); }
  double length() const { return t1 - t0; }
};

// Truncated Chebyshev series of N variables on an interval.
//
// Storage uses the halved-zeroth convention: row i of coeffs holds
// a_{i,0..K} with f_i(tau) = a_{i,0}/2 + sum_{k=1..K} a_{i,k} T_k(tau),
// i.e. the stored zeroth entry is twice the true T_0 coefficient. Every
// operator below states its formula in this convention.
class ChebSeries {
 public:
  ChebSeries(Interval iv, Eigen::MatrixXd coeffs);

  int dim() const { return static_cast<int>(coeffs_.rows()); }
  int order() const { return static_cast<int>(coeffs_.cols()) - 1; }
  const Interval& interval() const { return iv_; }
  const Eigen::MatrixXd& coeffs() const { return coeffs_; }

  // Clenshaw evaluation at a single time (throws outside the interval,
  // with a small relative slack for boundary roundoff).
  Eigen::VectorXd eval(double t) const;

  // Column j = eval(ts[j]).
  Eigen::MatrixXd eval_many(const std::vector<double>& ts) const;

  // Evaluation directly in the Chebyshev variable, tau in [-1, 1].
  Eigen::VectorXd eval_tau(double tau) const;

 private:
  Interval iv_;
  Eigen::MatrixXd coeffs_;
};

// tau = (t - At)/Bt; throws if t lies outside the interval (same slack as eval).
double map_to_interval(double t, const Interval& iv);

// K+1 Chebyshev-Gauss-Lobatto points mapped to the interval, ascending,
// endpoints exact. K >= 1.
std::vector<double> lobatto_nodes(int K, const Interval& iv);

// Discrete Chebyshev transform of values sampled at lobatto_nodes(K, iv):
// values is N x (K+1), column j belonging to the j-th ascending node.
// Exact (up to roundoff) for polynomials of degree <= K.
ChebSeries fit(const Eigen::MatrixXd& values, const Interval& iv);

// g(t) = integral of s from t0 to t; order rises to K+1 and the zeroth
// coefficient is fixed so g(t0) = 0.
ChebSeries integrate_from_start(const ChebSeries& s);

// d/dt via the backward coefficient recurrence, scaled by 1/Bt; order drops
// to K-1 (a constant series differentiates to the zero series of order 0).
ChebSeries differentiate(const ChebSeries& s);

// Product truncated to order K, via T_m T_n = (T_{m+n} + T_{|m-n|})/2.
// Both inputs must share the same interval.
ChebSeries multiply(const ChebSeries& a, const ChebSeries& b, int K);

// Per-variable (|a_{K-1}| + |a_K|)/(|a_0| + |a_1|) on stored coefficients;
// a zero denominator yields +infinity (treated as not converged). K >= 2.
Eigen::VectorXd tail_ratio(const ChebSeries& s);

}  // namespace gwrm
