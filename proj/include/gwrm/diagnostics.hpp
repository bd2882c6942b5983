#pragma once

#include "gwrm/problems.hpp"

#include <Eigen/Dense>

#include <complex>
#include <vector>

namespace gwrm {

enum class Classification { neutral, stiff, chaotic, both };

const char* to_string(Classification c);

struct ClassifyConfig {
  double chaos_threshold = 1e-8;  // Re gamma above this counts as growth
  double stiff_threshold = 10.0;  // most negative Re gamma must beat this
  double spread = 100.0;          // fast/slow scale separation required
};

// Local Lyapunov exponents at a frozen state: the eigenvalues of the
// Jacobian there (descending real part), with classification and optional
// |Re gamma|*dt products for a caller-supplied interval length.
struct LleReport {
  double t = 0.0;
  Eigen::VectorXd state;
  Eigen::MatrixXd jacobian;
  std::vector<std::complex<double>> eigenvalues;
  Classification classification = Classification::neutral;
  std::vector<double> gamma_dt;
};

struct ModeEstimate {
  double N_e = 0.0;
  double epsilon = 0.0;
  int O_t = 0;
  int K_a = 0;
};

// All eigenvalues of a real matrix with N <= 4, via the characteristic
// polynomial: Faddeev-LeVerrier coefficients, closed-form root seeds
// (quadratic / Cardano / Ferrari), complex Newton polish, and a
// cluster-centroid merge for multiple roots (applied only when it reduces
// the polynomial residual). N > 4 is unsupported.
std::vector<std::complex<double>> eigenvalues_small(const Eigen::MatrixXd& J);

// Unit eigenvector for a computed eigenvalue, by inverse iteration.
Eigen::VectorXcd eigenvector_for(const Eigen::MatrixXd& J, std::complex<double> gamma);

Classification classify(const std::vector<std::complex<double>>& eigs,
                        const ClassifyConfig& cfg = {});

LleReport lle(const OdeProblem& p, double t, const Eigen::VectorXd& state,
              double dt = 0.0, const ClassifyConfig& cfg = {});

// Count of interior extrema in a sampled signal: sign changes of successive
// finite differences, ignoring steps below 1e-12 of the sample range.
// Requires at least 3 samples.
int count_extrema(const std::vector<double>& samples);

// Required Chebyshev order for a signal with N_e extrema at target accuracy
// epsilon (1e-2 or 1e-3 supported), plus the temporal-order correction O_t:
// K_a = ceil(slope * N_e + intercept + O_t).
ModeEstimate estimate_modes(double N_e, double epsilon, int O_t = 0);

}  // namespace gwrm
