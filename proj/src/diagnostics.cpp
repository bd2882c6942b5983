#include "gwrm/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

namespace gwrm {

namespace {

using cplx = std::complex<double>;

bool finite(const cplx& z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

// Monic characteristic polynomial det(gamma I - J) = gamma^n + c[n-1] gamma^{n-1} + ... + c[0]
// by the Faddeev-LeVerrier recurrence.
std::vector<double> char_poly(const Eigen::MatrixXd& J) {
  const int n = static_cast<int>(J.rows());
  std::vector<double> c(static_cast<std::size_t>(n), 0.0);
  Eigen::MatrixXd B = Eigen::MatrixXd::Identity(n, n);
  for (int k = 1; k <= n; ++k) {
    Eigen::MatrixXd Ak = J * B;
    const double ck = -Ak.trace() / static_cast<double>(k);
    c[static_cast<std::size_t>(n - k)] = ck;
    B = Ak + ck * Eigen::MatrixXd::Identity(n, n);
  }
  return c;
}

// p(x) and p'(x) for the monic polynomial with low-order coefficients c.
std::pair<cplx, cplx> horner(const std::vector<double>& c, const cplx& x) {
  cplx p(1.0, 0.0);
  cplx dp(0.0, 0.0);
  for (int k = static_cast<int>(c.size()) - 1; k >= 0; --k) {
    dp = dp * x + p;
    p = p * x + c[static_cast<std::size_t>(k)];
  }
  return {p, dp};
}

cplx cbrt_principal(const cplx& z) {
  if (z == cplx(0.0, 0.0)) return {0.0, 0.0};
  return std::pow(z, 1.0 / 3.0);
}

std::vector<cplx> roots_quadratic(double b, double c) {
  // x^2 + b x + c
  const cplx disc = std::sqrt(cplx(b * b - 4.0 * c, 0.0));
  // form the numerically stable root first, recover the other from the product
  const cplx q = (b >= 0.0) ? (-0.5 * (cplx(b, 0.0) + disc)) : (-0.5 * (cplx(b, 0.0) - disc));
  if (std::abs(q) > 0.0) return {q, cplx(c, 0.0) / q};
  return {q, -q};
}

std::vector<cplx> roots_quadratic_c(const cplx& b, const cplx& c) {
  const cplx disc = std::sqrt(b * b - 4.0 * c);
  cplx q = -0.5 * (b + disc);
  if (std::abs(q) < std::abs(-0.5 * (b - disc))) q = -0.5 * (b - disc);
  if (std::abs(q) > 0.0) return {q, c / q};
  return {q, -q};
}

std::vector<cplx> roots_cubic(double a, double b, double c) {
  // x^3 + a x^2 + b x + c; depress with x = y - a/3
  const double p = b - a * a / 3.0;
  const double q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
  const cplx shift(-a / 3.0, 0.0);
  const double scale = std::max({1.0, std::abs(p), std::abs(q)});

  const cplx disc = std::sqrt(cplx(q * q / 4.0 + p * p * p / 27.0, 0.0));
  cplx u3 = cplx(-q / 2.0, 0.0) + disc;
  if (std::abs(u3) < std::abs(cplx(-q / 2.0, 0.0) - disc)) u3 = cplx(-q / 2.0, 0.0) - disc;

  const cplx omega(-0.5, std::sqrt(3.0) / 2.0);
  std::vector<cplx> ys;
  if (std::abs(u3) < 1e-300 * scale) {
    // p and q both vanish at this scale: y^3 = -q
    const cplx y0 = cbrt_principal(cplx(-q, 0.0));
    ys = {y0, y0 * omega, y0 * omega * omega};
  } else {
    const cplx u = cbrt_principal(u3);
    const cplx v = cplx(-p / 3.0, 0.0) / u;
    ys = {u + v, u * omega + v * omega * omega, u * omega * omega + v * omega};
  }
  for (auto& y : ys) y += shift;
  return ys;
}

std::vector<cplx> roots_quartic(double a, double b, double c, double d) {
  // x^4 + a x^3 + b x^2 + c x + d; depress with x = y - a/4
  const double p = b - 3.0 * a * a / 8.0;
  const double q = c - a * b / 2.0 + a * a * a / 8.0;
  const double r = d - a * c / 4.0 + a * a * b / 16.0 - 3.0 * a * a * a * a / 256.0;
  const cplx shift(-a / 4.0, 0.0);
  const double scale = std::max({1.0, std::abs(p), std::abs(q), std::abs(r)});

  std::vector<cplx> ys;
  if (std::abs(q) <= 1e-14 * scale) {
    // biquadratic: z^2 + p z + r with z = y^2
    for (const cplx& z : roots_quadratic(p, r)) {
      const cplx s = std::sqrt(z);
      ys.push_back(s);
      ys.push_back(-s);
    }
  } else {
    // resolvent cubic m^3 + p m^2 + (p^2/4 - r) m - q^2/8 = 0; any nonzero
    // root m yields the split into two quadratics via s = sqrt(2m)
    std::vector<cplx> ms = roots_cubic(p, p * p / 4.0 - r, -q * q / 8.0);
    cplx m = ms[0];
    for (const cplx& cand : ms)
      if (std::abs(cand) > std::abs(m)) m = cand;
    const cplx s = std::sqrt(2.0 * m);
    const cplx A = 0.5 * (cplx(p, 0.0) + 2.0 * m - cplx(q, 0.0) / s);
    const cplx B = 0.5 * (cplx(p, 0.0) + 2.0 * m + cplx(q, 0.0) / s);
    for (const cplx& y : roots_quadratic_c(s, A)) ys.push_back(y);
    for (const cplx& y : roots_quadratic_c(-s, B)) ys.push_back(y);
  }
  for (auto& y : ys) y += shift;
  return ys;
}

std::vector<cplx> seed_roots(const std::vector<double>& c) {
  switch (c.size()) {
    case 1:
      return {cplx(-c[0], 0.0)};
    case 2:
      return roots_quadratic(c[1], c[0]);
    case 3:
      return roots_cubic(c[2], c[1], c[0]);
    case 4:
      return roots_quartic(c[3], c[2], c[1], c[0]);
    default:
      throw std::invalid_argument("eigenvalues_small: only dimensions 1..4 are supported");
  }
}

void newton_polish(const std::vector<double>& c, std::vector<cplx>& roots) {
  for (auto& x : roots) {
    for (int it = 0; it < 40; ++it) {
      const auto [p, dp] = horner(c, x);
      if (std::abs(dp) < 1e-300) break;
      const cplx dx = p / dp;
      if (!finite(dx)) break;
      x -= dx;
      if (std::abs(dx) <= 1e-15 * std::max(1.0, std::abs(x))) break;
    }
  }
}

// Replace near-coincident root pairs by their centroid when that does not
// increase the polynomial residual. A cluster of a multiplicity-m root is
// spread O(eps^{1/m}) by rounding, while its centroid recovers the root to
// near machine precision; genuinely distinct roots fail the residual test
// and are left alone.
void merge_clusters(const std::vector<double>& c, std::vector<cplx>& roots) {
  double scale = 1.0;
  for (const auto& x : roots) scale = std::max(scale, std::abs(x));
  bool changed = true;
  int guard = 0;
  while (changed && guard++ < 8) {
    changed = false;
    for (std::size_t i = 0; i < roots.size(); ++i) {
      for (std::size_t j = i + 1; j < roots.size(); ++j) {
        if (std::abs(roots[i] - roots[j]) > 1e-4 * scale) continue;
        if (roots[i] == roots[j]) continue;
        const cplx mid = 0.5 * (roots[i] + roots[j]);
        const double before =
            std::max(std::abs(horner(c, roots[i]).first), std::abs(horner(c, roots[j]).first));
        const double after = std::abs(horner(c, mid).first);
        if (after <= before) {
          roots[i] = mid;
          roots[j] = mid;
          changed = true;
        }
      }
    }
  }
}

// Real-coefficient polynomials have conjugate-symmetric root sets; snap
// near-real roots to the axis and average conjugate partners so the
// returned set satisfies the symmetry exactly.
void enforce_conjugate_symmetry(std::vector<cplx>& roots) {
  double scale = 1.0;
  for (const auto& x : roots) scale = std::max(scale, std::abs(x));
  for (auto& x : roots)
    if (std::abs(x.imag()) <= 1e-9 * scale) x = cplx(x.real(), 0.0);

  std::vector<std::size_t> open;
  for (std::size_t i = 0; i < roots.size(); ++i)
    if (roots[i].imag() != 0.0) open.push_back(i);

  while (!open.empty()) {
    if (open.size() == 1) {
      roots[open[0]] = cplx(roots[open[0]].real(), 0.0);
      break;
    }
    const std::size_t i = open[0];
    std::size_t best = 1;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < open.size(); ++k) {
      const double d = std::abs(roots[i] - std::conj(roots[open[k]]));
      if (d < best_d) {
        best_d = d;
        best = k;
      }
    }
    const std::size_t j = open[best];
    const cplx m = 0.5 * (roots[i] + std::conj(roots[j]));
    roots[i] = m;
    roots[j] = std::conj(m);
    open.erase(open.begin() + static_cast<std::ptrdiff_t>(best));
    open.erase(open.begin());
  }
}

void sort_desc_real(std::vector<cplx>& roots) {
  std::sort(roots.begin(), roots.end(), [](const cplx& a, const cplx& b) {
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() > b.imag();
  });
}

}  // namespace

const char* to_string(Classification c) {
  switch (c) {
    case Classification::neutral:
      return "neutral";
    case Classification::stiff:
      return "stiff";
    case Classification::chaotic:
      return "chaotic";
    case Classification::both:
      return "both";
  }
  return "?";
}

std::vector<std::complex<double>> eigenvalues_small(const Eigen::MatrixXd& J) {
  if (J.rows() != J.cols() || J.rows() < 1)
    throw std::invalid_argument("eigenvalues_small: matrix must be square and non-empty");
  if (J.rows() > 4)
    throw std::invalid_argument("eigenvalues_small: only dimensions 1..4 are supported");
  if (!J.allFinite()) throw std::domain_error("eigenvalues_small: matrix has non-finite entries");

  const std::vector<double> c = char_poly(J);
  std::vector<cplx> roots = seed_roots(c);
  newton_polish(c, roots);
  merge_clusters(c, roots);
  enforce_conjugate_symmetry(roots);
  sort_desc_real(roots);
  for (const auto& r : roots)
    if (!finite(r)) throw std::domain_error("eigenvalues_small: root finding failed");
  return roots;
}

Eigen::VectorXcd eigenvector_for(const Eigen::MatrixXd& J, std::complex<double> gamma) {
  const int n = static_cast<int>(J.rows());
  if (J.rows() != J.cols() || n < 1)
    throw std::invalid_argument("eigenvector_for: matrix must be square and non-empty");

  double scale = std::max(1.0, std::abs(gamma));
  scale = std::max(scale, J.cwiseAbs().maxCoeff());
  // a fixed complex jitter keeps the shifted matrix invertible even when
  // gamma is exact, at the cost of an O(jitter/gap) eigenvector error
  const cplx shift = gamma + cplx(1e-13 * scale, 7e-14 * scale);

  Eigen::MatrixXcd M = J.cast<cplx>();
  for (int i = 0; i < n; ++i) M(i, i) -= shift;
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(M);

  Eigen::VectorXcd v = Eigen::VectorXcd::Constant(n, cplx(1.0, 0.0));
  v.normalize();
  for (int it = 0; it < 4; ++it) {
    Eigen::VectorXcd w = lu.solve(v);
    if (!w.allFinite() || w.norm() == 0.0) break;
    v = w.normalized();
  }

  // deterministic phase: largest component real and positive
  int imax = 0;
  v.cwiseAbs().maxCoeff(&imax);
  const cplx piv = v(imax);
  if (std::abs(piv) > 0.0) v *= std::conj(piv) / std::abs(piv);
  return v;
}

Classification classify(const std::vector<std::complex<double>>& eigs, const ClassifyConfig& cfg) {
  if (eigs.empty()) throw std::invalid_argument("classify: empty eigenvalue list");

  bool chaotic = false;
  double min_re = std::numeric_limits<double>::infinity();
  double slowest = std::numeric_limits<double>::infinity();
  for (const auto& g : eigs) {
    const double re = g.real();
    if (re > cfg.chaos_threshold) chaotic = true;
    min_re = std::min(min_re, re);
    if (std::abs(re) > cfg.chaos_threshold) slowest = std::min(slowest, std::abs(re));
  }

  bool stiff = false;
  if (min_re < -cfg.stiff_threshold) {
    const double denom = std::max(std::isfinite(slowest) ? slowest : 0.0, cfg.chaos_threshold);
    stiff = (std::abs(min_re) / denom) > cfg.spread;
  }

  if (chaotic && stiff) return Classification::both;
  if (chaotic) return Classification::chaotic;
  if (stiff) return Classification::stiff;
  return Classification::neutral;
}

LleReport lle(const OdeProblem& p, double t, const Eigen::VectorXd& state, double dt,
              const ClassifyConfig& cfg) {
  if (state.size() != p.dim) throw std::invalid_argument("lle: state dimension mismatch");
  if (!std::isfinite(t) || !state.allFinite())
    throw std::domain_error("lle: non-finite evaluation point");

  LleReport rep;
  rep.t = t;
  rep.state = state;
  rep.jacobian = p.jacobian_or_fd(t, state);
  rep.eigenvalues = eigenvalues_small(rep.jacobian);
  rep.classification = classify(rep.eigenvalues, cfg);
  if (dt > 0.0) {
    rep.gamma_dt.reserve(rep.eigenvalues.size());
    for (const auto& g : rep.eigenvalues) rep.gamma_dt.push_back(std::abs(g.real()) * dt);
  }
  return rep;
}

int count_extrema(const std::vector<double>& samples) {
  if (samples.size() < 3) throw std::domain_error("count_extrema: need at least 3 samples");

  double lo = samples[0];
  double hi = samples[0];
  for (double s : samples) {
    if (!std::isfinite(s)) throw std::domain_error("count_extrema: non-finite sample");
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  const double tol = 1e-12 * (hi - lo);

  int count = 0;
  int prev_sign = 0;
  for (std::size_t i = 1; i < samples.size(); ++i) {
    const double d = samples[i] - samples[i - 1];
    if (std::abs(d) <= tol) continue;  // plateau step, no direction information
    const int sign = d > 0.0 ? 1 : -1;
    if (prev_sign != 0 && sign != prev_sign) ++count;
    prev_sign = sign;
  }
  return count;
}

ModeEstimate estimate_modes(double N_e, double epsilon, int O_t) {
  if (!(N_e >= 0.0) || !std::isfinite(N_e))
    throw std::invalid_argument("estimate_modes: extrema count must be non-negative");
  if (O_t < 0) throw std::invalid_argument("estimate_modes: temporal order must be non-negative");

  double slope = 0.0;
  double intercept = 0.0;
  if (std::abs(epsilon - 1e-2) <= 1e-12) {
    slope = 1.5;
    intercept = 3.5;
  } else if (std::abs(epsilon - 1e-3) <= 1e-12) {
    slope = 1.7;
    intercept = 4.4;
  } else {
    throw std::invalid_argument("estimate_modes: accuracy must be 1e-2 or 1e-3");
  }

  ModeEstimate est;
  est.N_e = N_e;
  est.epsilon = epsilon;
  est.O_t = O_t;
  est.K_a = static_cast<int>(std::ceil(slope * N_e + intercept + static_cast<double>(O_t)));
  return est;
}

}  // namespace gwrm
