#pragma once
// Reference computations used by the tests. Each one is written from the
// textbook definition and shares no code with the library.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracles {

/// Simplex projection by bisection on the threshold: w = max(v - tau, 0).
inline Eigen::VectorXd project_by_bisection(const Eigen::VectorXd& v) {
  double lo = v.minCoeff() - 1.0, hi = v.maxCoeff();
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    const double s = (v.array() - mid).max(0.0).sum();
    (s > 1.0 ? lo : hi) = mid;
  }
  return (v.array() - 0.5 * (lo + hi)).max(0.0);
}

/// Golden-section maximization of a unimodal f on [a, b].
inline double golden_max(const std::function<double(double)>& f, double a, double b, int iters = 200) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a), d = a + g * (b - a);
  for (int k = 0; k < iters; ++k) {
    if (f(c) > f(d)) {
      b = d;
    } else {
      a = c;
    }
    c = b - g * (b - a);
    d = a + g * (b - a);
  }
  return 0.5 * (a + b);
}

/// Root of a monotone function on [a, b] by bisection.
inline double bisect(const std::function<double(double)>& f, double a, double b, int iters = 300) {
  const double fa = f(a);
  for (int k = 0; k < iters; ++k) {
    const double m = 0.5 * (a + b);
    if ((f(m) > 0.0) == (fa > 0.0)) {
      a = m;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

/// Student-t density integrated by composite Simpson's rule:
/// P(T > t) = 0.5 - integral_0^t pdf for t >= 0.
inline double student_t_upper_tail(double t, double nu) {
  const double log_c = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) - 0.5 * std::log(nu * std::numbers::pi);
  auto pdf = [&](double x) { return std::exp(log_c - 0.5 * (nu + 1.0) * std::log1p(x * x / nu)); };
  const double a = std::abs(t);
  const int n = 20000;
  const double h = a / n;
  double s = pdf(0.0) + pdf(a);
  for (int i = 1; i < n; ++i) s += pdf(i * h) * (i % 2 ? 4.0 : 2.0);
  const double mass = s * h / 3.0;
  return t >= 0.0 ? 0.5 - mass : 0.5 + mass;
}

inline double sample_std(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

/// Log densities written out from their definitions.
inline double lognormal_logpdf(double x, double mu, double sigma) {
  const double z = (std::log(x) - mu) / sigma;
  return -std::log(x * sigma * std::sqrt(2.0 * std::numbers::pi)) - 0.5 * z * z;
}
inline double gamma_logpdf(double x, double shape, double scale) {
  return (shape - 1.0) * std::log(x) - x / scale - std::lgamma(shape) - shape * std::log(scale);
}

/// Smallest eigenvalue of a symmetric matrix.
inline double min_eigenvalue(const Eigen::MatrixXd& K) {
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(K, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
}

/// Random point on the simplex (normalized exponentials).
inline Eigen::VectorXd random_simplex(std::size_t m, std::mt19937_64& rng) {
  std::exponential_distribution<double> e(1.0);
  Eigen::VectorXd w(static_cast<Eigen::Index>(m));
  for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = e(rng);
  return w / w.sum();
}

}  // namespace oracles
