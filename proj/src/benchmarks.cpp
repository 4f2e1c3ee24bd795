#include <cmath>
#include <stdexcept>

#include "olps/strategies.hpp"

namespace olps {

Portfolio best_stock(const PriceRelativeSeries& series) {
  const Eigen::VectorXd log_growth = series.relatives().array().log().colwise().sum().transpose();
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < log_growth.size(); ++i) {
    if (log_growth[i] > log_growth[best]) best = i;
  }
  return Portfolio::vertex(series.num_assets(), static_cast<std::size_t>(best));
}

double crp_wealth(const PriceRelativeSeries& series, const Portfolio& w) {
  const Eigen::VectorXd gross = series.relatives() * w.weights();
  return std::exp(gross.array().log().sum());
}

namespace {

double log_wealth(const RowMatrix& X, const Eigen::VectorXd& w) { return (X * w).array().log().sum(); }

}  // namespace

// Sequential quadratic programming: each step maximizes the second-order
// model of the log-wealth over the simplex exactly, followed by an Armijo
// backtracking search along the resulting direction.
Portfolio bcrp(const PriceRelativeSeries& series, const BcrpOptions& options) {
  const RowMatrix& X = series.relatives();
  const auto m = X.cols();
  const double periods = static_cast<double>(X.rows());

  // Start from the best vertex so the result never loses to best stock.
  Eigen::VectorXd w = best_stock(series).weights();
  double f = log_wealth(X, w);
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    const Eigen::VectorXd gross = X * w;
    const Eigen::VectorXd inv = gross.cwiseInverse();
    const Eigen::VectorXd grad = X.transpose() * inv;

    // Stationarity: the averaged gradient step projects back onto w.
    const Eigen::VectorXd probe = simplex_project(w + grad / periods).weights();
    if ((probe - w).cwiseAbs().maxCoeff() < options.tolerance) return Portfolio(w);

    const RowMatrix scaled = inv.asDiagonal() * X;
    Eigen::MatrixXd H = scaled.transpose() * scaled;  // negated Hessian
    const double ridge = 1e-10 * std::max(1.0, H.trace() / static_cast<double>(m));
    H.diagonal().array() += ridge;
    Eigen::VectorXd target;
    try {
      target = solve_simplex_qp(H, grad + H * w, w);
    } catch (const QpError&) {
      target = probe;
    }
    target = target.cwiseMax(0.0);
    target /= target.sum();
    const Eigen::VectorXd direction = target - w;
    const double slope = grad.dot(direction);
    if (slope <= 0.0) return Portfolio(w);

    double step = 1.0;
    bool accepted = false;
    for (int k = 0; k < 60; ++k, step *= 0.5) {
      const Eigen::VectorXd candidate = w + step * direction;
      const double fc = log_wealth(X, candidate);
      if (std::isfinite(fc) && fc >= f + 1e-4 * step * slope) {
        w = candidate.cwiseMax(0.0);
        w /= w.sum();
        f = log_wealth(X, w);
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // No ascent left at machine precision.
      return Portfolio(w);
    }
  }
  throw std::runtime_error("BCRP optimizer did not converge");
}

}  // namespace olps
