#pragma once

#include <cstddef>
#include <stdexcept>

#include <Eigen/Dense>

namespace olps {

/// Tolerance on the weight sum of a valid portfolio.
inline constexpr double kSimplexTolerance = 1e-9;

/// Nonnegative weights summing to one: no margin and no short selling.
class Portfolio {
 public:
  /// Throws std::invalid_argument unless `weights` lies on the simplex.
  explicit Portfolio(Eigen::VectorXd weights);

  static Portfolio uniform(std::size_t m);
  static Portfolio vertex(std::size_t m, std::size_t i);

  const Eigen::VectorXd& weights() const { return weights_; }
  std::size_t size() const { return static_cast<std::size_t>(weights_.size()); }
  double operator[](std::size_t i) const { return weights_[static_cast<Eigen::Index>(i)]; }

  friend bool operator==(const Portfolio& a, const Portfolio& b) { return a.weights_ == b.weights_; }

 private:
  Eigen::VectorXd weights_;
};

/// Euclidean projection onto the probability simplex (sort-based).
Portfolio simplex_project(const Eigen::Ref<const Eigen::VectorXd>& v);

/// Gross return w . x of holding `w` through a period with relatives `x`.
double period_return(const Portfolio& w, const Eigen::Ref<const Eigen::VectorXd>& x);

class QpError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Minimizes 0.5 w'Aw - c'w over the simplex with a primal active-set
/// method. `A` must be symmetric positive definite; `start` must be feasible.
Eigen::VectorXd solve_simplex_qp(const Eigen::MatrixXd& A, const Eigen::VectorXd& c, const Eigen::VectorXd& start);

/// argmin over the simplex of (w - y)' A (w - y).
Portfolio project_in_norm(const Eigen::MatrixXd& A, const Eigen::Ref<const Eigen::VectorXd>& y,
                          const Portfolio& start);

}  // namespace olps
