#include "olps/portfolio.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include <fmt/format.h>

namespace olps {

Portfolio::Portfolio(Eigen::VectorXd weights) : weights_(std::move(weights)) {
  if (weights_.size() < 1) throw std::invalid_argument("portfolio needs at least one asset");
  if (!weights_.allFinite()) throw std::invalid_argument("portfolio weights must be finite");
  if ((weights_.array() < 0.0).any()) throw std::invalid_argument("negative portfolio weight");
  const double sum = weights_.sum();
  if (std::abs(sum - 1.0) > kSimplexTolerance) {
    throw std::invalid_argument(fmt::format("portfolio weights sum to {}", sum));
  }
}

Portfolio Portfolio::uniform(std::size_t m) {
  return Portfolio(Eigen::VectorXd::Constant(static_cast<Eigen::Index>(m), 1.0 / static_cast<double>(m)));
}

Portfolio Portfolio::vertex(std::size_t m, std::size_t i) {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
  w[static_cast<Eigen::Index>(i)] = 1.0;
  return Portfolio(std::move(w));
}

Portfolio simplex_project(const Eigen::Ref<const Eigen::VectorXd>& v) {
  if (v.size() < 1) throw std::invalid_argument("cannot project an empty vector");
  if (!v.allFinite()) throw std::invalid_argument("non-finite input to simplex projection");
  std::vector<double> u(v.data(), v.data() + v.size());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumsum = 0.0;
  double tau = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cumsum += u[j];
    const double candidate = (cumsum - 1.0) / static_cast<double>(j + 1);
    if (u[j] - candidate > 0.0) tau = candidate;
  }
  Eigen::VectorXd w = (v.array() - tau).max(0.0);
  // Renormalize away rounding in the threshold.
  w /= w.sum();
  return Portfolio(std::move(w));
}

double period_return(const Portfolio& w, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (static_cast<std::size_t>(x.size()) != w.size()) {
    throw std::invalid_argument(fmt::format("portfolio has {} assets, relatives have {}", w.size(), x.size()));
  }
  return w.weights().dot(x);
}

Eigen::VectorXd solve_simplex_qp(const Eigen::MatrixXd& A, const Eigen::VectorXd& c, const Eigen::VectorXd& start) {
  const Eigen::Index m = c.size();
  if (A.rows() != m || A.cols() != m || start.size() != m) throw QpError("dimension mismatch in simplex QP");

  Eigen::VectorXd w = start;
  std::vector<bool> at_zero(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) at_zero[static_cast<std::size_t>(i)] = w[i] <= 0.0;
  if (std::all_of(at_zero.begin(), at_zero.end(), [](bool b) { return b; })) throw QpError("infeasible start");

  const double scale = std::max(1.0, A.diagonal().cwiseAbs().maxCoeff());
  const int max_iterations = 50 * static_cast<int>(m) + 100;
  std::vector<Eigen::Index> free;
  for (int iter = 0; iter < max_iterations; ++iter) {
    free.clear();
    for (Eigen::Index i = 0; i < m; ++i) {
      if (!at_zero[static_cast<std::size_t>(i)]) free.push_back(i);
    }
    const auto k = static_cast<Eigen::Index>(free.size());
    const Eigen::VectorXd g = A * w - c;

    Eigen::MatrixXd a_ff(k, k);
    Eigen::VectorXd g_f(k);
    for (Eigen::Index r = 0; r < k; ++r) {
      g_f[r] = g[free[static_cast<std::size_t>(r)]];
      for (Eigen::Index s = 0; s < k; ++s) a_ff(r, s) = A(free[static_cast<std::size_t>(r)], free[static_cast<std::size_t>(s)]);
    }
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(a_ff);
    if (ldlt.info() != Eigen::Success) throw QpError("singular reduced Hessian");
    const Eigen::VectorXd inv_g = ldlt.solve(g_f);
    const Eigen::VectorXd inv_one = ldlt.solve(Eigen::VectorXd::Ones(k));
    // Step on the free set that keeps the weights summing to one.
    const double nu = -inv_g.sum() / inv_one.sum();
    const Eigen::VectorXd p = -(inv_g + nu * inv_one);
    if (!p.allFinite()) throw QpError("non-finite step in simplex QP");

    if (p.cwiseAbs().maxCoeff() <= 1e-15) {
      // Multipliers of the active bounds: mu_i = g_i - mean of g on the free set.
      const double level = g_f.mean();
      Eigen::Index release = -1;
      double most_negative = -1e-12 * scale;
      for (Eigen::Index i = 0; i < m; ++i) {
        if (!at_zero[static_cast<std::size_t>(i)]) continue;
        const double mu = g[i] - level;
        if (mu < most_negative) {
          most_negative = mu;
          release = i;
        }
      }
      if (release < 0) return w;
      at_zero[static_cast<std::size_t>(release)] = false;
      continue;
    }

    double step = 1.0;
    Eigen::Index blocking = -1;
    for (Eigen::Index r = 0; r < k; ++r) {
      if (p[r] < 0.0) {
        const Eigen::Index i = free[static_cast<std::size_t>(r)];
        const double ratio = -w[i] / p[r];
        if (ratio < step) {
          step = ratio;
          blocking = i;
        }
      }
    }
    for (Eigen::Index r = 0; r < k; ++r) w[free[static_cast<std::size_t>(r)]] += step * p[r];
    if (blocking >= 0) {
      w[blocking] = 0.0;
      at_zero[static_cast<std::size_t>(blocking)] = true;
    }
    w = w.cwiseMax(0.0);
  }
  throw QpError("simplex QP did not converge");
}

Portfolio project_in_norm(const Eigen::MatrixXd& A, const Eigen::Ref<const Eigen::VectorXd>& y, const Portfolio& start) {
  Eigen::VectorXd w = solve_simplex_qp(A, A * y, start.weights());
  w = w.cwiseMax(0.0);
  w /= w.sum();
  return Portfolio(std::move(w));
}

}  // namespace olps
