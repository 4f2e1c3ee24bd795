#include <cmath>
#include <limits>
#include <optional>
#include <random>

#include "olps/gp.hpp"

namespace olps::gp {

namespace {

struct Objective {
  const GPDataset& data;
  const KernelHyperparams& shape;
  const HyperPriors& priors;

  /// Negated MAP objective and gradient; nullopt where the Gram matrix
  /// cannot be factored.
  std::optional<std::pair<double, Eigen::VectorXd>> operator()(const Eigen::VectorXd& x) const {
    try {
      const Evidence e = log_evidence(data, shape.with_log_vector(x), priors);
      if (!std::isfinite(e.value) || !e.gradient.allFinite()) return std::nullopt;
      return std::make_pair(-e.value, Eigen::VectorXd(-e.gradient));
    } catch (const FactorizationError&) {
      return std::nullopt;
    }
  }
};

struct Minimum {
  Eigen::VectorXd x;
  double f = std::numeric_limits<double>::infinity();
  int iterations = 0;
};

Eigen::VectorXd clamp(Eigen::VectorXd x, double bound) { return x.cwiseMax(-bound).cwiseMin(bound); }

Minimum bfgs(const Objective& objective, Eigen::VectorXd x, const FitOptions& options) {
  Minimum out;
  x = clamp(std::move(x), options.log_bound);
  auto first = objective(x);
  if (!first) return out;
  auto [f, g] = *first;
  out = {x, f, 0};
  const Eigen::Index P = x.size();
  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(P, P);
  bool scaled = false;
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    out.iterations = iter;
    if (g.cwiseAbs().maxCoeff() < options.gradient_tolerance) break;
    Eigen::VectorXd d = -H * g;
    if (g.dot(d) >= 0.0) {
      H.setIdentity();
      d = -g;
    }
    // Cap the trial move at one unit of log-scale per coordinate.
    const double longest = d.cwiseAbs().maxCoeff();
    if (longest > 1.0) d /= longest;

    double step = 1.0;
    std::optional<std::pair<double, Eigen::VectorXd>> next;
    Eigen::VectorXd x_next;
    for (int k = 0; k < 30; ++k, step *= 0.5) {
      x_next = clamp(x + step * d, options.log_bound);
      next = objective(x_next);
      if (next && next->first <= f + 1e-4 * g.dot(x_next - x)) break;
      next.reset();
    }
    if (!next) break;
    const Eigen::VectorXd s = x_next - x;
    const Eigen::VectorXd y = next->second - g;
    const double sy = s.dot(y);
    const double f_prev = f;
    x = x_next;
    f = next->first;
    g = next->second;
    if (sy > 1e-12) {
      if (!scaled) {
        H *= sy / y.squaredNorm();
        scaled = true;
      }
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(P, P);
      H = (I - rho * s * y.transpose()) * H * (I - rho * y * s.transpose()) + rho * s * s.transpose();
    }
    out = {x, f, iter + 1};
    if (std::abs(f_prev - f) <= 1e-10 * std::max(1.0, std::abs(f))) break;
  }
  return out;
}

Eigen::VectorXd sample_from_priors(const KernelHyperparams& shape, const HyperPriors& priors, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  auto log_normal = [&](const LogNormalPrior& p) { return p.mu + p.sigma * normal(rng); };
  auto log_gamma = [&](const GammaPrior& p) {
    std::gamma_distribution<double> gamma(p.shape, p.scale);
    return std::log(std::max(gamma(rng), 1e-6));
  };
  Eigen::VectorXd v(static_cast<Eigen::Index>(shape.num_parameters()));
  Eigen::Index k = 0;
  v[k++] = log_normal(priors.sigma_f);
  for (std::size_t i = 0; i < shape.dims(); ++i) v[k++] = log_normal(priors.lengthscale);
  for (std::size_t i = 0; i < shape.dims(); ++i) v[k++] = log_normal(priors.alpha);
  v[k++] = log_gamma(priors.temporal_l);
  v[k++] = log_gamma(priors.temporal_alpha);
  if (shape.temporal_l2) v[k++] = log_gamma(priors.temporal_l);
  v[k++] = log_normal(priors.noise);
  return v;
}

}  // namespace

FitResult fit_map(const GPDataset& data, const KernelHyperparams& init, const HyperPriors& priors,
                  const FitOptions& options) {
  init.validate();
  if (data.size() == 0) throw std::invalid_argument("cannot fit hyperparameters to an empty dataset");
  const Objective objective{data, init, priors};
  std::mt19937_64 rng(options.seed);

  FitResult result;
  result.hyperparams = init;
  const auto at_init = objective(init.to_log_vector());
  result.initial_objective = at_init ? -at_init->first : -std::numeric_limits<double>::infinity();
  result.objective = result.initial_objective;

  const int restarts = std::max(1, options.restarts);
  for (int r = 0; r < restarts; ++r) {
    const Eigen::VectorXd start = r == 0 ? init.to_log_vector() : sample_from_priors(init, priors, rng);
    const Minimum m = bfgs(objective, start, options);
    if (m.x.size() > 0 && -m.f > result.objective) {
      result.objective = -m.f;
      result.hyperparams = init.with_log_vector(m.x);
      result.iterations = m.iterations;
    }
  }
  if (!std::isfinite(result.objective)) throw FactorizationError("no restart produced a factorizable kernel matrix");
  return result;
}

}  // namespace olps::gp
