#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "olps/oracle.hpp"

namespace olps::oracle {

void ParamBounds::validate() const {
  if (lo.size() != hi.size()) throw std::invalid_argument("bounds lo/hi differ in size");
  for (std::size_t d = 0; d < lo.size(); ++d) {
    if (!std::isfinite(lo[d]) || !std::isfinite(hi[d]) || !(lo[d] < hi[d])) {
      throw std::invalid_argument("parameter bounds must be finite with lo < hi");
    }
  }
}

std::vector<double> ParamBounds::clip(std::span<const double> theta) const {
  std::vector<double> out(theta.begin(), theta.end());
  for (std::size_t d = 0; d < out.size(); ++d) out[d] = std::clamp(out[d], lo[d], hi[d]);
  return out;
}

bool ParamBounds::contains(std::span<const double> theta) const {
  if (theta.size() != dims()) return false;
  for (std::size_t d = 0; d < dims(); ++d) {
    if (!(theta[d] >= lo[d] && theta[d] <= hi[d])) return false;
  }
  return true;
}

std::vector<std::vector<double>> lhs_init(const ParamBounds& bounds, std::size_t n, std::uint64_t seed) {
  bounds.validate();
  if (n < 1) throw std::invalid_argument("LHS needs at least one point");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::vector<double>> points(n, std::vector<double>(bounds.dims()));
  std::vector<std::size_t> strata(n);
  for (std::size_t d = 0; d < bounds.dims(); ++d) {
    std::iota(strata.begin(), strata.end(), std::size_t{0});
    std::shuffle(strata.begin(), strata.end(), rng);
    for (std::size_t i = 0; i < n; ++i) {
      const double u = (static_cast<double>(strata[i]) + unit(rng)) / static_cast<double>(n);
      points[i][d] = std::min(bounds.lo[d] + u * bounds.width(d), bounds.hi[d]);
    }
  }
  return points;
}

PsoResult pso_maximize(const BatchObjective& objective, const ParamBounds& bounds, const PsoConfig& config,
                       std::uint64_t seed) {
  bounds.validate();
  const auto D = static_cast<Eigen::Index>(bounds.dims());
  const std::size_t particles = std::max<std::size_t>(1, config.particles);
  const auto P = static_cast<Eigen::Index>(particles);

  Eigen::MatrixXd position(D, P);
  const auto seeds = lhs_init(bounds, particles, seed);
  for (Eigen::Index p = 0; p < P; ++p) {
    for (Eigen::Index d = 0; d < D; ++d) position(d, p) = seeds[static_cast<std::size_t>(p)][static_cast<std::size_t>(d)];
  }
  Eigen::VectorXd vmax(D), lo(D), hi(D);
  for (Eigen::Index d = 0; d < D; ++d) {
    lo[d] = bounds.lo[static_cast<std::size_t>(d)];
    hi[d] = bounds.hi[static_cast<std::size_t>(d)];
    vmax[d] = config.velocity_clamp * (hi[d] - lo[d]);
  }

  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::MatrixXd velocity = Eigen::MatrixXd::Zero(D, P);

  Eigen::VectorXd value = objective(position);
  PsoResult result;
  result.initial_values.assign(value.data(), value.data() + value.size());
  Eigen::MatrixXd personal = position;
  Eigen::VectorXd personal_value = value;
  Eigen::Index best = 0;
  for (Eigen::Index p = 1; p < P; ++p) {
    if (value[p] > value[best]) best = p;
  }
  Eigen::VectorXd global = position.col(best);
  double global_value = value[best];

  for (std::size_t iter = 0; iter < config.iterations; ++iter) {
    for (Eigen::Index p = 0; p < P; ++p) {
      for (Eigen::Index d = 0; d < D; ++d) {
        const double r1 = unit(rng);
        const double r2 = unit(rng);
        double v = config.inertia * velocity(d, p) + config.cognitive * r1 * (personal(d, p) - position(d, p)) +
                   config.social * r2 * (global[d] - position(d, p));
        v = std::clamp(v, -vmax[d], vmax[d]);
        velocity(d, p) = v;
        position(d, p) = std::clamp(position(d, p) + v, lo[d], hi[d]);
      }
    }
    value = objective(position);
    for (Eigen::Index p = 0; p < P; ++p) {
      if (value[p] > personal_value[p]) {
        personal_value[p] = value[p];
        personal.col(p) = position.col(p);
      }
      if (value[p] > global_value) {
        global_value = value[p];
        global = position.col(p);
      }
    }
  }
  result.best.assign(global.data(), global.data() + D);
  result.best = bounds.clip(result.best);
  result.value = global_value;
  return result;
}

PsoResult pso_maximize(const std::function<double(std::span<const double>)>& objective, const ParamBounds& bounds,
                       const PsoConfig& config, std::uint64_t seed) {
  const BatchObjective batch = [&](const Eigen::MatrixXd& points) {
    Eigen::VectorXd values(points.cols());
    for (Eigen::Index p = 0; p < points.cols(); ++p) {
      values[p] = objective(std::span<const double>(points.col(p).data(), static_cast<std::size_t>(points.rows())));
    }
    return values;
  };
  return pso_maximize(batch, bounds, config, seed);
}

}  // namespace olps::oracle
