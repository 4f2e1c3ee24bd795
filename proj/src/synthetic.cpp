#include "olps/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include <fmt/format.h>

namespace olps::synthetic {

PriceRelativeSeries regime_switch_market(std::uint64_t seed, const RegimeSwitchOptions& options) {
  const std::size_t m = options.assets;
  const std::size_t days = options.days_per_regime;
  if (m < 2 || days < 1) throw std::invalid_argument("regime-switch market needs >= 2 assets and >= 1 day");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, options.noise);
  std::bernoulli_distribution coin(0.5);
  std::bernoulli_distribution flip(options.trend_flip_prob);

  RowMatrix x(static_cast<Eigen::Index>(2 * days), static_cast<Eigen::Index>(m));
  // Neighbouring assets start out of phase, so the first regime always has a
  // loser that becomes the next day's winner.
  const int phase = coin(rng) ? 1 : -1;
  std::vector<int> sign(m);
  for (std::size_t i = 0; i < m; ++i) sign[i] = (i % 2 == 0) ? phase : -phase;
  for (std::size_t t = 0; t < 2 * days; ++t) {
    const bool reverting = t < days;
    for (std::size_t i = 0; i < m; ++i) {
      if (reverting) {
        sign[i] = -sign[i];
      } else if (flip(rng)) {
        sign[i] = -sign[i];
      }
      const double log_move = options.amplitude * sign[i] + noise(rng);
      x(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(i)) = std::exp(log_move);
    }
  }
  return PriceRelativeSeries(std::move(x), {});
}

PriceRelativeSeries drifting_momentum_market(std::uint64_t seed, const DriftingMomentumOptions& options) {
  const std::size_t m = options.assets;
  if (m < 1 || options.days < 1) throw std::invalid_argument("drifting-momentum market needs assets and days");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> step(0.0, options.drift_step);
  std::normal_distribution<double> noise(0.0, options.noise);

  std::vector<double> drift(m, 0.0);
  RowMatrix x(static_cast<Eigen::Index>(options.days), static_cast<Eigen::Index>(m));
  for (std::size_t t = 0; t < options.days; ++t) {
    for (std::size_t i = 0; i < m; ++i) {
      drift[i] = std::clamp(drift[i] + step(rng), -options.drift_cap, options.drift_cap);
      x(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(i)) = std::exp(drift[i] + noise(rng));
    }
  }
  return PriceRelativeSeries(std::move(x), {});
}

PriceRelativeSeries by_name(std::string_view kind, std::uint64_t seed, std::size_t days) {
  if (kind == "regime-switch") {
    RegimeSwitchOptions o;
    o.days_per_regime = days;
    return regime_switch_market(seed, o);
  }
  if (kind == "drifting-momentum") {
    DriftingMomentumOptions o;
    o.days = days;
    return drifting_momentum_market(seed, o);
  }
  throw DataError(fmt::format("unknown synthetic market '{}'", kind));
}

}  // namespace olps::synthetic
