#pragma once

#include <cstdint>
#include <string_view>

#include "olps/market_data.hpp"

namespace olps::synthetic {

/// Two back-to-back regimes. In the first, each asset's daily log return
/// alternates sign around zero (yesterday's loser is today's winner); in the
/// second, returns follow persistent trends that flip only occasionally.
struct RegimeSwitchOptions {
  std::size_t days_per_regime = 250;
  std::size_t assets = 2;
  double amplitude = 0.01;        // size of the mean daily log move
  double noise = 0.004;           // sd of idiosyncratic daily log noise
  double trend_flip_prob = 0.05;  // per-day chance a trend reverses (second regime)
};

PriceRelativeSeries regime_switch_market(std::uint64_t seed, const RegimeSwitchOptions& options = {});

/// Slowly drifting per-asset momentum: each asset's expected log return is a
/// random walk, so past winners tend to keep winning for a while.
struct DriftingMomentumOptions {
  std::size_t days = 500;
  std::size_t assets = 5;
  double drift_step = 0.0005;
  double drift_cap = 0.004;
  double noise = 0.01;
};

PriceRelativeSeries drifting_momentum_market(std::uint64_t seed, const DriftingMomentumOptions& options = {});

/// Resolves "regime-switch" or "drifting-momentum"; `days` is the length of
/// one regime for the former and the whole series for the latter.
PriceRelativeSeries by_name(std::string_view kind, std::uint64_t seed, std::size_t days);

}  // namespace olps::synthetic
