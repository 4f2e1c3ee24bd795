#pragma once

#include <cstddef>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "olps/market_data.hpp"
#include "olps/portfolio.hpp"

namespace olps {

/// Direction vectors shorter than this make an update a no-op.
inline constexpr double kDegenerateDirection = 1e-12;

// ---------------------------------------------------------------------------
// Update rules. Each takes the portfolio held over the last period and that
// period's relatives, and returns the portfolio for the next period.
// ---------------------------------------------------------------------------

/// Buy-and-hold drift: w_i <- w_i x_i / (w . x).
Portfolio market_update(const Portfolio& w, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Exponential gradient, w_i <- w_i exp(eta x_i / (w . x)), renormalized.
Portfolio eg_update(const Portfolio& w, const Eigen::Ref<const Eigen::VectorXd>& x, double eta);

/// Passive-aggressive mean reversion with sensitivity `epsilon`.
Portfolio pamr_update(const Portfolio& w, const Eigen::Ref<const Eigen::VectorXd>& x, double epsilon);

/// Moving-average reversion step toward the predicted relatives `x_pred`.
Portfolio olmar_update(const Portfolio& w, const Eigen::Ref<const Eigen::VectorXd>& x_pred, double epsilon);

/// Predicted next relatives (1/W) sum_{k<W} p_{t-k} / p_t, computed from the
/// most recent relatives (`recent.back()` is x_t). Needs W-1 relatives.
std::optional<Eigen::VectorXd> olmar_predict(const std::deque<Eigen::VectorXd>& recent, int window);

struct OnsParams {
  double eta = 0.0;    // mixing weight toward uniform
  double beta = 1.0;   // trade-off in the accumulated gradient
  double delta = 0.125;
};

struct OnsState {
  Portfolio portfolio;
  Eigen::MatrixXd A;  // identity plus accumulated gradient outer products
  Eigen::VectorXd b;  // accumulated (1 + 1/beta) gradients

  static OnsState initial(std::size_t m);
};

/// Online Newton step. Falls back to the previous portfolio if the projection
/// cannot be solved.
OnsState ons_update(const OnsState& state, const Eigen::Ref<const Eigen::VectorXd>& x, const OnsParams& params);

struct CwmrParams {
  double phi = 2.0;      // confidence multiplier
  double epsilon = 0.5;  // mean-reversion threshold
};

struct CwmrState {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;

  Portfolio portfolio() const { return Portfolio(mean); }
  static CwmrState initial(std::size_t m);
};

/// Closed-form Lagrange multiplier of the variance-constrained update.
double cwmr_multiplier(const CwmrState& state, const Eigen::Ref<const Eigen::VectorXd>& x, const CwmrParams& params);

/// Confidence-weighted mean reversion, deterministic mean-portfolio variant.
CwmrState cwmr_update(const CwmrState& state, const Eigen::Ref<const Eigen::VectorXd>& x, const CwmrParams& params);

// ---------------------------------------------------------------------------
// Hindsight benchmarks.
// ---------------------------------------------------------------------------

Portfolio best_stock(const PriceRelativeSeries& series);

struct BcrpOptions {
  double tolerance = 1e-12;
  int max_iterations = 500;
};

/// Constant rebalanced portfolio maximizing sum_t log(w . x_t).
Portfolio bcrp(const PriceRelativeSeries& series, const BcrpOptions& options = {});

/// Wealth of rebalancing to `w` every period.
double crp_wealth(const PriceRelativeSeries& series, const Portfolio& w);

// ---------------------------------------------------------------------------
// Uniform per-period interface for the backtest loop.
// ---------------------------------------------------------------------------

struct ParamSpec {
  std::string name;
  double default_value = 0.0;
  bool integer = false;
};

/// Sequential strategy. Each period the loop calls decide() with the active
/// parameters, then observe() with the revealed relatives.
class Strategy {
 public:
  virtual ~Strategy() = default;

  virtual std::string_view name() const = 0;
  /// Benchmarks computed from the full series; not causally tradable.
  virtual bool hindsight() const { return false; }
  /// Tunable parameters, in the order decide() expects them.
  virtual std::vector<ParamSpec> params() const { return {}; }

  /// Portfolio to hold over the coming period. Depends only on relatives
  /// already observed; repeated calls before observe() are idempotent.
  virtual Portfolio decide(std::span<const double> theta) = 0;
  virtual void observe(const Eigen::Ref<const Eigen::VectorXd>& x) = 0;
};

std::vector<std::string> strategy_roster();

/// Builds a strategy by roster name. `constants` supplies non-tuned settings
/// (ons: delta; cwmr: epsilon); `series` is needed by the hindsight benchmarks.
std::unique_ptr<Strategy> make_strategy(std::string_view name, std::size_t num_assets,
                                        const std::map<std::string, double>& constants = {},
                                        const PriceRelativeSeries* series = nullptr);

/// Default (static) tunable parameter values of a roster strategy.
std::vector<ParamSpec> strategy_params(std::string_view name);

}  // namespace olps
