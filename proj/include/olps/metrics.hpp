#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace olps::metrics {

inline constexpr double kTradingDaysPerYear = 252.0;

/// Per-period gross portfolio returns (all > 0).
class ReturnTrajectory {
 public:
  explicit ReturnTrajectory(std::vector<double> gross_returns, double periods_per_year = kTradingDaysPerYear);

  const std::vector<double>& gross_returns() const { return gross_; }
  double periods_per_year() const { return periods_per_year_; }
  std::size_t size() const { return gross_.size(); }

 private:
  std::vector<double> gross_;
  double periods_per_year_;
};

double cumulative_wealth(const ReturnTrajectory& traj);
/// Compound annual growth: CW^(periods_per_year / T) - 1.
double apy(const ReturnTrajectory& traj);
/// Sample standard deviation of net returns, annualized by sqrt(periods_per_year).
double ann_std(const ReturnTrajectory& traj);
double max_drawdown(const ReturnTrajectory& traj);
/// Largest peak-to-trough fraction of a wealth curve.
double max_drawdown_of_wealth(std::span<const double> wealth);

/// A ratio whose denominator may vanish. When `defined` is false, `value`
/// is the signed infinity of the numerator (0 if the numerator is 0).
struct Ratio {
  double value = 0.0;
  bool defined = true;
};

Ratio ratio_or_sentinel(double numerator, double denominator);
Ratio sharpe(double apy_value, double ann_std_value, double risk_free_annual = 0.0);
Ratio sharpe(const ReturnTrajectory& traj, double risk_free_annual = 0.0);
Ratio calmar(double apy_value, double max_drawdown_value);
Ratio calmar(const ReturnTrajectory& traj);

struct TTest {
  double t_stat = 0.0;
  double p_value = 0.5;  // one-sided, H1: mean active return > 0
};

/// Active return a_t = (strategy_t - 1) - (market_t - 1);
/// t = mean(a) / (sd(a) / sqrt(T)) with T - 1 degrees of freedom.
TTest active_return_ttest(const ReturnTrajectory& strategy, const ReturnTrajectory& market);
/// Same test on precomputed active returns.
TTest one_sample_ttest(std::span<const double> active);

/// Upper tail P(T > t) of Student's t with `dof` degrees of freedom.
double student_t_upper_tail(double t, double dof);

struct PerformanceSummary {
  double cumulative_wealth = 1.0;
  double apy = 0.0;
  double ann_std = 0.0;
  double max_drawdown = 0.0;
  Ratio sharpe;
  Ratio calmar;
  TTest ttest;
};

PerformanceSummary summarize(const ReturnTrajectory& strategy, const ReturnTrajectory& market,
                             double risk_free_annual = 0.0);

}  // namespace olps::metrics
