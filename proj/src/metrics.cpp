#include "olps/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

namespace olps::metrics {

ReturnTrajectory::ReturnTrajectory(std::vector<double> gross_returns, double periods_per_year)
    : gross_(std::move(gross_returns)), periods_per_year_(periods_per_year) {
  if (gross_.empty()) throw std::invalid_argument("trajectory needs at least one period");
  if (!(periods_per_year_ > 0.0)) throw std::invalid_argument("periods_per_year must be positive");
  for (double r : gross_) {
    if (!(r > 0.0) || !std::isfinite(r)) throw std::invalid_argument("gross returns must be positive and finite");
  }
}

double cumulative_wealth(const ReturnTrajectory& traj) {
  double log_wealth = 0.0;
  for (double r : traj.gross_returns()) log_wealth += std::log(r);
  return std::exp(log_wealth);
}

double apy(const ReturnTrajectory& traj) {
  const double years = static_cast<double>(traj.size()) / traj.periods_per_year();
  return std::pow(cumulative_wealth(traj), 1.0 / years) - 1.0;
}

double ann_std(const ReturnTrajectory& traj) {
  const auto& r = traj.gross_returns();
  if (r.size() < 2) throw std::invalid_argument("annualized std needs at least two periods");
  const double n = static_cast<double>(r.size());
  const double mean = std::accumulate(r.begin(), r.end(), 0.0) / n - 1.0;
  double ss = 0.0;
  for (double g : r) ss += (g - 1.0 - mean) * (g - 1.0 - mean);
  return std::sqrt(ss / (n - 1.0)) * std::sqrt(traj.periods_per_year());
}

double max_drawdown_of_wealth(std::span<const double> wealth) {
  double peak = 0.0;
  double worst = 0.0;
  for (double w : wealth) {
    peak = std::max(peak, w);
    if (peak > 0.0) worst = std::max(worst, (peak - w) / peak);
  }
  return worst;
}

double max_drawdown(const ReturnTrajectory& traj) {
  std::vector<double> wealth;
  wealth.reserve(traj.size() + 1);
  wealth.push_back(1.0);
  for (double r : traj.gross_returns()) wealth.push_back(wealth.back() * r);
  return max_drawdown_of_wealth(wealth);
}

Ratio ratio_or_sentinel(double numerator, double denominator) {
  if (denominator > 0.0) return {numerator / denominator, true};
  const double inf = std::numeric_limits<double>::infinity();
  return {numerator > 0.0 ? inf : (numerator < 0.0 ? -inf : 0.0), false};
}

Ratio sharpe(double apy_value, double ann_std_value, double risk_free_annual) {
  return ratio_or_sentinel(apy_value - risk_free_annual, ann_std_value);
}

Ratio sharpe(const ReturnTrajectory& traj, double risk_free_annual) {
  return sharpe(apy(traj), ann_std(traj), risk_free_annual);
}

Ratio calmar(double apy_value, double max_drawdown_value) { return ratio_or_sentinel(apy_value, max_drawdown_value); }

Ratio calmar(const ReturnTrajectory& traj) { return calmar(apy(traj), max_drawdown(traj)); }

double student_t_upper_tail(double t, double dof) {
  if (std::isinf(t)) return t > 0.0 ? 0.0 : 1.0;
  const boost::math::students_t dist(dof);
  return boost::math::cdf(boost::math::complement(dist, t));
}

TTest one_sample_ttest(std::span<const double> active) {
  if (active.size() < 2) throw std::invalid_argument("t-test needs at least two periods");
  const double n = static_cast<double>(active.size());
  const double mean = std::accumulate(active.begin(), active.end(), 0.0) / n;
  double ss = 0.0;
  for (double a : active) ss += (a - mean) * (a - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  TTest out;
  // Rounding-level spread around a nonzero mean counts as zero variance.
  const double noise_floor = 1e-10 * std::abs(mean);
  if (sd <= noise_floor) {
    const double inf = std::numeric_limits<double>::infinity();
    out.t_stat = mean > 0.0 ? inf : (mean < 0.0 ? -inf : 0.0);
  } else {
    out.t_stat = mean / (sd / std::sqrt(n));
  }
  out.p_value = out.t_stat == 0.0 ? 0.5 : student_t_upper_tail(out.t_stat, n - 1.0);
  return out;
}

TTest active_return_ttest(const ReturnTrajectory& strategy, const ReturnTrajectory& market) {
  if (strategy.size() != market.size()) throw std::invalid_argument("trajectories differ in length");
  std::vector<double> active(strategy.size());
  for (std::size_t t = 0; t < active.size(); ++t) {
    active[t] = (strategy.gross_returns()[t] - 1.0) - (market.gross_returns()[t] - 1.0);
  }
  return one_sample_ttest(active);
}

PerformanceSummary summarize(const ReturnTrajectory& strategy, const ReturnTrajectory& market,
                             double risk_free_annual) {
  PerformanceSummary s;
  s.cumulative_wealth = cumulative_wealth(strategy);
  s.apy = apy(strategy);
  s.ann_std = ann_std(strategy);
  s.max_drawdown = max_drawdown(strategy);
  s.sharpe = sharpe(s.apy, s.ann_std, risk_free_annual);
  s.calmar = calmar(s.apy, s.max_drawdown);
  s.ttest = active_return_ttest(strategy, market);
  return s;
}

}  // namespace olps::metrics
