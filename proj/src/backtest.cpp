#include "olps/backtest.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "olps/portfolio.hpp"
#include "olps/strategies.hpp"
#include "olps/synthetic.hpp"

namespace olps {

namespace {

constexpr std::string_view kSyntheticPrefix = "synthetic:";

struct LoopOutput {
  std::vector<double> gross;
  std::vector<std::vector<double>> params;
  RowMatrix portfolios;
};

template <typename Select, typename Record>
LoopOutput trade(Strategy& strategy, const PriceRelativeSeries& series, Select&& select, Record&& record) {
  const std::size_t T = series.num_periods();
  LoopOutput out;
  out.gross.reserve(T);
  out.params.reserve(T);
  out.portfolios.resize(static_cast<Eigen::Index>(T), static_cast<Eigen::Index>(series.num_assets()));
  for (std::size_t t = 0; t < T; ++t) {
    const std::vector<double> theta = select(static_cast<long>(t + 1));
    const Portfolio w = strategy.decide(theta);
    const Eigen::VectorXd x = series.row(t);
    const double r = period_return(w, x);
    strategy.observe(x);
    record(theta, static_cast<long>(t + 1), r);
    out.gross.push_back(r);
    out.params.push_back(theta);
    out.portfolios.row(static_cast<Eigen::Index>(t)) = w.weights().transpose();
  }
  return out;
}

std::unique_ptr<Strategy> build(const ExperimentConfig& config, const PriceRelativeSeries& series) {
  if (series.num_periods() < 2) throw DataError("backtest needs at least two periods");
  return make_strategy(config.strategy, series.num_assets(), config.constants, &series);
}

void finish(BacktestReport& report, const ExperimentConfig& config, const PriceRelativeSeries& series,
            LoopOutput loop) {
  report.name = config.label();
  report.strategy = config.strategy;
  report.dataset = config.dataset;
  report.seed = config.seed;
  report.periods_per_year = config.periods_per_year;
  report.gross_returns = std::move(loop.gross);
  report.params_trace = std::move(loop.params);
  report.portfolios = std::move(loop.portfolios);
  report.wealth.assign(1, 1.0);
  for (double r : report.gross_returns) report.wealth.push_back(report.wealth.back() * r);

  const auto market = market_returns(series);
  const std::size_t T = report.gross_returns.size();
  report.metrics_start = config.exclude_warmup ? std::min(config.oracle_config.n_init, T - 2) : 0;
  const auto from = static_cast<std::ptrdiff_t>(report.metrics_start);
  const metrics::ReturnTrajectory strat({report.gross_returns.begin() + from, report.gross_returns.end()},
                                        config.periods_per_year);
  const metrics::ReturnTrajectory mkt({market.begin() + from, market.end()}, config.periods_per_year);
  report.summary = metrics::summarize(strat, mkt, config.risk_free);
}

}  // namespace

PriceRelativeSeries load_dataset(const ExperimentConfig& config) {
  const std::string_view ds = config.dataset;
  if (ds.substr(0, kSyntheticPrefix.size()) == kSyntheticPrefix) {
    return synthetic::by_name(ds.substr(kSyntheticPrefix.size()), config.synthetic_seed, config.synthetic_days);
  }
  return config.dataset_format == "prices" ? load_prices_csv(config.dataset) : load_csv(config.dataset);
}

std::vector<double> static_parameters(const ExperimentConfig& config) {
  std::vector<double> theta;
  for (const auto& spec : strategy_params(config.strategy)) {
    const auto it = config.params.find(spec.name);
    theta.push_back(it == config.params.end() ? spec.default_value : it->second);
  }
  return theta;
}

std::vector<double> market_returns(const PriceRelativeSeries& series) {
  auto market = make_strategy("market", series.num_assets());
  std::vector<double> gross;
  gross.reserve(series.num_periods());
  for (std::size_t t = 0; t < series.num_periods(); ++t) {
    const Eigen::VectorXd x = series.row(t);
    gross.push_back(period_return(market->decide({}), x));
    market->observe(x);
  }
  return gross;
}

BacktestReport run_static(const ExperimentConfig& config, const PriceRelativeSeries& series) {
  if (config.oracle) throw ConfigError("run_static called with the oracle on");
  auto strategy = build(config, series);
  const auto theta = static_parameters(config);
  auto loop = trade(
      *strategy, series, [&](long) { return theta; }, [](const std::vector<double>&, long, double) {});
  BacktestReport report;
  report.hindsight = strategy->hindsight();
  for (const auto& p : strategy->params()) report.param_names.push_back(p.name);
  finish(report, config, series, std::move(loop));
  return report;
}

BacktestReport run_oracle(const ExperimentConfig& config, const PriceRelativeSeries& series) {
  if (!config.oracle) throw ConfigError("run_oracle called with the oracle off");
  auto strategy = build(config, series);
  oracle::ParamBounds bounds;
  BacktestReport report;
  for (const auto& p : strategy->params()) {
    const auto it = config.bounds.find(p.name);
    if (it == config.bounds.end()) throw ConfigError(fmt::format("bounds.{} missing", p.name));
    bounds.lo.push_back(it->second.first);
    bounds.hi.push_back(it->second.second);
    report.param_names.push_back(p.name);
  }
  if (bounds.dims() == 0) throw ConfigError(fmt::format("strategy '{}' has nothing to tune", config.strategy));
  auto oracle_config = config.oracle_config;
  oracle_config.seed = config.seed;
  oracle::ConfigurationOracle oracle(std::move(bounds), oracle_config);
  auto loop = trade(
      *strategy, series, [&](long t) { return oracle.select(t); },
      [&](const std::vector<double>& theta, long t, double r) { oracle.record(theta, t, r); });
  report.oracle = true;
  report.hindsight = strategy->hindsight();
  report.oracle_trace = oracle.trace();
  finish(report, config, series, std::move(loop));
  return report;
}

BacktestReport run_experiment(const ExperimentConfig& config) {
  const auto series = load_dataset(config);
  return config.oracle ? run_oracle(config, series) : run_static(config, series);
}

}  // namespace olps
