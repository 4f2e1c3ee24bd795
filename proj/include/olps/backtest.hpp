#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "olps/config.hpp"
#include "olps/market_data.hpp"
#include "olps/metrics.hpp"
#include "olps/oracle.hpp"

namespace olps {

struct BacktestReport {
  std::string name;
  std::string strategy;
  std::string dataset;
  bool hindsight = false;
  bool oracle = false;
  std::uint64_t seed = 0;
  double periods_per_year = metrics::kTradingDaysPerYear;

  std::vector<std::string> param_names;
  std::vector<double> gross_returns;              // T entries
  std::vector<double> wealth;                     // T + 1 entries, wealth[0] = 1
  std::vector<std::vector<double>> params_trace;  // parameters in force each period
  RowMatrix portfolios;                           // T x m, row t held over period t
  std::vector<oracle::TraceRecord> oracle_trace;  // empty for static runs

  std::size_t metrics_start = 0;  // leading periods left out of the summary
  metrics::PerformanceSummary summary;

  metrics::ReturnTrajectory trajectory() const { return metrics::ReturnTrajectory(gross_returns, periods_per_year); }
};

/// Reads the CSV (or builds the synthetic market) named by the config.
PriceRelativeSeries load_dataset(const ExperimentConfig& config);

/// Static parameters, in the order the strategy expects them.
std::vector<double> static_parameters(const ExperimentConfig& config);

/// Gross returns of the uniform buy-and-hold market on `series`.
std::vector<double> market_returns(const PriceRelativeSeries& series);

BacktestReport run_static(const ExperimentConfig& config, const PriceRelativeSeries& series);
BacktestReport run_oracle(const ExperimentConfig& config, const PriceRelativeSeries& series);
/// Loads the dataset and dispatches on `config.oracle`.
BacktestReport run_experiment(const ExperimentConfig& config);

class ReportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Writes summary.csv, wealth.csv, plot_data.csv, run_info.txt and, for
/// oracle runs, oracle_trace.csv into `outdir` (created if missing).
void emit_report(const BacktestReport& report, const std::filesystem::path& outdir);

inline constexpr const char* kSummaryHeader = "name,CW,APY,ann_std,MDD,Sharpe,Calmar,t,p";

/// Concatenates every summary.csv below `root` (sorted by path) into
/// `root/combined_summary.csv` and returns the rows written, header first.
std::vector<std::string> combine_summaries(const std::filesystem::path& root);

}  // namespace olps
