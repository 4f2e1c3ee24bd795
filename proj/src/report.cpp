#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>

#include <fmt/format.h>

#include "olps/backtest.hpp"

namespace olps {

namespace {

// Shortest text that round-trips; NaN becomes an empty cell.
std::string num(double v) {
  if (std::isnan(v)) return {};
  return fmt::format("{}", v);
}

class CsvFile {
 public:
  explicit CsvFile(const std::filesystem::path& path) : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw ReportError(fmt::format("cannot write '{}'", path.string()));
  }
  template <typename... Args>
  void line(fmt::format_string<Args...> f, Args&&... args) {
    out_ << fmt::format(f, std::forward<Args>(args)...) << '\n';
  }
  ~CsvFile() noexcept(false) {
    out_.flush();
    if (!out_ && std::uncaught_exceptions() == 0) throw ReportError(fmt::format("write to '{}' failed", path_.string()));
  }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

std::string join(const std::vector<std::string>& parts) {
  std::string s;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) s += ',';
    s += parts[i];
  }
  return s;
}

std::string hyperparam_header(const BacktestReport& r, bool split) {
  std::vector<std::string> cols{"sigma_f"};
  for (const auto& p : r.param_names) cols.push_back("l_" + p);
  for (const auto& p : r.param_names) cols.push_back("alpha_" + p);
  cols.push_back("temporal_l");
  cols.push_back("temporal_alpha");
  if (split) cols.push_back("temporal_l2");
  cols.push_back("noise_sigma");
  return join(cols);
}

std::string hyperparam_cells(const std::optional<gp::KernelHyperparams>& hp, std::size_t D, bool split) {
  const std::size_t count = 1 + 2 * D + 2 + (split ? 1 : 0) + 1;
  if (!hp) return join(std::vector<std::string>(count));
  std::vector<std::string> cells{num(hp->sigma_f)};
  for (double l : hp->lengthscales) cells.push_back(num(l));
  for (double a : hp->alphas) cells.push_back(num(a));
  cells.push_back(num(hp->temporal_l));
  cells.push_back(num(hp->temporal_alpha));
  if (split) cells.push_back(hp->temporal_l2 ? num(*hp->temporal_l2) : std::string{});
  cells.push_back(num(hp->noise_sigma));
  return join(cells);
}

}  // namespace

void emit_report(const BacktestReport& r, const std::filesystem::path& outdir) {
  std::error_code ec;
  std::filesystem::create_directories(outdir, ec);
  if (ec || !std::filesystem::is_directory(outdir)) {
    throw ReportError(fmt::format("cannot create output directory '{}'", outdir.string()));
  }
  const auto& s = r.summary;

  {
    CsvFile f(outdir / "summary.csv");
    f.line("{}", kSummaryHeader);
    f.line("{},{},{},{},{},{},{},{},{}", r.name, num(s.cumulative_wealth), num(s.apy), num(s.ann_std),
           num(s.max_drawdown), num(s.sharpe.value), num(s.calmar.value), num(s.ttest.t_stat), num(s.ttest.p_value));
  }
  {
    CsvFile f(outdir / "wealth.csv");
    std::vector<std::string> header{"period", "gross_return", "wealth"};
    for (const auto& p : r.param_names) header.push_back(p);
    f.line("{}", join(header));
    f.line("0,,{}{}", num(r.wealth.front()), std::string(r.param_names.size(), ','));
    for (std::size_t t = 0; t < r.gross_returns.size(); ++t) {
      std::vector<std::string> cells{std::to_string(t + 1), num(r.gross_returns[t]), num(r.wealth[t + 1])};
      for (double v : r.params_trace[t]) cells.push_back(num(v));
      f.line("{}", join(cells));
    }
  }
  {
    CsvFile f(outdir / "plot_data.csv");
    f.line("measure,name,value,defined");
    f.line("APY,{},{},1", r.name, num(s.apy));
    f.line("volatility,{},{},1", r.name, num(s.ann_std));
    f.line("MDD,{},{},1", r.name, num(s.max_drawdown));
    f.line("Sharpe,{},{},{}", r.name, num(s.sharpe.value), s.sharpe.defined ? 1 : 0);
    f.line("Calmar,{},{},{}", r.name, num(s.calmar.value), s.calmar.defined ? 1 : 0);
  }
  {
    CsvFile f(outdir / "run_info.txt");
    f.line("name={}", r.name);
    f.line("strategy={}", r.strategy);
    f.line("dataset={}", r.dataset);
    f.line("periods={}", r.gross_returns.size());
    f.line("assets={}", r.portfolios.cols());
    f.line("seed={}", r.seed);
    f.line("oracle={}", r.oracle ? "on" : "off");
    f.line("hindsight={}", r.hindsight ? "true" : "false");
    f.line("metrics_start={}", r.metrics_start);
    f.line("sharpe_defined={}", s.sharpe.defined ? "true" : "false");
    f.line("calmar_defined={}", s.calmar.defined ? "true" : "false");
  }

  const auto trace_path = outdir / "oracle_trace.csv";
  if (r.oracle_trace.empty()) {
    std::filesystem::remove(trace_path, ec);
    return;
  }
  const bool split = std::any_of(r.oracle_trace.begin(), r.oracle_trace.end(), [](const auto& rec) {
    return rec.hyperparams && rec.hyperparams->temporal_l2.has_value();
  });
  CsvFile f(trace_path);
  std::vector<std::string> header{"period"};
  for (const auto& p : r.param_names) header.push_back(p);
  for (const char* c : {"acquisition", "realized_return", "temporal_lengthscale", "time_varying", "warmup", "fallback"}) {
    header.emplace_back(c);
  }
  f.line("{},{}", join(header), hyperparam_header(r, split));
  for (const auto& rec : r.oracle_trace) {
    std::vector<std::string> cells{std::to_string(rec.period)};
    for (double v : rec.theta) cells.push_back(num(v));
    cells.push_back(num(rec.acquisition));
    cells.push_back(num(rec.realized_return));
    cells.push_back(num(rec.temporal_lengthscale));
    cells.push_back(rec.time_varying ? "1" : "0");
    cells.push_back(rec.warmup ? "1" : "0");
    cells.push_back(rec.fallback ? "1" : "0");
    f.line("{},{}", join(cells), hyperparam_cells(rec.hyperparams, r.param_names.size(), split));
  }
}

std::vector<std::string> combine_summaries(const std::filesystem::path& root) {
  if (!std::filesystem::is_directory(root)) throw ReportError(fmt::format("'{}' is not a directory", root.string()));
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(root)) {
    if (entry.is_regular_file() && entry.path().filename() == "summary.csv") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<std::string> rows{fmt::format("run,{}", kSummaryHeader)};
  for (const auto& path : files) {
    std::ifstream in(path);
    std::string header, row;
    std::getline(in, header);
    if (header != kSummaryHeader) throw ReportError(fmt::format("'{}' has an unexpected header", path.string()));
    const auto run = std::filesystem::relative(path.parent_path(), root).generic_string();
    while (std::getline(in, row)) {
      if (!row.empty()) rows.push_back(fmt::format("{},{}", run, row));
    }
  }
  std::ofstream out(root / "combined_summary.csv", std::ios::binary | std::ios::trunc);
  if (!out) throw ReportError(fmt::format("cannot write '{}'", (root / "combined_summary.csv").string()));
  for (const auto& row : rows) out << row << '\n';
  return rows;
}

}  // namespace olps
