// olps: run backtests from flat config files.
//
//   olps run --config cell.cfg [--output-dir DIR]
//   olps batch --config-dir configs/ [--jobs N]
//   olps report --in out/

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "olps/backtest.hpp"
#include "olps/config.hpp"

namespace fs = std::filesystem;

namespace {

std::mutex log_mutex;

void log(const std::string& msg) {
  std::lock_guard lock(log_mutex);
  std::cerr << msg << '\n';
}

void run_one(const fs::path& config_path, const std::optional<fs::path>& output_override) {
  auto config = olps::load_config(config_path);
  if (output_override) config.output_dir = *output_override;
  log(fmt::format("[olps] config={} strategy={} dataset={} oracle={} seed={}", config_path.string(), config.strategy,
                  config.dataset, config.oracle ? "on" : "off", config.seed));
  const auto report = olps::run_experiment(config);
  olps::emit_report(report, config.output_dir);
  const auto fallbacks = std::count_if(report.oracle_trace.begin(), report.oracle_trace.end(),
                                       [](const auto& rec) { return rec.fallback; });
  log(fmt::format("[olps] {}: CW={} periods={} fallbacks={} -> {}", report.name, report.summary.cumulative_wealth,
                  report.gross_returns.size(), fallbacks, config.output_dir.string()));
}

int run_batch(const fs::path& dir, unsigned jobs) {
  if (!fs::is_directory(dir)) throw std::runtime_error(fmt::format("'{}' is not a directory", dir.string()));
  std::vector<fs::path> configs;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".cfg") configs.push_back(entry.path());
  }
  std::sort(configs.begin(), configs.end());
  if (configs.empty()) throw std::runtime_error(fmt::format("no .cfg files in '{}'", dir.string()));

  std::atomic<std::size_t> next{0};
  std::atomic<int> failures{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      try {
        run_one(configs[i], std::nullopt);
      } catch (const std::exception& e) {
        log(fmt::format("[olps] error in {}: {}", configs[i].string(), e.what()));
        ++failures;
      }
    }
  };
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(configs.size())));
  std::vector<std::thread> pool;
  for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  log(fmt::format("[olps] batch: {} cells, {} failed", configs.size(), failures.load()));
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online portfolio selection backtests with an adaptive configuration oracle"};
  app.require_subcommand(1);

  fs::path config_path;
  std::string output_dir;
  auto* run = app.add_subcommand("run", "Run one backtest cell");
  run->add_option("--config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  run->add_option("--output-dir", output_dir, "Override output_dir from the config");

  fs::path config_dir;
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  auto* batch = app.add_subcommand("batch", "Run every *.cfg in a directory in parallel");
  batch->add_option("--config-dir", config_dir, "Directory of config files")->required();
  batch->add_option("--jobs", jobs, "Worker threads");

  fs::path in_dir;
  auto* report = app.add_subcommand("report", "Combine summary.csv files below a directory");
  report->add_option("--in", in_dir, "Output root")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      run_one(config_path, output_dir.empty() ? std::nullopt : std::optional<fs::path>(output_dir));
      return 0;
    }
    if (*batch) return run_batch(config_dir, jobs);
    if (*report) {
      for (const auto& row : olps::combine_summaries(in_dir)) std::cout << row << '\n';
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "[olps] error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
