#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>

#include "olps/oracle.hpp"

namespace olps {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One backtest cell. Parsed from a flat `key = value` file; see
/// configs/README.md for the schema.
struct ExperimentConfig {
  std::string name;                        // report label; defaults to the strategy name
  std::string dataset;                     // CSV path or "synthetic:<kind>"
  std::string dataset_format = "relatives";  // or "prices"
  std::uint64_t synthetic_seed = 0;
  std::size_t synthetic_days = 250;

  std::string strategy;
  std::map<std::string, double> params;     // static values of tunable parameters
  std::map<std::string, double> constants;  // fixed settings (ons delta, cwmr epsilon, ...)
  std::map<std::string, std::pair<double, double>> bounds;

  bool oracle = false;
  oracle::OracleConfig oracle_config;

  double periods_per_year = 252.0;
  double risk_free = 0.0;
  bool exclude_warmup = false;

  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 0;

  /// Label used in reports.
  std::string label() const;
  /// Throws ConfigError on an unknown strategy or missing bounds.
  void validate() const;
};

/// `base_dir` anchors relative dataset and output paths.
ExperimentConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace olps
