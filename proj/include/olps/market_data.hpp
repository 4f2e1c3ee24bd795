#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace olps {

/// Row-major so that one trading day is contiguous.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Gross per-period returns (price_t / price_{t-1}), one row per trading day
/// and one column per asset. Every entry is strictly positive; construction
/// enforces it.
class PriceRelativeSeries {
 public:
  PriceRelativeSeries(RowMatrix relatives, std::vector<std::string> asset_names,
                      std::size_t first_period = 0);

  std::size_t num_periods() const { return static_cast<std::size_t>(relatives_.rows()); }
  std::size_t num_assets() const { return static_cast<std::size_t>(relatives_.cols()); }

  const RowMatrix& relatives() const { return relatives_; }
  const std::vector<std::string>& asset_names() const { return asset_names_; }
  /// 0-based day counter of the first row within the originating dataset.
  std::size_t first_period() const { return first_period_; }

  Eigen::VectorXd row(std::size_t t) const { return relatives_.row(static_cast<Eigen::Index>(t)).transpose(); }
  double operator()(std::size_t t, std::size_t i) const {
    return relatives_(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(i));
  }

 private:
  RowMatrix relatives_;
  std::vector<std::string> asset_names_;
  std::size_t first_period_;
};

struct DatasetSummary {
  std::string name;
  std::size_t num_assets = 0;
  std::size_t num_days = 0;
  std::string time_frame;
};

DatasetSummary summarize(const PriceRelativeSeries& series, std::string name, std::string time_frame = {});

/// Comma-separated relatives, optional header row of asset names.
PriceRelativeSeries parse_relatives_csv(std::istream& in);
PriceRelativeSeries load_csv(const std::filesystem::path& path);

/// Converts a T x m price table into T-1 rows of relatives.
PriceRelativeSeries from_prices(const RowMatrix& prices, std::vector<std::string> asset_names = {});
PriceRelativeSeries load_prices_csv(const std::filesystem::path& path);

PriceRelativeSeries window(const PriceRelativeSeries& series, std::size_t start, std::size_t length);

}  // namespace olps
