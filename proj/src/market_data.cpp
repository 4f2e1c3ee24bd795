#include "olps/market_data.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace olps {

namespace {

std::vector<std::string> default_names(std::size_t m) {
  std::vector<std::string> names;
  names.reserve(m);
  for (std::size_t i = 0; i < m; ++i) names.push_back(fmt::format("asset{}", i));
  return names;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_cells(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t pos = 0;
  while (true) {
    const auto comma = line.find(',', pos);
    cells.push_back(trim(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos)));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return cells;
}

bool parse_number(std::string_view cell, double& out) {
  if (cell.empty()) return false;
  if (cell.front() == '+') cell.remove_prefix(1);
  const auto* end = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(cell.data(), end, out);
  return ec == std::errc() && ptr == end;
}

struct Table {
  RowMatrix values;
  std::vector<std::string> header;
};

Table parse_table(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::vector<std::string> header;
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto view = trim(line);
    if (view.empty()) continue;
    const auto cells = split_cells(view);
    std::vector<double> row(cells.size());
    std::size_t parsed = 0;
    for (std::size_t j = 0; j < cells.size(); ++j) {
      if (parse_number(cells[j], row[j])) ++parsed;
    }
    if (parsed != cells.size()) {
      // A header is a leading line with no numeric cell at all.
      if (rows.empty() && header.empty() && parsed == 0) {
        for (const auto c : cells) header.emplace_back(c);
        width = header.size();
        continue;
      }
      throw DataError(fmt::format("malformed row at line {}", line_no));
    }
    if (width == 0) width = row.size();
    if (row.size() != width) {
      throw DataError(fmt::format("malformed row at line {}: expected {} columns, found {}", line_no, width,
                                  row.size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError("empty file");
  Table table;
  table.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
  for (std::size_t t = 0; t < rows.size(); ++t) {
    for (std::size_t j = 0; j < width; ++j) {
      table.values(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)) = rows[t][j];
    }
  }
  table.header = std::move(header);
  return table;
}

std::ifstream open(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open '{}'", path.string()));
  return in;
}

}  // namespace

PriceRelativeSeries::PriceRelativeSeries(RowMatrix relatives, std::vector<std::string> asset_names,
                                         std::size_t first_period)
    : relatives_(std::move(relatives)), asset_names_(std::move(asset_names)), first_period_(first_period) {
  if (relatives_.rows() < 1 || relatives_.cols() < 1) throw DataError("series needs at least one row and one asset");
  if (asset_names_.empty()) asset_names_ = default_names(num_assets());
  if (asset_names_.size() != num_assets()) {
    throw DataError(fmt::format("{} asset names for {} columns", asset_names_.size(), num_assets()));
  }
  for (Eigen::Index t = 0; t < relatives_.rows(); ++t) {
    for (Eigen::Index i = 0; i < relatives_.cols(); ++i) {
      const double v = relatives_(t, i);
      if (!std::isfinite(v)) throw DataError(fmt::format("non-finite price relative at row {}, column {}", t, i));
      if (v <= 0.0) throw DataError(fmt::format("non-positive price relative at row {}, column {}", t, i));
    }
  }
}

DatasetSummary summarize(const PriceRelativeSeries& series, std::string name, std::string time_frame) {
  return {std::move(name), series.num_assets(), series.num_periods(), std::move(time_frame)};
}

PriceRelativeSeries parse_relatives_csv(std::istream& in) {
  auto table = parse_table(in);
  return PriceRelativeSeries(std::move(table.values), std::move(table.header));
}

PriceRelativeSeries load_csv(const std::filesystem::path& path) {
  auto in = open(path);
  return parse_relatives_csv(in);
}

PriceRelativeSeries from_prices(const RowMatrix& prices, std::vector<std::string> asset_names) {
  if (prices.rows() < 2) throw DataError("need at least two rows of prices");
  if ((prices.array() <= 0.0).any() || !prices.allFinite()) throw DataError("non-positive price");
  RowMatrix relatives = prices.bottomRows(prices.rows() - 1).array() / prices.topRows(prices.rows() - 1).array();
  return PriceRelativeSeries(std::move(relatives), std::move(asset_names));
}

PriceRelativeSeries load_prices_csv(const std::filesystem::path& path) {
  auto in = open(path);
  auto table = parse_table(in);
  return from_prices(table.values, std::move(table.header));
}

PriceRelativeSeries window(const PriceRelativeSeries& series, std::size_t start, std::size_t length) {
  if (length == 0 || start > series.num_periods() || length > series.num_periods() - start) {
    throw DataError(fmt::format("window [{}, {}) outside series of {} periods", start, start + length,
                                series.num_periods()));
  }
  RowMatrix rows = series.relatives().middleRows(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(length));
  return PriceRelativeSeries(std::move(rows), series.asset_names(), series.first_period() + start);
}

}  // namespace olps
