#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ordmlm/data_model.hpp"

namespace ordmlm {

/// Factor name that selects the cluster labels instead of a covariate.
inline constexpr std::string_view kClusterFactor = "cluster";

/// r x c table of observed counts with margins.
class ContingencyTable {
 public:
  ContingencyTable(std::vector<std::string> row_labels, std::vector<std::string> col_labels,
                   std::vector<std::vector<std::int64_t>> counts);

  std::size_t rows() const { return row_labels_.size(); }
  std::size_t cols() const { return col_labels_.size(); }
  std::int64_t count(std::size_t i, std::size_t k) const { return counts_[i][k]; }
  std::int64_t row_total(std::size_t i) const { return row_totals_[i]; }
  std::int64_t col_total(std::size_t k) const { return col_totals_[k]; }
  std::int64_t grand_total() const { return grand_total_; }

  /// Percentages at full precision; NaN for an empty margin.
  double row_percent(std::size_t i, std::size_t k) const;
  double col_percent(std::size_t i, std::size_t k) const;

  const std::vector<std::string>& row_labels() const { return row_labels_; }
  const std::vector<std::string>& col_labels() const { return col_labels_; }
  const std::vector<std::vector<std::int64_t>>& counts() const { return counts_; }

 private:
  std::vector<std::string> row_labels_;
  std::vector<std::string> col_labels_;
  std::vector<std::vector<std::int64_t>> counts_;
  std::vector<std::int64_t> row_totals_;
  std::vector<std::int64_t> col_totals_;
  std::int64_t grand_total_ = 0;
};

struct ChiSquareResult {
  double statistic = 0.0;
  int df = 0;
  double p_value = 1.0;
  double min_expected_cell = 0.0;
  /// Set when some expected count is below 5; the test is still reported.
  bool small_expected_warning = false;
};

/// Factor levels (observed ones, in category order) against all response
/// levels. `factor` is a covariate name or kClusterFactor.
ContingencyTable build_crosstab(const EncodedDataset& data, std::string_view factor);

/// Pearson chi-square without continuity correction. Throws DomainError
/// naming the cell when an expected count is zero.
ChiSquareResult chi_square_independence(const ContingencyTable& table);

/// Round half away from zero to `digits` decimals.
double round_half_away(double value, int digits);

/// CSV and aligned-text forms with frequency, row percent and column percent
/// per cell.
std::string crosstab_csv(const ContingencyTable& table);
std::string crosstab_text(const ContingencyTable& table, std::string_view title,
                          const ChiSquareResult* test = nullptr);

}  // namespace ordmlm
