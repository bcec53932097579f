#include "ordmlm/crosstab.hpp"

#include <cmath>
#include <limits>

#include "ordmlm/distributions.hpp"
#include "ordmlm/error.hpp"
#include "ordmlm/table_format.hpp"

namespace ordmlm {

ContingencyTable::ContingencyTable(std::vector<std::string> row_labels,
                                   std::vector<std::string> col_labels,
                                   std::vector<std::vector<std::int64_t>> counts)
    : row_labels_(std::move(row_labels)),
      col_labels_(std::move(col_labels)),
      counts_(std::move(counts)) {
  if (row_labels_.size() < 2 || col_labels_.size() < 2) {
    throw DomainError("contingency table needs at least 2 rows and 2 columns");
  }
  if (counts_.size() != row_labels_.size()) throw DomainError("row count mismatch");
  row_totals_.assign(rows(), 0);
  col_totals_.assign(cols(), 0);
  for (std::size_t i = 0; i < rows(); ++i) {
    if (counts_[i].size() != cols()) throw DomainError("column count mismatch");
    for (std::size_t k = 0; k < cols(); ++k) {
      if (counts_[i][k] < 0) throw DomainError("negative cell count");
      row_totals_[i] += counts_[i][k];
      col_totals_[k] += counts_[i][k];
      grand_total_ += counts_[i][k];
    }
  }
}

double ContingencyTable::row_percent(std::size_t i, std::size_t k) const {
  if (row_totals_[i] == 0) return std::numeric_limits<double>::quiet_NaN();
  return 100.0 * static_cast<double>(counts_[i][k]) / static_cast<double>(row_totals_[i]);
}

double ContingencyTable::col_percent(std::size_t i, std::size_t k) const {
  if (col_totals_[k] == 0) return std::numeric_limits<double>::quiet_NaN();
  return 100.0 * static_cast<double>(counts_[i][k]) / static_cast<double>(col_totals_[k]);
}

ContingencyTable build_crosstab(const EncodedDataset& data, std::string_view factor) {
  std::vector<std::string> labels;
  std::vector<int> level_of(data.size());
  if (factor == kClusterFactor) {
    labels = data.cluster_labels();
    for (std::size_t i = 0; i < data.size(); ++i) level_of[i] = data.cluster_index()[i];
  } else {
    const std::size_t c = data.covariate_column(factor);
    labels = data.covariates()[c].categories;
    for (std::size_t i = 0; i < data.size(); ++i) {
      level_of[i] = static_cast<int>(data.score(i, c));
    }
  }

  const auto K = static_cast<std::size_t>(data.levels());
  std::vector<std::vector<std::int64_t>> full(labels.size(), std::vector<std::int64_t>(K, 0));
  for (std::size_t i = 0; i < data.size(); ++i) {
    ++full[static_cast<std::size_t>(level_of[i])][static_cast<std::size_t>(data.responses()[i] - 1)];
  }

  std::vector<std::string> row_labels;
  std::vector<std::vector<std::int64_t>> counts;
  for (std::size_t r = 0; r < labels.size(); ++r) {
    std::int64_t total = 0;
    for (auto v : full[r]) total += v;
    if (total == 0) continue;
    row_labels.push_back(labels[r]);
    counts.push_back(std::move(full[r]));
  }
  if (row_labels.size() < 2) {
    throw DomainError("factor '" + std::string(factor) + "' has fewer than two observed levels");
  }

  std::vector<std::string> col_labels;
  for (int k = 1; k <= data.levels(); ++k) {
    col_labels.emplace_back(data.levels() == kAnemiaLevels ? std::string(anemia_label(k))
                                                           : "Level " + std::to_string(k));
  }
  return ContingencyTable(std::move(row_labels), std::move(col_labels), std::move(counts));
}

ChiSquareResult chi_square_independence(const ContingencyTable& t) {
  const double n = static_cast<double>(t.grand_total());
  ChiSquareResult result;
  result.min_expected_cell = std::numeric_limits<double>::infinity();
  double stat = 0.0;
  for (std::size_t i = 0; i < t.rows(); ++i) {
    for (std::size_t k = 0; k < t.cols(); ++k) {
      const double expected =
          n > 0 ? static_cast<double>(t.row_total(i)) * static_cast<double>(t.col_total(k)) / n : 0.0;
      if (!(expected > 0.0)) {
        throw DomainError("zero expected count in cell (" + t.row_labels()[i] + ", " +
                          t.col_labels()[k] + ")");
      }
      const double diff = static_cast<double>(t.count(i, k)) - expected;
      stat += diff * diff / expected;
      result.min_expected_cell = std::min(result.min_expected_cell, expected);
    }
  }
  result.statistic = stat;
  result.df = static_cast<int>((t.rows() - 1) * (t.cols() - 1));
  result.p_value = chi_square_sf(stat, result.df);
  result.small_expected_warning = result.min_expected_cell < 5.0;
  return result;
}

double round_half_away(double value, int digits) {
  const double scale = std::pow(10.0, digits);
  return std::round(value * scale) / scale;
}

std::string crosstab_csv(const ContingencyTable& t) {
  CsvTable csv({{"factor_level", "string"},
                {"response_level", "string"},
                {"count", "int"},
                {"row_percent", "real"},
                {"col_percent", "real"}});
  for (std::size_t i = 0; i < t.rows(); ++i) {
    for (std::size_t k = 0; k < t.cols(); ++k) {
      csv.add_row({t.row_labels()[i], t.col_labels()[k], std::to_string(t.count(i, k)),
                   csv_real(t.row_percent(i, k)), csv_real(t.col_percent(i, k))});
    }
  }
  return csv.str();
}

std::string crosstab_text(const ContingencyTable& t, std::string_view title,
                          const ChiSquareResult* test) {
  std::vector<std::string> header{std::string(title)};
  for (const auto& c : t.col_labels()) header.push_back(c);
  header.emplace_back("Total");

  auto pct = [](double v) { return std::isnan(v) ? std::string("-") : format_fixed(v, 2) + "%"; };
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < t.rows(); ++i) {
    std::vector<std::string> freq{t.row_labels()[i]}, rowp{""}, colp{""};
    for (std::size_t k = 0; k < t.cols(); ++k) {
      freq.push_back(std::to_string(t.count(i, k)));
      rowp.push_back(pct(t.row_percent(i, k)));
      colp.push_back(pct(t.col_percent(i, k)));
    }
    freq.push_back(std::to_string(t.row_total(i)));
    rowp.emplace_back("100%");
    colp.emplace_back("-");
    rows.push_back(std::move(freq));
    rows.push_back(std::move(rowp));
    rows.push_back(std::move(colp));
  }
  std::vector<std::string> total{"Total"}, total_pct{""};
  for (std::size_t k = 0; k < t.cols(); ++k) {
    total.push_back(std::to_string(t.col_total(k)));
    total_pct.emplace_back("100%");
  }
  total.push_back(std::to_string(t.grand_total()));
  total_pct.emplace_back("100%");
  rows.push_back(std::move(total));
  rows.push_back(std::move(total_pct));

  std::string out = aligned_text(header, rows);
  if (test) {
    out += "Chi-square = " + format_fixed(test->statistic, 2) + ", df = " +
           std::to_string(test->df) + ", p " +
           (test->p_value < 1e-4 ? std::string("< .0001") : "= " + format_p(test->p_value)) + "\n";
    if (test->small_expected_warning) {
      out += "warning: minimum expected count " + format_fixed(test->min_expected_cell, 2) +
             " is below 5\n";
    }
  }
  return out;
}

}  // namespace ordmlm
