#include "ordmlm/table_format.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "ordmlm/crosstab.hpp"
#include "ordmlm/error.hpp"

namespace ordmlm {

CsvTable::CsvTable(std::vector<ColumnSchema> schema) : schema_(std::move(schema)) {}

CsvTable& CsvTable::add_row(std::vector<std::string> cells) {
  if (cells.size() != schema_.size()) {
    throw Error("csv row has " + std::to_string(cells.size()) + " cells, schema has " +
                std::to_string(schema_.size()));
  }
  rows_.push_back(std::move(cells));
  return *this;
}

std::string CsvTable::str() const {
  std::string out = "# schema: ";
  for (std::size_t c = 0; c < schema_.size(); ++c) {
    if (c) out += ',';
    out += schema_[c].name + ':' + schema_[c].type;
  }
  out += '\n';
  for (std::size_t c = 0; c < schema_.size(); ++c) {
    if (c) out += ',';
    out += csv_escape(schema_[c].name);
  }
  out += '\n';
  for (const auto& row : rows_) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      out += csv_escape(row[c]);
    }
    out += '\n';
  }
  return out;
}

std::string csv_real(double v) {
  if (std::isnan(v)) return "NA";
  if (std::isinf(v)) return v > 0 ? "Inf" : "-Inf";
  return fmt::format("{:.17g}", v);
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

std::string format_p(double p) {
  if (std::isnan(p)) return "NA";
  if (p < 1e-4) return "<.0001";
  return format_fixed(p, 4);
}

std::string format_fixed(double v, int digits) {
  if (std::isnan(v)) return "NA";
  const double r = round_half_away(v, digits);
  std::string s = fmt::format("{:.{}f}", r, digits);
  // avoid "-0.00"
  if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

std::string format_sci(double v) {
  if (std::isnan(v)) return "NA";
  return fmt::format("{:.3e}", v);
}

std::string aligned_text(const std::vector<std::string>& header,
                         const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(header.size(), 0);
  auto widen = [&](const std::vector<std::string>& r) {
    for (std::size_t c = 0; c < r.size() && c < width.size(); ++c) {
      width[c] = std::max(width[c], r[c].size());
    }
  };
  widen(header);
  for (const auto& r : rows) widen(r);

  std::string out;
  auto emit = [&](const std::vector<std::string>& r) {
    std::string line;
    for (std::size_t c = 0; c < width.size(); ++c) {
      const std::string cell = c < r.size() ? r[c] : std::string();
      if (c) line += "  ";
      line += c == 0 ? fmt::format("{:<{}}", cell, width[c]) : fmt::format("{:>{}}", cell, width[c]);
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + '\n';
  };
  emit(header);
  std::size_t total = 0;
  for (auto w : width) total += w;
  out += std::string(total + 2 * (width.size() - 1), '-') + '\n';
  for (const auto& r : rows) emit(r);
  return out;
}

}  // namespace ordmlm
