#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace ordmlm {

/// Column of a machine-readable table: name and value type
/// ("string", "int" or "real").
struct ColumnSchema {
  std::string name;
  std::string type;
};

/// CSV with a leading "# schema: name:type,..." comment and a header row.
/// Reals are written with 17 significant digits so they round-trip.
class CsvTable {
 public:
  explicit CsvTable(std::vector<ColumnSchema> schema);

  CsvTable& add_row(std::vector<std::string> cells);
  std::string str() const;
  const std::vector<ColumnSchema>& schema() const { return schema_; }

 private:
  std::vector<ColumnSchema> schema_;
  std::vector<std::vector<std::string>> rows_;
};

std::string csv_real(double v);
std::string csv_escape(std::string_view field);

/// "<.0001" below 1e-4, otherwise four decimals.
std::string format_p(double p);
/// Fixed-point with round half away from zero.
std::string format_fixed(double v, int digits);
/// Three-digit scientific notation.
std::string format_sci(double v);

/// Column-aligned plain text table. First column left-aligned, the rest
/// right-aligned.
std::string aligned_text(const std::vector<std::string>& header,
                         const std::vector<std::vector<std::string>>& rows);

}  // namespace ordmlm
