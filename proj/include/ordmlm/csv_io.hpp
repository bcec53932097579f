#pragma once

#include <istream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "ordmlm/data_model.hpp"

namespace ordmlm {

/// Splits one CSV record: comma separated, double-quoted fields with ""
/// escapes.
std::vector<std::string> split_csv_line(std::string_view line);

/// Header plus rows; lines starting with '#' before the header are skipped.
struct CsvDocument {
  std::vector<std::string> comments;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Throws ConfigError when the column is absent.
  std::size_t column(std::string_view name) const;
};

CsvDocument read_csv(std::istream& in);
CsvDocument read_csv_file(const std::string& path);

/// Input column names for the hemoglobin value, the cluster label and each
/// covariate (covariate name -> column name).
struct ColumnMapping {
  std::string hemoglobin = "hemoglobin";
  std::string cluster = "cluster";
  /// Column of pre-coded ordinal responses; empty means classify hemoglobin.
  std::string response;
  std::map<std::string, std::string> covariates;

  /// Identity mapping for every covariate in `schemes`.
  static ColumnMapping identity(const std::vector<CovariateScheme>& schemes);
};

/// Builds records from a parsed document. Empty, "NA" and "." cells are
/// missing; an unparseable hemoglobin becomes NaN and is excluded at
/// encoding.
std::vector<ObservationRecord> records_from_csv(const CsvDocument& doc, const ColumnMapping& mapping);

/// Representative hemoglobin (g/dL) for each anemia level, used when
/// exporting encoded data in the ingestion schema.
double representative_hemoglobin(int level);

/// Dataset in the ingestion schema: cluster, response code, a representative
/// hemoglobin (NA unless 4 levels), one column per covariate label.
std::string dataset_to_csv(const EncodedDataset& data);

/// Encoded form: cluster index, response level and the score of each
/// covariate.
std::string encoded_to_csv(const EncodedDataset& data);

}  // namespace ordmlm
