#include "ordmlm/csv_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>

#include "ordmlm/error.hpp"
#include "ordmlm/table_format.hpp"

namespace ordmlm {

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field += ch;
    }
  }
  if (quoted) throw DataError("unterminated quoted field");
  fields.push_back(std::move(field));
  return fields;
}

std::size_t CsvDocument::column(std::string_view name) const {
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == name) return c;
  }
  throw ConfigError("input has no column named '" + std::string(name) + "'");
}

CsvDocument read_csv(std::istream& in) {
  CsvDocument doc;
  std::string line;
  bool first = true;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (first && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    first = false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (doc.header.empty()) {
      if (line.empty()) continue;
      if (line.front() == '#') {
        doc.comments.push_back(line);
        continue;
      }
      doc.header = split_csv_line(line);
      continue;
    }
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != doc.header.size()) {
      throw DataError("line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                      " fields, header has " + std::to_string(doc.header.size()));
    }
    doc.rows.push_back(std::move(fields));
  }
  if (doc.header.empty()) throw DataError("input has no header row");
  return doc;
}

CsvDocument read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return read_csv(in);
}

ColumnMapping ColumnMapping::identity(const std::vector<CovariateScheme>& schemes) {
  ColumnMapping m;
  for (const auto& s : schemes) m.covariates[s.name] = s.name;
  return m;
}

namespace {

bool is_missing(const std::string& cell) {
  return cell.empty() || cell == "NA" || cell == ".";
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::vector<ObservationRecord> records_from_csv(const CsvDocument& doc, const ColumnMapping& mapping) {
  const bool coded = !mapping.response.empty();
  const std::size_t hb_col = coded ? 0 : doc.column(mapping.hemoglobin);
  const std::size_t resp_col = coded ? doc.column(mapping.response) : 0;
  const std::size_t cl_col = doc.column(mapping.cluster);
  std::vector<std::pair<std::string, std::size_t>> cov_cols;
  for (const auto& [name, column] : mapping.covariates) cov_cols.emplace_back(name, doc.column(column));

  std::vector<ObservationRecord> out;
  out.reserve(doc.rows.size());
  for (const auto& row : doc.rows) {
    ObservationRecord rec;
    if (coded) {
      const std::string code = trim(row[resp_col]);
      int v = 0;
      const auto [ptr, ec] = std::from_chars(code.data(), code.data() + code.size(), v);
      // unparseable codes become 0 so encoding counts them as invalid
      rec.response = (ec == std::errc() && ptr == code.data() + code.size()) ? v : 0;
    }
    const std::string hb = coded ? std::string() : trim(row[hb_col]);
    if (!coded && !is_missing(hb)) {
      try {
        std::size_t used = 0;
        const double v = std::stod(hb, &used);
        rec.hemoglobin = used == hb.size() ? v : std::numeric_limits<double>::quiet_NaN();
      } catch (const std::exception&) {
        rec.hemoglobin = std::numeric_limits<double>::quiet_NaN();
      }
    }
    const std::string cl = trim(row[cl_col]);
    if (!is_missing(cl)) rec.cluster_id = cl;
    for (const auto& [name, c] : cov_cols) {
      const std::string v = trim(row[c]);
      if (!is_missing(v)) rec.covariates[name] = v;
    }
    out.push_back(std::move(rec));
  }
  return out;
}

double representative_hemoglobin(int level) {
  switch (level) {
    case 1: return 6.0;
    case 2: return 8.5;
    case 3: return 10.5;
    case 4: return 12.0;
    default: throw DomainError("no representative hemoglobin for level " + std::to_string(level));
  }
}

std::string dataset_to_csv(const EncodedDataset& data) {
  std::vector<ColumnSchema> schema{{"cluster", "string"}, {"response", "int"}, {"hemoglobin", "real"}};
  for (const auto& c : data.covariates()) schema.push_back({c.name, "string"});
  CsvTable csv(std::move(schema));
  const bool anemia = data.levels() == kAnemiaLevels;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const int y = data.responses()[i];
    std::vector<std::string> row{data.cluster_labels()[static_cast<std::size_t>(data.cluster_index()[i])],
                                 std::to_string(y), anemia ? csv_real(representative_hemoglobin(y)) : "NA"};
    for (std::size_t c = 0; c < data.covariate_count(); ++c) row.push_back(data.decode(i, c));
    csv.add_row(std::move(row));
  }
  return csv.str();
}

std::string encoded_to_csv(const EncodedDataset& data) {
  std::vector<ColumnSchema> schema{{"cluster_index", "int"}, {"cluster", "string"}, {"response", "int"}};
  for (const auto& c : data.covariates()) schema.push_back({c.name, "int"});
  CsvTable csv(std::move(schema));
  for (std::size_t i = 0; i < data.size(); ++i) {
    const int j = data.cluster_index()[i];
    std::vector<std::string> row{std::to_string(j), data.cluster_labels()[static_cast<std::size_t>(j)],
                                 std::to_string(data.responses()[i])};
    for (std::size_t c = 0; c < data.covariate_count(); ++c) {
      row.push_back(std::to_string(static_cast<int>(data.score(i, c))));
    }
    csv.add_row(std::move(row));
  }
  return csv.str();
}

}  // namespace ordmlm
