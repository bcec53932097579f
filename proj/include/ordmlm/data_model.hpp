#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ordmlm {

/// Ordinal anemia outcome. The numeric order Severe < Moderate < Mild < None is
/// the "at or below" direction of every cumulative logit.
enum class AnemiaLevel : int { Severe = 1, Moderate = 2, Mild = 3, None = 4 };

inline constexpr int kAnemiaLevels = 4;

std::string_view anemia_label(AnemiaLevel level);
std::string_view anemia_label(int code);

/// WHO cutoffs on half-open intervals: [0,7) severe, [7,10) moderate,
/// [10,11) mild, [11,inf) none. Throws ClassificationError on negative or
/// non-finite input.
AnemiaLevel classify_hemoglobin(double hb);

/// One child as read from the survey file. Covariates hold raw category
/// labels keyed by covariate name; an absent key or empty label is missing.
struct ObservationRecord {
  std::optional<double> hemoglobin;
  /// Pre-coded ordinal response 1..levels; takes precedence over hemoglobin.
  std::optional<int> response;
  std::string cluster_id;
  std::map<std::string, std::string> covariates;
};

/// Ordered categories of one covariate; the score of a label is its index.
struct CovariateScheme {
  std::string name;
  std::vector<std::string> categories;

  std::optional<int> score_of(std::string_view label) const;
  bool operator==(const CovariateScheme&) const = default;
};

/// Survey risk-factor covariates with their category orderings.
std::vector<CovariateScheme> default_covariate_schemes();

/// Covariates to encode, in design-column order.
struct EncodingSpec {
  std::vector<CovariateScheme> covariates;
  /// Response levels; records without a pre-coded response need the default.
  int levels = kAnemiaLevels;
};

/// Per-reason exclusion counts produced by listwise deletion.
struct ExclusionReport {
  std::size_t total_records = 0;
  std::size_t retained = 0;
  std::map<std::string, std::size_t> by_reason;

  std::size_t excluded() const { return total_records - retained; }
  std::string to_text() const;
};

/// Cluster-indexed ordinal responses with a row-major score design.
/// Immutable after construction.
class EncodedDataset {
 public:
  EncodedDataset(std::vector<int> responses, std::vector<double> design,
                 std::vector<int> cluster_index,
                 std::vector<std::string> cluster_labels,
                 std::vector<CovariateScheme> covariates, int levels);

  std::size_t size() const { return responses_.size(); }
  int levels() const { return levels_; }
  int cluster_count() const { return static_cast<int>(cluster_labels_.size()); }
  std::size_t covariate_count() const { return covariates_.size(); }

  std::span<const int> responses() const { return responses_; }
  std::span<const int> cluster_index() const { return cluster_index_; }
  std::span<const double> design() const { return design_; }
  std::span<const double> row(std::size_t i) const;
  double score(std::size_t i, std::size_t covariate) const {
    return design_[i * covariates_.size() + covariate];
  }

  const std::vector<std::string>& cluster_labels() const { return cluster_labels_; }
  const std::vector<CovariateScheme>& covariates() const { return covariates_; }
  std::vector<std::string> covariate_names() const;
  /// Column index of a covariate; throws EncodingError if absent.
  std::size_t covariate_column(std::string_view name) const;

  /// Category label of an encoded score (inverse of the encoding).
  const std::string& decode(std::size_t i, std::size_t covariate) const;

  bool operator==(const EncodedDataset&) const = default;

 private:
  std::vector<int> responses_;
  std::vector<double> design_;
  std::vector<int> cluster_index_;
  std::vector<std::string> cluster_labels_;
  std::vector<CovariateScheme> covariates_;
  int levels_;
};

/// Recodes hemoglobin into anemia levels, scores covariates, and indexes
/// clusters densely in first-appearance order. Records with missing or
/// invalid hemoglobin, missing cluster, or missing covariates are dropped
/// and counted in `report`. Unknown labels and empty input throw
/// EncodingError.
EncodedDataset encode_dataset(std::span<const ObservationRecord> records,
                              const EncodingSpec& spec, ExclusionReport& report);
EncodedDataset encode_dataset(std::span<const ObservationRecord> records,
                              const EncodingSpec& spec);

}  // namespace ordmlm
