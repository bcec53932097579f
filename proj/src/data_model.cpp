#include "ordmlm/data_model.hpp"

#include <cmath>
#include <sstream>
#include <unordered_map>

#include "ordmlm/error.hpp"

namespace ordmlm {

namespace {

constexpr std::string_view kLevelLabels[] = {"Severe", "Moderate", "Mild", "None"};

}  // namespace

std::string_view anemia_label(int code) {
  if (code < 1 || code > kAnemiaLevels) {
    throw DomainError("anemia level code out of range: " + std::to_string(code));
  }
  return kLevelLabels[code - 1];
}

std::string_view anemia_label(AnemiaLevel level) {
  return anemia_label(static_cast<int>(level));
}

AnemiaLevel classify_hemoglobin(double hb) {
  if (!std::isfinite(hb)) {
    throw ClassificationError("hemoglobin is not finite");
  }
  if (hb < 0.0) {
    throw ClassificationError("hemoglobin is negative: " + std::to_string(hb));
  }
  if (hb < 7.0) return AnemiaLevel::Severe;
  if (hb < 10.0) return AnemiaLevel::Moderate;
  if (hb < 11.0) return AnemiaLevel::Mild;
  return AnemiaLevel::None;
}

std::optional<int> CovariateScheme::score_of(std::string_view label) const {
  for (std::size_t i = 0; i < categories.size(); ++i) {
    if (categories[i] == label) return static_cast<int>(i);
  }
  return std::nullopt;
}

std::vector<CovariateScheme> default_covariate_schemes() {
  return {
      {"place_of_residence", {"Rural", "Urban"}},
      {"religion", {"Hindu", "Muslim", "Christian", "Others"}},
      {"living_standard", {"Low", "Medium", "High"}},
      {"sex_of_child", {"Male", "Female"}},
      {"literacy_of_mother", {"Can read and write", "Cannot read and write"}},
      {"children_ever_born", {"2 or less", "3-4", "5 or more"}},
      {"age_at_marriage", {"Below 18 Years", "18 To 26 Years", "Above 26 Years"}},
      {"age_of_child", {"<48 months", "48 or more months"}},
  };
}

std::string ExclusionReport::to_text() const {
  std::ostringstream out;
  out << "records read: " << total_records << "\n"
      << "records retained: " << retained << "\n"
      << "records excluded: " << excluded() << "\n";
  for (const auto& [reason, count] : by_reason) {
    out << "  " << reason << ": " << count << "\n";
  }
  return out.str();
}

EncodedDataset::EncodedDataset(std::vector<int> responses, std::vector<double> design,
                               std::vector<int> cluster_index,
                               std::vector<std::string> cluster_labels,
                               std::vector<CovariateScheme> covariates, int levels)
    : responses_(std::move(responses)),
      design_(std::move(design)),
      cluster_index_(std::move(cluster_index)),
      cluster_labels_(std::move(cluster_labels)),
      covariates_(std::move(covariates)),
      levels_(levels) {
  if (levels_ < 2) throw EncodingError("need at least two response levels");
  if (cluster_labels_.empty()) throw EncodingError("dataset has no clusters");
  if (responses_.empty()) throw EncodingError("dataset has no observations");
  const std::size_t n = responses_.size();
  if (cluster_index_.size() != n || design_.size() != n * covariates_.size()) {
    throw EncodingError("inconsistent dataset dimensions");
  }
  const int J = cluster_count();
  for (std::size_t i = 0; i < n; ++i) {
    if (responses_[i] < 1 || responses_[i] > levels_) {
      throw EncodingError("response out of range at row " + std::to_string(i));
    }
    if (cluster_index_[i] < 0 || cluster_index_[i] >= J) {
      throw EncodingError("cluster index out of range at row " + std::to_string(i));
    }
  }
}

std::span<const double> EncodedDataset::row(std::size_t i) const {
  const std::size_t p = covariates_.size();
  return std::span<const double>(design_).subspan(i * p, p);
}

std::vector<std::string> EncodedDataset::covariate_names() const {
  std::vector<std::string> names;
  names.reserve(covariates_.size());
  for (const auto& c : covariates_) names.push_back(c.name);
  return names;
}

std::size_t EncodedDataset::covariate_column(std::string_view name) const {
  for (std::size_t c = 0; c < covariates_.size(); ++c) {
    if (covariates_[c].name == name) return c;
  }
  throw EncodingError("unknown covariate: " + std::string(name));
}

const std::string& EncodedDataset::decode(std::size_t i, std::size_t covariate) const {
  const auto s = static_cast<std::size_t>(score(i, covariate));
  return covariates_.at(covariate).categories.at(s);
}

EncodedDataset encode_dataset(std::span<const ObservationRecord> records,
                              const EncodingSpec& spec, ExclusionReport& report) {
  if (records.empty()) throw EncodingError("no records to encode");
  for (std::size_t a = 0; a < spec.covariates.size(); ++a) {
    for (std::size_t b = a + 1; b < spec.covariates.size(); ++b) {
      if (spec.covariates[a].name == spec.covariates[b].name) {
        throw EncodingError("duplicate covariate: " + spec.covariates[a].name);
      }
    }
  }

  if (spec.levels < 2) throw EncodingError("need at least two response levels");
  report = ExclusionReport{};
  report.total_records = records.size();

  const std::size_t p = spec.covariates.size();
  std::vector<int> responses;
  std::vector<double> design;
  std::vector<int> cluster_index;
  std::vector<std::string> cluster_labels;
  std::unordered_map<std::string, int> cluster_ids;
  std::vector<double> scores(p);

  for (std::size_t r = 0; r < records.size(); ++r) {
    const auto& rec = records[r];
    int level = 0;
    if (rec.response) {
      if (*rec.response < 1 || *rec.response > spec.levels) {
        ++report.by_reason["invalid response"];
        continue;
      }
      level = *rec.response;
    } else {
      if (!rec.hemoglobin) {
        ++report.by_reason["missing hemoglobin"];
        continue;
      }
      if (spec.levels != kAnemiaLevels) {
        throw EncodingError("record " + std::to_string(r + 1) +
                            ": hemoglobin classifies into 4 levels, not " + std::to_string(spec.levels));
      }
      try {
        level = static_cast<int>(classify_hemoglobin(*rec.hemoglobin));
      } catch (const ClassificationError&) {
        ++report.by_reason["invalid hemoglobin"];
        continue;
      }
    }
    if (rec.cluster_id.empty()) {
      ++report.by_reason["missing cluster"];
      continue;
    }
    bool missing = false;
    for (std::size_t c = 0; c < p; ++c) {
      const auto& scheme = spec.covariates[c];
      auto it = rec.covariates.find(scheme.name);
      if (it == rec.covariates.end() || it->second.empty()) {
        ++report.by_reason["missing " + scheme.name];
        missing = true;
        break;
      }
      auto s = scheme.score_of(it->second);
      if (!s) {
        throw EncodingError("record " + std::to_string(r + 1) + ": unknown label '" +
                            it->second + "' for covariate " + scheme.name);
      }
      scores[c] = *s;
    }
    if (missing) continue;

    auto [it, inserted] =
        cluster_ids.try_emplace(rec.cluster_id, static_cast<int>(cluster_labels.size()));
    if (inserted) cluster_labels.push_back(rec.cluster_id);
    responses.push_back(level);
    cluster_index.push_back(it->second);
    design.insert(design.end(), scores.begin(), scores.end());
  }

  report.retained = responses.size();
  if (responses.empty()) throw EncodingError("every record was excluded");
  return EncodedDataset(std::move(responses), std::move(design), std::move(cluster_index),
                        std::move(cluster_labels), spec.covariates, spec.levels);
}

EncodedDataset encode_dataset(std::span<const ObservationRecord> records,
                              const EncodingSpec& spec) {
  ExclusionReport report;
  return encode_dataset(records, spec, report);
}

}  // namespace ordmlm
