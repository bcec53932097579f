#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ordmlm/crosstab.hpp"
#include "ordmlm/csv_io.hpp"
#include "ordmlm/data_model.hpp"
#include "ordmlm/glmm.hpp"

namespace ordmlm {

/// Process exit codes of the command-line tool.
enum class ExitCode : int { Success = 0, ConfigError = 2, DataError = 3, FitNonConvergence = 4 };

/// The five-model building sequence: null model, maternal factors, child
/// age, religion and literacy, then sex, living standard and residence.
std::vector<ModelSpec> default_ladder();

struct AnalysisConfig {
  std::string input;
  ColumnMapping columns;
  /// Category orderings of every covariate the ladder may use.
  std::vector<CovariateScheme> schemes;
  std::vector<ModelSpec> ladder;
  /// Response levels; other than 4 requires a pre-coded response column.
  int levels = kAnemiaLevels;
  FitOptions fit;
  int nodes = 21;
  std::string output_dir;
  std::uint64_t seed = 1;
  double alpha = 0.05;
  /// Denominator df for threshold t-tests; 0 means clusters - 1.
  int wald_df = 0;

  /// Default schemes, identity column mapping and the default ladder.
  static AnalysisConfig defaults();
  /// Throws ConfigError: empty paths, unknown covariates, a ladder that is
  /// not strictly nested, out-of-range options.
  void validate() const;
};

/// Reads a JSON configuration; absent keys keep their defaults.
AnalysisConfig load_config(const std::string& path);
AnalysisConfig config_from_json_text(const std::string& text);
std::string config_to_json_text(const AnalysisConfig& cfg);

struct FactorTable {
  std::string factor;
  std::optional<ContingencyTable> table;
  /// Reason the factor could not be tabulated or tested.
  std::string note;
};

struct QuadratureCheck {
  std::string model;
  int nodes = 0;
  double laplace_minus2ll = 0.0;
  double ghq_minus2ll = 0.0;
};

/// Everything the reports are rendered from. Derived quantities (tests,
/// odds ratios, profiles, model choice) are recomputed at render time so a
/// stored RunResults reproduces the tables exactly.
struct RunResults {
  AnalysisConfig config;
  ExclusionReport exclusions;
  int clusters = 0;
  std::vector<std::string> cluster_labels;
  std::vector<FactorTable> crosstabs;
  std::vector<FitResult> fits;
  std::vector<QuadratureCheck> quadrature;
  bool complete = false;
  std::string error;
};

struct LadderRow {
  std::string model;
  int parameters = 0;
  double minus2ll = 0.0;
  bool has_test = false;
  double chi2 = 0.0;
  int df = 0;
  double p_value = 1.0;
};

/// Deviance ladder with successive LRTs.
std::vector<LadderRow> ladder_table(const std::vector<FitResult>& fits);

/// Index of the chosen model: the smallest model after which no step of the
/// ladder is significant at `alpha`.
std::size_t select_model(const std::vector<LadderRow>& ladder, double alpha);

/// Writes every report table into `dir` and returns the file names in
/// write order.
std::vector<std::string> write_reports(const RunResults& results, const std::filesystem::path& dir);

/// Result of a pipeline run.
struct PipelineOutcome {
  ExitCode code = ExitCode::Success;
  std::string message;
  RunResults results;
  std::vector<std::string> artifacts;
};

/// Ingest, recode, tabulate, fit the ladder, validate with quadrature and
/// write reports plus manifest.json into cfg.output_dir. Failures after the
/// configuration check leave partial artifacts with status "partial" in the
/// manifest.
PipelineOutcome run_pipeline(const AnalysisConfig& cfg);

/// Re-renders all tables of a completed run directory from its manifest.
std::vector<std::string> regenerate_reports(const std::filesystem::path& dir);

/// Manifest round trip (config echo, results, versions, timings).
std::string results_to_json_text(const RunResults& results, const std::vector<std::string>& artifacts,
                                 double elapsed_seconds);
RunResults results_from_json_text(const std::string& text);

}  // namespace ordmlm
