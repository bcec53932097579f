#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ordmlm/data_model.hpp"
#include "ordmlm/glmm.hpp"

namespace ordmlm {

/// Category probabilities used to draw one covariate's scores.
struct CovariateGenerator {
  CovariateScheme scheme;
  std::vector<double> probabilities;
};

/// Generators for the survey covariates with the category shares observed in
/// the northeastern-states anemia sample.
std::vector<CovariateGenerator> default_covariate_generators();
/// Subset of the defaults by name, in the given order.
std::vector<CovariateGenerator> default_covariate_generators(const std::vector<std::string>& names);

struct SimConfig {
  ParamVector truth;
  /// One generator per slope, in slope order.
  std::vector<CovariateGenerator> covariates;
  int clusters = 1;
  /// Either one size for every cluster or one entry per cluster.
  std::vector<int> cluster_sizes{100};
  std::uint64_t seed = 1;

  /// Throws DomainError on an inconsistent configuration.
  void validate() const;
};

struct SimulatedData {
  EncodedDataset data;
  /// Drawn random intercepts, one per cluster.
  std::vector<double> random_effects;
};

/// Draws u_j ~ N(0, tau00) per cluster, then per observation the covariate
/// scores and the response by inverse CDF of the category probabilities.
/// Identical configurations give identical datasets.
SimulatedData generate(const SimConfig& cfg);

struct ParameterRecovery {
  std::string name;
  double truth = 0.0;
  double bias = 0.0;
  double empirical_se = 0.0;
  double mean_reported_se = 0.0;
  double coverage = 0.0;
};

struct RecoverySummary {
  int replicates = 0;
  int failures = 0;
  std::vector<ParameterRecovery> parameters;  // thresholds, slopes, tau00
  double mean_icc = 0.0;
  double mean_tau = 0.0;
};

struct RecoveryOptions {
  FitOptions fit;
  /// Workers across replicates; each fit runs single-threaded.
  unsigned threads = 1;
};

/// generate -> fit for each replicate with seeds derive_seed(cfg.seed, r).
/// Failed fits (exceptions, non-convergence, singular information) are
/// excluded; more than 5% failures throws Error.
RecoverySummary recovery_study(const SimConfig& cfg, int replicates,
                               const RecoveryOptions& options = {});

}  // namespace ordmlm
