#pragma once

#include <string>
#include <vector>

#include "ordmlm/glmm.hpp"
#include "ordmlm/inference.hpp"

namespace ordmlm {

/// One row per parameter: name, estimate, standard error.
std::string fit_csv(const FitResult& fit);
/// Human-readable parameter block with fit diagnostics.
std::string fit_text(const FitResult& fit);

/// Side-by-side estimates "(se)" of several models with the deviance row and
/// its LRT p-values.
std::string models_text(const std::vector<FitResult>& fits);
std::string models_csv(const std::vector<FitResult>& fits);

/// LRT table for a list of deviances with per-step df.
std::string lrt_csv(const std::vector<std::string>& names, const std::vector<double>& deviances,
                    const std::vector<int>& dfs);
std::string lrt_text(const std::vector<std::string>& names, const std::vector<double>& deviances,
                     const std::vector<int>& dfs);

/// Threshold t-tests.
std::string wald_csv(const std::string& model, const std::vector<WaldTest>& tests, int df);
std::string wald_text(const std::string& model, const std::vector<WaldTest>& tests, int df);

/// Odds ratios with confidence intervals for a fit's slopes.
std::string odds_ratio_csv(const FitResult& fit, double level = 0.95);
std::string odds_ratio_text(const FitResult& fit, double level = 0.95);

/// Category probabilities as one covariate runs over its categories with the
/// others held at score 0.
struct ProfileTable {
  std::string covariate;
  std::vector<std::string> categories;
  std::vector<ProbabilityProfile> profiles;
};

ProfileTable profile_table(const FitResult& fit, std::size_t covariate,
                           const std::vector<std::string>& categories);
std::string profile_csv(const ProfileTable& table);
std::string profile_text(const ProfileTable& table);

/// Human label of an anemia level ("Severely anemic", ...).
std::string level_title(int level, int levels);

}  // namespace ordmlm
