#pragma once

#include <span>
#include <string>
#include <vector>

#include "ordmlm/glmm.hpp"

namespace ordmlm {

/// pi^2 / 3, the variance of the standard logistic distribution.
inline constexpr double kLogisticVariance = 3.28986813369645287294;

struct LrtResult {
  double chi2 = 0.0;
  int df = 0;
  double p_value = 1.0;
};

/// Deviance difference test for nested models. Throws DomainError when the
/// reduced deviance is below the full one (non-nested or non-converged).
LrtResult lrt(double dev_reduced, double dev_full, int df);

/// tau00 / (tau00 + pi^2/3). Throws DomainError for negative tau00.
double icc(double tau00);

struct OddsRatioResult {
  double odds_ratio = 1.0;
  double ci_low = 1.0;
  double ci_high = 1.0;
  double level = 0.95;
};

OddsRatioResult odds_ratio(double beta, double se, double level = 0.95);

/// Logistic predicted probability exp(eta)/(1+exp(eta)).
double cumulative_pp(double eta);

struct ProbabilityProfile {
  std::vector<double> scores;
  std::vector<double> cumulative;  // P(R <= k), k = 1..K-1
  std::vector<double> categories;  // p_1..p_K
};

/// Profile at covariate scores `x` and random effect `u` (0 = typical
/// cluster). The last category is 1 - P(R <= K-1).
ProbabilityProfile profile_probabilities(const ParamVector& params, std::span<const double> x,
                                         double u = 0.0);
ProbabilityProfile profile_probabilities(const FitResult& fit, std::span<const double> x,
                                         double u = 0.0);

struct WaldTest {
  std::string name;
  double estimate = 0.0;
  double se = 0.0;
  double t = 0.0;
  double p_value = 1.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

/// t = estimate/se with two-sided p and a 95% interval from a central t
/// with `df` denominator degrees of freedom.
WaldTest wald_t_test(double estimate, double se, int df);
/// One test per threshold of a fit; df defaults to clusters - 1.
std::vector<WaldTest> wald_t_tests(const FitResult& fit, int df);
std::vector<WaldTest> wald_t_tests(const FitResult& fit);

struct VarianceZTest {
  double z = 0.0;
  double p_one_sided = 0.5;
};

/// Wald z for the random-intercept variance with a one-sided upper-tail p.
VarianceZTest variance_z_test(double tau_hat, double se_tau);

}  // namespace ordmlm
