#include "ordmlm/inference.hpp"

#include <cmath>

#include "ordmlm/distributions.hpp"
#include "ordmlm/error.hpp"

namespace ordmlm {

LrtResult lrt(double dev_reduced, double dev_full, int df) {
  if (df < 1) throw DomainError("LRT df must be >= 1");
  if (!std::isfinite(dev_reduced) || !std::isfinite(dev_full)) {
    throw DomainError("LRT deviances must be finite");
  }
  if (dev_reduced < dev_full) {
    throw DomainError("reduced-model deviance is below the full-model deviance; "
                      "models are not nested or a fit did not converge");
  }
  LrtResult r;
  r.chi2 = dev_reduced - dev_full;
  r.df = df;
  r.p_value = chi_square_sf(r.chi2, df);
  return r;
}

double icc(double tau00) {
  if (!(tau00 >= 0.0)) throw DomainError("tau00 must be >= 0");
  return tau00 / (tau00 + kLogisticVariance);
}

OddsRatioResult odds_ratio(double beta, double se, double level) {
  if (!(se > 0.0)) throw DomainError("standard error must be > 0");
  if (!(level > 0.0 && level < 1.0)) throw DomainError("confidence level must be in (0,1)");
  const double z = normal_quantile(0.5 * (1.0 + level));
  return {std::exp(beta), std::exp(beta - z * se), std::exp(beta + z * se), level};
}

double cumulative_pp(double eta) { return logistic(eta); }

ProbabilityProfile profile_probabilities(const ParamVector& params, std::span<const double> x,
                                         double u) {
  params.validate();
  if (x.size() != params.slopes.size()) {
    throw DomainError("profile has " + std::to_string(x.size()) + " scores, model has " +
                      std::to_string(params.slopes.size()) + " covariates");
  }
  ProbabilityProfile out;
  out.scores.assign(x.begin(), x.end());
  const int kmax = static_cast<int>(params.thresholds.size());
  for (int k = 1; k <= kmax; ++k) out.cumulative.push_back(cumulative_pp(cumulative_eta(params, x, u, k)));
  double prev = 0.0;
  for (double c : out.cumulative) {
    out.categories.push_back(c - prev);
    prev = c;
  }
  out.categories.push_back(1.0 - prev);
  return out;
}

ProbabilityProfile profile_probabilities(const FitResult& fit, std::span<const double> x,
                                         double u) {
  return profile_probabilities(fit.estimates, x, u);
}

WaldTest wald_t_test(double estimate, double se, int df) {
  if (df < 1) throw DomainError("t-test df must be >= 1");
  if (!(se > 0.0)) throw DomainError("standard error must be > 0");
  WaldTest w;
  w.estimate = estimate;
  w.se = se;
  w.t = estimate / se;
  w.p_value = student_t_two_sided_p(w.t, df);
  const double q = student_t_quantile(0.975, df);
  w.ci_low = estimate - q * se;
  w.ci_high = estimate + q * se;
  return w;
}

std::vector<WaldTest> wald_t_tests(const FitResult& fit, int df) {
  std::vector<WaldTest> out;
  for (std::size_t k = 0; k < fit.estimates.thresholds.size(); ++k) {
    WaldTest w = wald_t_test(fit.estimates.thresholds[k], fit.standard_errors.thresholds[k], df);
    w.name = "threshold_" + std::to_string(k + 1);
    out.push_back(std::move(w));
  }
  return out;
}

std::vector<WaldTest> wald_t_tests(const FitResult& fit) {
  return wald_t_tests(fit, std::max(1, fit.clusters - 1));
}

VarianceZTest variance_z_test(double tau_hat, double se_tau) {
  if (!(tau_hat > 0.0) || !(se_tau > 0.0)) {
    throw DomainError("variance z-test needs positive estimate and standard error");
  }
  const double z = tau_hat / se_tau;
  return {z, normal_sf(z)};
}

}  // namespace ordmlm
