#pragma once

namespace ordmlm {

/// Standard logistic CDF, overflow-safe for any finite argument.
double logistic(double eta);
/// log F(eta) and log(1 - F(eta)) without cancellation.
double log_logistic(double eta);
double log1m_logistic(double eta);

/// Upper tail of a chi-square(df) at x: Q(df/2, x/2). Throws DomainError for
/// x < 0 or df < 1.
double chi_square_sf(double x, int df);

/// Upper tail of the standard normal.
double normal_sf(double z);
/// Standard normal quantile; p in (0, 1).
double normal_quantile(double p);

/// Two-sided p-value of a central t statistic.
double student_t_two_sided_p(double t, int df);
/// Quantile of a central t distribution; p in (0, 1).
double student_t_quantile(double p, int df);

}  // namespace ordmlm
