#include "ordmlm/distributions.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <string>

#include "ordmlm/error.hpp"

namespace ordmlm {

double logistic(double eta) {
  if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

double log_logistic(double eta) {
  // log F(eta) = -log(1 + exp(-eta))
  if (eta >= 0.0) return -std::log1p(std::exp(-eta));
  return eta - std::log1p(std::exp(eta));
}

double log1m_logistic(double eta) { return log_logistic(-eta); }

double chi_square_sf(double x, int df) {
  if (df < 1) throw DomainError("chi-square df must be >= 1, got " + std::to_string(df));
  if (!(x >= 0.0)) throw DomainError("chi-square statistic must be >= 0");
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  return boost::math::gamma_q(0.5 * df, 0.5 * x);
}

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("normal quantile needs p in (0,1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

double student_t_two_sided_p(double t, int df) {
  if (df < 1) throw DomainError("t df must be >= 1");
  if (!std::isfinite(t)) return 0.0;
  boost::math::students_t_distribution<double> dist(df);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t)));
}

double student_t_quantile(double p, int df) {
  if (df < 1) throw DomainError("t df must be >= 1");
  if (!(p > 0.0 && p < 1.0)) throw DomainError("t quantile needs p in (0,1)");
  return boost::math::quantile(boost::math::students_t_distribution<double>(df), p);
}

}  // namespace ordmlm
