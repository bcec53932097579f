#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "ordmlm/distributions.hpp"
#include "ordmlm/error.hpp"
#include "ordmlm/glmm.hpp"
#include "ordmlm/numeric.hpp"

namespace ordmlm {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;  // log(2 pi)

// Logistic CDF and its first three derivatives at one cut-point. An infinite
// cut-point (the open ends of the outermost categories) has zero density.
struct LogisticPoint {
  double F = 0.0;
  double f = 0.0;
  double f1 = 0.0;
  double f2 = 0.0;
};

LogisticPoint logistic_point(double eta) {
  LogisticPoint p;
  p.F = logistic(eta);
  const double G = logistic(-eta);
  p.f = p.F * G;
  p.f1 = p.f * (G - p.F);
  p.f2 = p.f * (1.0 - 6.0 * p.F * G);
  return p;
}

// log p_r and derivatives for one observation whose category lies between
// cut-points a (lower) and b (upper). D is the derivative along a common
// shift of both cut-points (u or any slope); the a/b partials feed the
// threshold gradients.
struct ObservationTerms {
  double logp = 0.0;
  double d1 = 0.0, d2 = 0.0, d3 = 0.0;
  double hb = 0.0, hb_d = 0.0, hb_dd = 0.0;  // partial wrt upper cut-point
  double ha = 0.0, ha_d = 0.0, ha_dd = 0.0;  // partial wrt lower cut-point
};

ObservationTerms observation_terms(bool has_lower, double a, bool has_upper, double b,
                                   bool want_partials) {
  ObservationTerms t;
  LogisticPoint la, lb;
  if (has_lower) la = logistic_point(a);
  if (has_upper) lb = logistic_point(b);

  if (has_lower && has_upper) {
    // F(b) - F(a) = F(b) (1 - F(a)) (1 - exp(a - b))
    t.logp = log_logistic(b) + log1m_logistic(a) + std::log(-std::expm1(a - b));
  } else if (has_upper) {
    t.logp = log_logistic(b);
  } else if (has_lower) {
    t.logp = log1m_logistic(a);
  }
  const double p = std::exp(t.logp);

  const double s1 = lb.f - la.f;
  const double s2 = lb.f1 - la.f1;
  const double s3 = lb.f2 - la.f2;
  t.d1 = s1 / p;
  t.d2 = s2 / p - t.d1 * t.d1;
  t.d3 = s3 / p - 3.0 * (s2 / p) * t.d1 + 2.0 * t.d1 * t.d1 * t.d1;

  if (want_partials) {
    if (has_upper) {
      t.hb = lb.f / p;
      t.hb_d = lb.f1 / p - t.d1 * t.hb;
      t.hb_dd = lb.f2 / p - (s2 / p) * t.hb - 2.0 * t.d1 * t.hb_d;
    }
    if (has_lower) {
      t.ha = -la.f / p;
      t.ha_d = -la.f1 / p - t.d1 * t.ha;
      t.ha_dd = -la.f2 / p - (s2 / p) * t.ha - 2.0 * t.d1 * t.ha_d;
    }
  }
  return t;
}

double linear_part(const ParamVector& params, std::span<const double> x) {
  double s = 0.0;
  for (std::size_t c = 0; c < x.size(); ++c) s += params.slopes[c] * x[c];
  return s;
}

ObservationTerms row_terms(const ParamVector& params, int response, double shift,
                           bool want_partials) {
  const int K = static_cast<int>(params.thresholds.size()) + 1;
  const bool has_lower = response > 1;
  const bool has_upper = response < K;
  const double a = has_lower ? params.thresholds[response - 2] + shift : 0.0;
  const double b = has_upper ? params.thresholds[response - 1] + shift : 0.0;
  return observation_terms(has_lower, a, has_upper, b, want_partials);
}

void check_cluster_params(const ParamVector& params, std::size_t covariates) {
  if (params.slopes.size() != covariates) {
    throw DomainError("parameter vector has " + std::to_string(params.slopes.size()) +
                      " slopes, model has " + std::to_string(covariates) + " covariates");
  }
  if (!(params.tau00 > 0.0)) throw DomainError("tau00 must be > 0 for the cluster integrand");
}

double laplace_value(const IntegrandValue& g) {
  return g.value + 0.5 * kLog2Pi - 0.5 * std::log(-g.d2);
}

// Per-cluster Laplace log-likelihood with exact gradient in the natural
// coordinates. The mode moves with the parameters; that motion enters only
// through the log-curvature term because g'(mode) = 0.
double cluster_laplace_gradient(const ParamVector& params, const ClusterRows& cl,
                                std::size_t p, Eigen::Ref<Eigen::VectorXd> grad) {
  const ClusterState state = find_cluster_mode(params, cl, p);
  const double u = state.mode;
  const double tau = params.tau00;
  const std::size_t nt = params.thresholds.size();
  const std::size_t n = nt + p + 1;

  Eigen::VectorXd dg = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  Eigen::VectorXd dg1 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  Eigen::VectorXd dg2 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  double g = 0.0, g2 = 0.0, g3 = 0.0;

  for (std::size_t i = 0; i < cl.rows(); ++i) {
    const auto x = cl.row(i, p);
    const double w = cl.weights[i];
    const int r = cl.responses[i];
    const auto t = row_terms(params, r, linear_part(params, x) + u, true);
    g += w * t.logp;
    g2 += w * t.d2;
    g3 += w * t.d3;
    if (r <= static_cast<int>(nt)) {
      const auto m = static_cast<Eigen::Index>(r - 1);
      dg[m] += w * t.hb;
      dg1[m] += w * t.hb_d;
      dg2[m] += w * t.hb_dd;
    }
    if (r >= 2) {
      const auto m = static_cast<Eigen::Index>(r - 2);
      dg[m] += w * t.ha;
      dg1[m] += w * t.ha_d;
      dg2[m] += w * t.ha_dd;
    }
    for (std::size_t c = 0; c < p; ++c) {
      const auto m = static_cast<Eigen::Index>(nt + c);
      dg[m] += w * x[c] * t.d1;
      dg1[m] += w * x[c] * t.d2;
      dg2[m] += w * x[c] * t.d3;
    }
  }
  g += -u * u / (2.0 * tau) - 0.5 * (kLog2Pi + std::log(tau));
  g2 += -1.0 / tau;
  const auto om = static_cast<Eigen::Index>(n - 1);
  dg[om] = u * u / (2.0 * tau) - 0.5;
  dg1[om] = u / tau;
  dg2[om] = 1.0 / tau;

  // d mode / d psi = -dg1 / g2 ; d loglik = dg - (dg2 + g3 dmode) / (2 g2)
  const Eigen::VectorXd dmode = -dg1 / g2;
  grad = dg - (dg2 + g3 * dmode) / (2.0 * g2);
  return g + 0.5 * kLog2Pi - 0.5 * std::log(-g2);
}

std::vector<double> fixed_effects_cluster_terms(const ParamVector& params,
                                                const ClusterRows& cl, std::size_t p) {
  std::vector<double> out;
  out.reserve(cl.rows());
  for (std::size_t i = 0; i < cl.rows(); ++i) {
    const auto t = row_terms(params, cl.responses[i], linear_part(params, cl.row(i, p)), false);
    out.push_back(cl.weights[i] * t.logp);
  }
  return out;
}

}  // namespace

void ParamVector::validate() const {
  if (thresholds.empty()) throw DomainError("at least one threshold is required");
  for (std::size_t k = 0; k < thresholds.size(); ++k) {
    if (!std::isfinite(thresholds[k])) throw DomainError("non-finite threshold");
    if (k > 0 && !(thresholds[k] > thresholds[k - 1])) {
      throw DomainError("thresholds must be strictly increasing");
    }
  }
  for (double b : slopes) {
    if (!std::isfinite(b)) throw DomainError("non-finite slope");
  }
  if (!(tau00 >= 0.0) || !std::isfinite(tau00)) throw DomainError("tau00 must be finite and >= 0");
}

double cumulative_eta(const ParamVector& params, std::span<const double> x, double u, int k) {
  if (k < 1 || k > static_cast<int>(params.thresholds.size())) {
    throw DomainError("cumulative logit index out of range: " + std::to_string(k));
  }
  if (x.size() != params.slopes.size()) throw DomainError("covariate length mismatch");
  return params.thresholds[static_cast<std::size_t>(k - 1)] + linear_part(params, x) + u;
}

std::vector<double> category_probs(const ParamVector& params, std::span<const double> x,
                                   double u) {
  params.validate();
  if (x.size() != params.slopes.size()) throw DomainError("covariate length mismatch");
  const double shift = linear_part(params, x) + u;
  const int K = static_cast<int>(params.thresholds.size()) + 1;
  std::vector<double> probs(static_cast<std::size_t>(K));
  for (int r = 1; r <= K; ++r) {
    probs[static_cast<std::size_t>(r - 1)] = std::exp(row_terms(params, r, shift, false).logp);
  }
  return probs;
}

double ClusterRows::observations() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

IntegrandValue cluster_log_integrand(const ParamVector& params, const ClusterRows& cl,
                                     std::size_t p, double u) {
  check_cluster_params(params, p);
  IntegrandValue g;
  for (std::size_t i = 0; i < cl.rows(); ++i) {
    const double w = cl.weights[i];
    const auto t = row_terms(params, cl.responses[i], linear_part(params, cl.row(i, p)) + u, false);
    g.value += w * t.logp;
    g.d1 += w * t.d1;
    g.d2 += w * t.d2;
    g.d3 += w * t.d3;
  }
  const double tau = params.tau00;
  g.value += -u * u / (2.0 * tau) - 0.5 * (kLog2Pi + std::log(tau));
  g.d1 += -u / tau;
  g.d2 += -1.0 / tau;
  return g;
}

ClusterState find_cluster_mode(const ParamVector& params, const ClusterRows& cl,
                               std::size_t p) {
  constexpr double kGradTol = 1e-8;
  constexpr int kMaxNewton = 50;
  check_cluster_params(params, p);

  ClusterState state;
  double u = 0.0;
  IntegrandValue g = cluster_log_integrand(params, cl, p, u);
  bool ok = std::isfinite(g.value);
  while (ok && std::fabs(g.d1) > kGradTol && state.iterations < kMaxNewton) {
    if (!(g.d2 < 0.0)) {
      ok = false;
      break;
    }
    const double step = -g.d1 / g.d2;
    double t = 1.0;
    IntegrandValue next;
    for (int halving = 0; halving < 40; ++halving) {
      next = cluster_log_integrand(params, cl, p, u + t * step);
      if (std::isfinite(next.value) && next.value >= g.value - 1e-14 * std::fabs(g.value)) break;
      t *= 0.5;
    }
    u += t * step;
    g = next;
    ++state.iterations;
    ok = std::isfinite(g.value);
  }

  if (!ok || std::fabs(g.d1) > kGradTol) {
    // Bisection on g' over a bracket scaled by the prior spread.
    const double half_width = 10.0 * std::sqrt(params.tau00);
    double lo = -half_width, hi = half_width;
    double dlo = cluster_log_integrand(params, cl, p, lo).d1;
    double dhi = cluster_log_integrand(params, cl, p, hi).d1;
    if (!(dlo > 0.0 && dhi < 0.0)) {
      throw ConvergenceError("cluster " + std::to_string(cl.cluster) +
                                 ": mode search failed to bracket the maximum",
                             cl.cluster);
    }
    state.bisection = true;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      g = cluster_log_integrand(params, cl, p, mid);
      u = mid;
      ++state.iterations;
      if (std::fabs(g.d1) <= kGradTol || hi - lo <= 1e-15 * std::max(1.0, std::fabs(mid))) break;
      (g.d1 > 0.0 ? lo : hi) = mid;
    }
    if (!(g.d2 < 0.0)) {
      throw ConvergenceError("cluster " + std::to_string(cl.cluster) +
                                 ": log integrand is not concave at the located mode",
                             cl.cluster);
    }
  }

  state.mode = u;
  state.curvature = g.d2;
  state.loglik = laplace_value(g);
  return state;
}

const GaussHermiteRule& gauss_hermite_rule(int n) {
  if (n < 1 || n > 199) throw DomainError("Gauss-Hermite order must be in [1, 199]");
  static std::mutex mutex;
  static std::map<int, GaussHermiteRule> cache;
  std::lock_guard lock(mutex);
  if (auto it = cache.find(n); it != cache.end()) return it->second;

  // Nodes from the symmetric Jacobi matrix, polished by Newton on the
  // orthonormal Hermite recurrence; weights from the recurrence, which keeps
  // relative accuracy in the tiny outer weights.
  constexpr double kPiM4 = 0.7511255444649425;  // pi^(-1/4)
  const auto N = static_cast<std::size_t>(n);
  GaussHermiteRule rule;
  rule.nodes.assign(N, 0.0);
  rule.weights.assign(N, 0.0);
  rule.log_scaled_weights.assign(N, 0.0);

  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd sub(std::max(n - 1, 0));
  for (int j = 1; j < n; ++j) sub[j - 1] = std::sqrt(j / 2.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
  eig.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& roots = eig.eigenvalues();  // ascending

  // value and derivative of the degree-n orthonormal polynomial at z
  auto evaluate = [&](double z) {
    double p1 = kPiM4, p2 = 0.0;
    for (int j = 0; j < n; ++j) {
      const double p3 = p2;
      p2 = p1;
      p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
    }
    return std::pair{p1, std::sqrt(2.0 * n) * p2};
  };

  const std::size_t m = (N + 1) / 2;
  for (std::size_t i = 0; i < m; ++i) {
    double z = roots[static_cast<Eigen::Index>(N - 1 - i)];
    if (n % 2 == 1 && i == m - 1) {
      z = 0.0;
    } else {
      for (int it = 0; it < 10; ++it) {
        const auto [value, slope] = evaluate(z);
        const double step = value / slope;
        z -= step;
        if (std::fabs(step) <= 1e-15 * std::max(1.0, std::fabs(z))) break;
      }
    }
    const double pp = evaluate(z).second;
    const double log_w = std::log(2.0) - 2.0 * std::log(std::fabs(pp));
    rule.nodes[i] = z;
    rule.nodes[N - 1 - i] = -z;
    rule.weights[i] = rule.weights[N - 1 - i] = std::exp(log_w);
    rule.log_scaled_weights[i] = rule.log_scaled_weights[N - 1 - i] = log_w + z * z;
  }
  if (n == 1) {
    rule.weights[0] = std::sqrt(std::numbers::pi);
    rule.log_scaled_weights[0] = 0.5 * std::log(std::numbers::pi);
  }
  // nodes descending from the Newton sweep; store ascending
  std::reverse(rule.nodes.begin(), rule.nodes.end());
  std::reverse(rule.weights.begin(), rule.weights.end());
  std::reverse(rule.log_scaled_weights.begin(), rule.log_scaled_weights.end());
  return cache.emplace(n, std::move(rule)).first->second;
}

double ghq_cluster_loglik(const ParamVector& params, const ClusterRows& cl, std::size_t p,
                          int nodes) {
  if (nodes < 1 || nodes > 199 || nodes % 2 == 0) {
    throw DomainError("quadrature nodes must be odd and in [1, 199]");
  }
  const ClusterState state = find_cluster_mode(params, cl, p);
  if (nodes == 1) return state.loglik;
  const auto& rule = gauss_hermite_rule(nodes);
  const double sigma = 1.0 / std::sqrt(-state.curvature);
  const double scale = std::sqrt(2.0) * sigma;

  std::vector<double> terms(rule.nodes.size());
  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double u = state.mode + scale * rule.nodes[i];
    terms[i] = rule.log_scaled_weights[i] + cluster_log_integrand(params, cl, p, u).value;
    peak = std::max(peak, terms[i]);
  }
  for (double& t : terms) t = std::exp(t - peak);
  return std::log(scale) + peak + std::log(pairwise_sum(terms));
}

double total_minus2ll(const ParamVector& params, const ModelData& data, unsigned threads) {
  params.validate();
  const std::size_t p = data.covariates();
  if (params.slopes.size() != p ||
      static_cast<int>(params.thresholds.size()) != data.levels() - 1) {
    throw DomainError("parameter vector does not match the model dimensions");
  }
  const auto& clusters = data.clusters();
  std::vector<double> contrib(clusters.size());
  if (params.tau00 == 0.0) {
    parallel_for(clusters.size(), threads, [&](std::size_t j) {
      const auto terms = fixed_effects_cluster_terms(params, clusters[j], p);
      contrib[j] = pairwise_sum(terms);
    });
  } else {
    parallel_for(clusters.size(), threads, [&](std::size_t j) {
      contrib[j] = find_cluster_mode(params, clusters[j], p).loglik;
    });
  }
  return -2.0 * pairwise_sum(contrib);
}

double total_minus2ll_ghq(const ParamVector& params, const ModelData& data, int nodes,
                          unsigned threads) {
  params.validate();
  if (params.tau00 == 0.0) return total_minus2ll(params, data, threads);
  const auto& clusters = data.clusters();
  std::vector<double> contrib(clusters.size());
  parallel_for(clusters.size(), threads, [&](std::size_t j) {
    contrib[j] = ghq_cluster_loglik(params, clusters[j], data.covariates(), nodes);
  });
  return -2.0 * pairwise_sum(contrib);
}

LoglikGradient laplace_loglik_gradient(const ParamVector& params, const ModelData& data,
                                       unsigned threads) {
  params.validate();
  const std::size_t p = data.covariates();
  const std::size_t n = params.size();
  const auto& clusters = data.clusters();
  const auto J = clusters.size();
  std::vector<double> values(J);
  Eigen::MatrixXd grads(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(J));
  parallel_for(J, threads, [&](std::size_t j) {
    values[j] = cluster_laplace_gradient(params, clusters[j], p,
                                         grads.col(static_cast<Eigen::Index>(j)));
  });
  LoglikGradient out;
  out.loglik = pairwise_sum(values);
  out.gradient.resize(static_cast<Eigen::Index>(n));
  std::vector<double> row(J);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t j = 0; j < J; ++j) {
      row[j] = grads(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j));
    }
    out.gradient[static_cast<Eigen::Index>(k)] = pairwise_sum(row);
  }
  return out;
}

LoglikGradient fixed_effects_loglik_gradient(const ParamVector& params, const ModelData& data) {
  const std::size_t p = data.covariates();
  const std::size_t nt = params.thresholds.size();
  std::vector<double> values;
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nt + p));
  for (const auto& cl : data.clusters()) {
    for (std::size_t i = 0; i < cl.rows(); ++i) {
      const auto x = cl.row(i, p);
      const double w = cl.weights[i];
      const int r = cl.responses[i];
      const auto t = row_terms(params, r, linear_part(params, x), true);
      values.push_back(w * t.logp);
      if (r <= static_cast<int>(nt)) grad[r - 1] += w * t.hb;
      if (r >= 2) grad[r - 2] += w * t.ha;
      for (std::size_t c = 0; c < p; ++c) {
        grad[static_cast<Eigen::Index>(nt + c)] += w * x[c] * t.d1;
      }
    }
  }
  return {pairwise_sum(values), grad};
}

}  // namespace ordmlm
