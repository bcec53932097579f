#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ordmlm/data_model.hpp"

namespace ordmlm {

/// Which covariates enter a random-intercept cumulative-logit model.
struct ModelSpec {
  std::string name;
  int levels = kAnemiaLevels;
  std::vector<std::string> covariates;
};

/// Model parameters on the reported scale.
///
/// thresholds[k-1] is the cut-point of the k-th cumulative logit; the first
/// one is the grand intercept and the rest are intercept + increment. The
/// linear predictor of P(R <= k) is thresholds[k-1] + slopes . x + u, so a
/// positive slope pushes mass towards the low (more anemic) categories.
struct ParamVector {
  std::vector<double> thresholds;
  std::vector<double> slopes;
  double tau00 = 0.0;

  /// Throws DomainError unless thresholds are finite and strictly
  /// increasing, slopes are finite and tau00 >= 0.
  void validate() const;
  /// Number of free parameters including tau00.
  std::size_t size() const { return thresholds.size() + slopes.size() + 1; }
};

/// Observations of one cluster collapsed to unique (response, scores) rows
/// with integer multiplicities.
struct ClusterRows {
  int cluster = 0;
  std::vector<int> responses;
  std::vector<double> weights;
  std::vector<double> design;  // row-major, `covariates` columns

  std::size_t rows() const { return responses.size(); }
  double observations() const;
  std::span<const double> row(std::size_t i, std::size_t covariates) const {
    return std::span<const double>(design).subspan(i * covariates, covariates);
  }
};

/// Dataset restricted to a model's covariates and grouped by cluster.
class ModelData {
 public:
  ModelData(int levels, std::vector<std::string> covariate_names,
            std::vector<ClusterRows> clusters);

  /// Selects the model's covariate columns. Throws EncodingError on unknown
  /// covariates or duplicates, FitError when spec.levels disagrees with the
  /// data.
  static ModelData from(const EncodedDataset& data, const ModelSpec& spec);

  int levels() const { return levels_; }
  std::size_t covariates() const { return names_.size(); }
  const std::vector<std::string>& covariate_names() const { return names_; }
  const std::vector<ClusterRows>& clusters() const { return clusters_; }
  /// Weighted count of observations per response level.
  std::vector<double> level_counts() const;

 private:
  int levels_;
  std::vector<std::string> names_;
  std::vector<ClusterRows> clusters_;
};

/// thresholds[k-1] + slopes . x + u for 1 <= k <= K-1.
double cumulative_eta(const ParamVector& params, std::span<const double> x, double u, int k);

/// Category probabilities by differencing logistic cumulative probabilities.
/// Throws DomainError when thresholds are not strictly increasing.
std::vector<double> category_probs(const ParamVector& params, std::span<const double> x,
                                   double u);

/// Log integrand of one cluster's marginal likelihood and its u-derivatives:
/// sum_i w_i log p_{r_i}(u) - u^2/(2 tau) - log(2 pi tau)/2.
struct IntegrandValue {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
  double d3 = 0.0;
};

IntegrandValue cluster_log_integrand(const ParamVector& params, const ClusterRows& cluster,
                                     std::size_t covariates, double u);

/// Located maximizer of the cluster log integrand and its Laplace value.
struct ClusterState {
  double mode = 0.0;
  double curvature = 0.0;
  double loglik = 0.0;
  int iterations = 0;
  bool bisection = false;
};

/// Newton with step halving from u = 0, stopping at |g'| <= 1e-8 or 50
/// iterations; falls back to bisection on g' over +-10 sqrt(tau) when the
/// Newton path fails. Throws ConvergenceError carrying the cluster id.
ClusterState find_cluster_mode(const ParamVector& params, const ClusterRows& cluster,
                               std::size_t covariates);

/// Gauss-Hermite rule for weight exp(-x^2). `log_scaled_weights` holds
/// log(w_i) + x_i^2, which is what adaptive quadrature needs.
struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  std::vector<double> log_scaled_weights;
};

/// Cached rule for 1 <= n <= 199.
const GaussHermiteRule& gauss_hermite_rule(int n);

/// Adaptive Gauss-Hermite log marginal likelihood of one cluster, centered
/// at the mode with scale (-g'')^(-1/2). `nodes` must be odd in [1, 199];
/// one node reproduces the Laplace value.
double ghq_cluster_loglik(const ParamVector& params, const ClusterRows& cluster,
                          std::size_t covariates, int nodes);

/// -2 log L over all clusters via Laplace. At tau00 == 0 this is the
/// independent-observations ordinal logistic deviance.
double total_minus2ll(const ParamVector& params, const ModelData& data, unsigned threads = 1);

/// Same total with adaptive quadrature in place of Laplace.
double total_minus2ll_ghq(const ParamVector& params, const ModelData& data, int nodes,
                          unsigned threads = 1);

/// Laplace log-likelihood with its exact gradient in the natural
/// coordinates (thresholds..., slopes..., log tau00).
struct LoglikGradient {
  double loglik = 0.0;
  Eigen::VectorXd gradient;
};

LoglikGradient laplace_loglik_gradient(const ParamVector& params, const ModelData& data,
                                       unsigned threads = 1);
/// tau00 = 0 log-likelihood and its gradient in (thresholds..., slopes...).
LoglikGradient fixed_effects_loglik_gradient(const ParamVector& params, const ModelData& data);

struct FitOptions {
  double tol = 1e-8;
  int max_iter = 500;
  double gradient_tol = 1e-5;
  /// Starting point; defaults to the fixed-effects fit with tau00 = 0.1.
  std::optional<ParamVector> init;
  unsigned threads = 1;
};

struct FitResult {
  ModelSpec spec;
  ParamVector estimates;
  /// Same layout as `estimates`; NaN where the information is singular.
  ParamVector standard_errors;
  /// Covariance on the reported scale, ordered thresholds, slopes, tau00.
  Eigen::MatrixXd covariance;
  double minus2ll = 0.0;
  bool converged = false;
  int iterations = 0;
  double gradient_norm = 0.0;
  /// tau00 sits at the 1e-10 floor (fixed-effects limit).
  bool boundary = false;
  bool information_positive_definite = false;
  int clusters = 0;
  double observations = 0.0;

  std::vector<std::string> parameter_names() const;
};

/// Lower bound on tau00 during optimization.
inline constexpr double kTauFloor = 1e-10;

/// Maximum Laplace likelihood by quasi-Newton on (theta_1, log threshold
/// increments, slopes, log tau00), then Newton polishing on the numeric
/// Hessian of the analytic gradient. Throws FitError if a response level is
/// unobserved or the start is not finite. Exhausting max_iter returns
/// converged = false.
FitResult fit(const ModelData& data, const FitOptions& options = {});
FitResult fit(const ModelSpec& spec, const EncodedDataset& data, const FitOptions& options = {});

/// Ordinary (single-level) cumulative-logit fit: the tau00 = 0 boundary model.
FitResult fit_fixed_effects(const ModelData& data, const FitOptions& options = {});

}  // namespace ordmlm
