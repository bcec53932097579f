#include "ordmlm/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "ordmlm/distributions.hpp"
#include "ordmlm/error.hpp"
#include "ordmlm/inference.hpp"
#include "ordmlm/numeric.hpp"
#include "ordmlm/random.hpp"

namespace ordmlm {

namespace {

std::vector<double> normalized(std::vector<double> counts) {
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  for (double& c : counts) c /= total;
  return counts;
}

}  // namespace

std::vector<CovariateGenerator> default_covariate_generators() {
  // category counts of the survey sample, in scheme order
  const std::vector<std::vector<double>> counts{
      {8074, 2062},             // place_of_residence
      {3772, 923, 3471, 1970},  // religion
      {6151, 2846, 1139},       // living_standard
      {5229, 4907},             // sex_of_child
      {5872, 3897},             // literacy_of_mother
      {4282, 3713, 1774},       // children_ever_born
      {3139, 6129, 501},        // age_at_marriage
      {5813, 4323},             // age_of_child
  };
  const auto schemes = default_covariate_schemes();
  std::vector<CovariateGenerator> out;
  for (std::size_t i = 0; i < schemes.size(); ++i) {
    out.push_back({schemes[i], normalized(counts[i])});
  }
  return out;
}

std::vector<CovariateGenerator> default_covariate_generators(const std::vector<std::string>& names) {
  const auto all = default_covariate_generators();
  std::vector<CovariateGenerator> out;
  for (const auto& name : names) {
    auto it = std::find_if(all.begin(), all.end(),
                           [&](const CovariateGenerator& g) { return g.scheme.name == name; });
    if (it == all.end()) throw DomainError("no default generator for covariate " + name);
    out.push_back(*it);
  }
  return out;
}

void SimConfig::validate() const {
  truth.validate();
  if (clusters < 1) throw DomainError("simulation needs at least one cluster");
  if (cluster_sizes.size() != 1 && cluster_sizes.size() != static_cast<std::size_t>(clusters)) {
    throw DomainError("cluster_sizes must have one entry or one per cluster");
  }
  for (int n : cluster_sizes) {
    if (n < 1) throw DomainError("cluster sizes must be >= 1");
  }
  if (covariates.size() != truth.slopes.size()) {
    throw DomainError("one covariate generator per slope is required");
  }
  for (const auto& g : covariates) {
    if (g.probabilities.size() != g.scheme.categories.size() || g.probabilities.empty()) {
      throw DomainError("generator for " + g.scheme.name + " has the wrong number of probabilities");
    }
    double s = 0.0;
    for (double p : g.probabilities) {
      if (!(p >= 0.0) || !std::isfinite(p)) throw DomainError("invalid probability for " + g.scheme.name);
      s += p;
    }
    if (std::fabs(s - 1.0) > 1e-9) throw DomainError("probabilities for " + g.scheme.name + " do not sum to 1");
  }
}

SimulatedData generate(const SimConfig& cfg) {
  cfg.validate();
  RandomStream rng(cfg.seed);
  const std::size_t p = cfg.covariates.size();
  const int K = static_cast<int>(cfg.truth.thresholds.size()) + 1;
  const double sd = std::sqrt(cfg.truth.tau00);

  std::vector<int> responses;
  std::vector<double> design;
  std::vector<int> cluster_index;
  std::vector<std::string> labels;
  std::vector<double> effects;
  std::vector<double> x(p);
  std::vector<double> cum(static_cast<std::size_t>(K - 1));

  for (int j = 0; j < cfg.clusters; ++j) {
    char label[32];
    std::snprintf(label, sizeof label, "C%03d", j + 1);
    labels.emplace_back(label);
    const double u = sd * rng.normal();
    effects.push_back(u);
    const int n = cfg.cluster_sizes.size() == 1 ? cfg.cluster_sizes[0]
                                                : cfg.cluster_sizes[static_cast<std::size_t>(j)];
    for (int i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < p; ++c) {
        x[c] = static_cast<double>(rng.categorical(cfg.covariates[c].probabilities));
      }
      for (int k = 1; k < K; ++k) {
        cum[static_cast<std::size_t>(k - 1)] = logistic(cumulative_eta(cfg.truth, x, u, k));
      }
      const double v = rng.uniform();
      int r = K;
      for (int k = 1; k < K; ++k) {
        if (v < cum[static_cast<std::size_t>(k - 1)]) {
          r = k;
          break;
        }
      }
      responses.push_back(r);
      cluster_index.push_back(j);
      design.insert(design.end(), x.begin(), x.end());
    }
  }

  std::vector<CovariateScheme> schemes;
  for (const auto& g : cfg.covariates) schemes.push_back(g.scheme);
  return {EncodedDataset(std::move(responses), std::move(design), std::move(cluster_index),
                         std::move(labels), std::move(schemes), K),
          std::move(effects)};
}

RecoverySummary recovery_study(const SimConfig& cfg, int replicates, const RecoveryOptions& options) {
  if (replicates < 1) throw DomainError("replicates must be >= 1");
  cfg.validate();

  struct Outcome {
    bool ok = false;
    std::vector<double> estimate, se;
  };
  std::vector<Outcome> outcomes(static_cast<std::size_t>(replicates));
  ModelSpec spec;
  spec.levels = static_cast<int>(cfg.truth.thresholds.size()) + 1;
  for (const auto& g : cfg.covariates) spec.covariates.push_back(g.scheme.name);

  FitOptions fit_options = options.fit;
  fit_options.threads = 1;
  parallel_for(outcomes.size(), options.threads, [&](std::size_t r) {
    SimConfig rc = cfg;
    rc.seed = derive_seed(cfg.seed, r);
    try {
      const auto sim = generate(rc);
      const FitResult fr = fit(spec, sim.data, fit_options);
      Outcome o;
      o.estimate = fr.estimates.thresholds;
      o.estimate.insert(o.estimate.end(), fr.estimates.slopes.begin(), fr.estimates.slopes.end());
      o.estimate.push_back(fr.estimates.tau00);
      o.se = fr.standard_errors.thresholds;
      o.se.insert(o.se.end(), fr.standard_errors.slopes.begin(), fr.standard_errors.slopes.end());
      o.se.push_back(fr.standard_errors.tau00);
      o.ok = fr.converged && fr.information_positive_definite;
      outcomes[r] = std::move(o);
    } catch (const Error&) {
      outcomes[r] = Outcome{};
    }
  });

  RecoverySummary summary;
  summary.replicates = replicates;
  for (const auto& o : outcomes) summary.failures += o.ok ? 0 : 1;
  if (summary.failures * 20 > replicates) {
    throw Error("recovery study: " + std::to_string(summary.failures) + " of " +
                std::to_string(replicates) + " fits failed (more than 5%)");
  }

  std::vector<double> truth = cfg.truth.thresholds;
  truth.insert(truth.end(), cfg.truth.slopes.begin(), cfg.truth.slopes.end());
  truth.push_back(cfg.truth.tau00);
  std::vector<std::string> names;
  for (std::size_t k = 1; k <= cfg.truth.thresholds.size(); ++k) names.push_back("threshold_" + std::to_string(k));
  for (const auto& s : spec.covariates) names.push_back(s);
  names.emplace_back("tau00");

  const double z = normal_quantile(0.975);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> iccs, taus;
  for (const auto& o : outcomes) {
    if (!o.ok) continue;
    iccs.push_back(icc(o.estimate.back()));
    taus.push_back(o.estimate.back());
  }
  const double used = static_cast<double>(iccs.size());
  summary.mean_icc = pairwise_sum(iccs) / used;
  summary.mean_tau = pairwise_sum(taus) / used;

  for (std::size_t q = 0; q < truth.size(); ++q) {
    std::vector<double> err, se;
    double covered = 0.0, with_se = 0.0;
    for (const auto& o : outcomes) {
      if (!o.ok) continue;
      err.push_back(o.estimate[q] - truth[q]);
      if (std::isfinite(o.se[q])) {
        se.push_back(o.se[q]);
        with_se += 1.0;
        if (std::fabs(o.estimate[q] - truth[q]) <= z * o.se[q]) covered += 1.0;
      }
    }
    ParameterRecovery pr;
    pr.name = names[q];
    pr.truth = truth[q];
    pr.bias = pairwise_sum(err) / used;
    if (err.size() > 1) {
      std::vector<double> sq;
      for (double e : err) sq.push_back((e - pr.bias) * (e - pr.bias));
      pr.empirical_se = std::sqrt(pairwise_sum(sq) / (used - 1.0));
    } else {
      pr.empirical_se = nan;
    }
    pr.mean_reported_se = with_se > 0 ? pairwise_sum(se) / with_se : nan;
    pr.coverage = with_se > 0 ? covered / with_se : nan;
    summary.parameters.push_back(pr);
  }
  return summary;
}

}  // namespace ordmlm
