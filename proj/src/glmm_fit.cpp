#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "ordmlm/distributions.hpp"
#include "ordmlm/error.hpp"
#include "ordmlm/glmm.hpp"

namespace ordmlm {

ModelData::ModelData(int levels, std::vector<std::string> covariate_names,
                     std::vector<ClusterRows> clusters)
    : levels_(levels), names_(std::move(covariate_names)), clusters_(std::move(clusters)) {
  if (levels_ < 2) throw FitError("model needs at least two response levels");
  if (clusters_.empty()) throw FitError("model data has no clusters");
}

ModelData ModelData::from(const EncodedDataset& data, const ModelSpec& spec) {
  if (spec.levels != data.levels()) {
    throw FitError("model expects " + std::to_string(spec.levels) + " levels, data has " +
                   std::to_string(data.levels()));
  }
  std::vector<std::size_t> columns;
  for (const auto& name : spec.covariates) {
    const std::size_t c = data.covariate_column(name);
    if (std::find(columns.begin(), columns.end(), c) != columns.end()) {
      throw EncodingError("duplicate covariate in model spec: " + name);
    }
    columns.push_back(c);
  }
  const std::size_t p = columns.size();

  // (response, scores) -> multiplicity, per cluster; std::map keeps a
  // deterministic row order.
  using Key = std::pair<int, std::vector<double>>;
  std::vector<std::map<Key, double>> groups(static_cast<std::size_t>(data.cluster_count()));
  std::vector<double> x(p);
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t c = 0; c < p; ++c) x[c] = data.score(i, columns[c]);
    groups[static_cast<std::size_t>(data.cluster_index()[i])][{data.responses()[i], x}] += 1.0;
  }

  std::vector<ClusterRows> clusters;
  clusters.reserve(groups.size());
  for (std::size_t j = 0; j < groups.size(); ++j) {
    ClusterRows cl;
    cl.cluster = static_cast<int>(j);
    for (const auto& [key, weight] : groups[j]) {
      cl.responses.push_back(key.first);
      cl.weights.push_back(weight);
      cl.design.insert(cl.design.end(), key.second.begin(), key.second.end());
    }
    clusters.push_back(std::move(cl));
  }
  return ModelData(data.levels(), spec.covariates, std::move(clusters));
}

std::vector<double> ModelData::level_counts() const {
  std::vector<double> counts(static_cast<std::size_t>(levels_), 0.0);
  for (const auto& cl : clusters_) {
    for (std::size_t i = 0; i < cl.rows(); ++i) {
      counts[static_cast<std::size_t>(cl.responses[i] - 1)] += cl.weights[i];
    }
  }
  return counts;
}

std::vector<std::string> FitResult::parameter_names() const {
  std::vector<std::string> names;
  for (std::size_t k = 1; k <= estimates.thresholds.size(); ++k) {
    names.push_back("threshold_" + std::to_string(k));
  }
  for (const auto& c : spec.covariates) names.push_back(c);
  names.emplace_back("tau00");
  return names;
}

namespace {

// Unconstrained coordinates: theta_1, log increments of later thresholds,
// slopes and (for the mixed model) log tau00.
struct Coordinates {
  std::size_t thresholds;
  std::size_t slopes;
  bool has_tau;

  std::size_t size() const { return thresholds + slopes + (has_tau ? 1 : 0); }

  Eigen::VectorXd pack(const ParamVector& pv) const {
    Eigen::VectorXd z(static_cast<Eigen::Index>(size()));
    z[0] = pv.thresholds[0];
    for (std::size_t k = 1; k < thresholds; ++k) {
      z[static_cast<Eigen::Index>(k)] = std::log(pv.thresholds[k] - pv.thresholds[k - 1]);
    }
    for (std::size_t c = 0; c < slopes; ++c) z[static_cast<Eigen::Index>(thresholds + c)] = pv.slopes[c];
    if (has_tau) z[static_cast<Eigen::Index>(thresholds + slopes)] = std::log(pv.tau00);
    return z;
  }

  ParamVector unpack(const Eigen::VectorXd& z) const {
    ParamVector pv;
    pv.thresholds.resize(thresholds);
    pv.thresholds[0] = z[0];
    for (std::size_t k = 1; k < thresholds; ++k) {
      pv.thresholds[k] = pv.thresholds[k - 1] + std::exp(z[static_cast<Eigen::Index>(k)]);
    }
    pv.slopes.resize(slopes);
    for (std::size_t c = 0; c < slopes; ++c) pv.slopes[c] = z[static_cast<Eigen::Index>(thresholds + c)];
    pv.tau00 = has_tau ? std::exp(z[static_cast<Eigen::Index>(thresholds + slopes)]) : 0.0;
    return pv;
  }

  // Chain rule from natural (thresholds, slopes[, log tau]) gradient.
  Eigen::VectorXd to_unconstrained(const Eigen::VectorXd& z, const Eigen::VectorXd& g) const {
    Eigen::VectorXd out = g;
    double tail = 0.0;
    for (std::size_t k = thresholds; k-- > 0;) {
      tail += g[static_cast<Eigen::Index>(k)];
      out[static_cast<Eigen::Index>(k)] = k == 0 ? tail : std::exp(z[static_cast<Eigen::Index>(k)]) * tail;
    }
    return out;
  }

  // d(reported parameters) / d(z); reported tau00 is exp(log tau).
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& z) const {
    const auto n = static_cast<Eigen::Index>(size());
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t k = 0; k < thresholds; ++k) {
      J(static_cast<Eigen::Index>(k), 0) = 1.0;
      for (std::size_t m = 1; m <= k; ++m) {
        J(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(m)) =
            std::exp(z[static_cast<Eigen::Index>(m)]);
      }
    }
    for (std::size_t c = 0; c < slopes; ++c) {
      const auto i = static_cast<Eigen::Index>(thresholds + c);
      J(i, i) = 1.0;
    }
    if (has_tau) J(n - 1, n - 1) = std::exp(z[n - 1]);
    return J;
  }
};

// Negative log-likelihood and gradient in unconstrained coordinates.
struct Objective {
  const ModelData& data;
  Coordinates coords;
  unsigned threads;

  double operator()(const Eigen::VectorXd& z, Eigen::VectorXd& grad) const {
    const ParamVector pv = coords.unpack(z);
    LoglikGradient lg = coords.has_tau ? laplace_loglik_gradient(pv, data, threads)
                                       : fixed_effects_loglik_gradient(pv, data);
    grad = -coords.to_unconstrained(z, lg.gradient);
    return -lg.loglik;
  }
};

struct MinimizeResult {
  Eigen::VectorXd z;
  double value = 0.0;
  Eigen::VectorXd gradient;
  int iterations = 0;
  bool converged = false;
};

double free_gradient_norm(const Eigen::VectorXd& z, const Eigen::VectorXd& g,
                          std::optional<Eigen::Index> bounded, double floor) {
  Eigen::VectorXd gg = g;
  // at the lower bound only an inward-pointing descent counts
  if (bounded && z[*bounded] <= floor + 1e-12 && gg[*bounded] > 0.0) gg[*bounded] = 0.0;
  return gg.norm();
}

// BFGS with backtracking Armijo search. One coordinate may carry a lower
// bound (log tau00); steps are clamped onto it and the direction is
// projected while it is active.
MinimizeResult minimize_bfgs(const Objective& f, Eigen::VectorXd z, const FitOptions& options,
                             std::optional<Eigen::Index> bounded, double floor) {
  const auto n = z.size();
  MinimizeResult res;
  Eigen::VectorXd g;
  double fz = f(z, g);
  if (!std::isfinite(fz) || !g.allFinite()) throw FitError("likelihood is not finite at the starting values");

  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n);
  bool scaled = false;
  int failures = 0;
  for (res.iterations = 0; res.iterations < options.max_iter; ++res.iterations) {
    if (free_gradient_norm(z, g, bounded, floor) <= 1e-3 * options.gradient_tol) {
      res.converged = true;
      break;
    }
    Eigen::VectorXd d = -H * g;
    if (bounded && z[*bounded] <= floor + 1e-12 && d[*bounded] < 0.0) d[*bounded] = 0.0;
    double slope = g.dot(d);
    if (!(slope < 0.0)) {
      H.setIdentity();
      d = -g;
      if (bounded && z[*bounded] <= floor + 1e-12 && d[*bounded] < 0.0) d[*bounded] = 0.0;
      slope = g.dot(d);
      if (!(slope < 0.0)) {
        res.converged = true;  // only the bound blocks descent
        break;
      }
    }
    double step = 1.0;
    if (!scaled) step = std::min(1.0, 1.0 / d.norm());

    const double noise = 1e-13 * std::max(1.0, std::fabs(fz));
    Eigen::VectorXd z_new, g_new;
    double f_new = fz;
    bool accepted = false;
    for (int ls = 0; ls < 50; ++ls) {
      z_new = z + step * d;
      if (bounded) z_new[*bounded] = std::max(z_new[*bounded], floor);
      f_new = f(z_new, g_new);
      if (std::isfinite(f_new) && g_new.allFinite() &&
          f_new <= fz + 1e-4 * step * slope + noise) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (free_gradient_norm(z, g, bounded, floor) <= options.gradient_tol) {
        res.converged = true;
        break;
      }
      if (++failures > 2) break;
      H.setIdentity();
      scaled = false;
      continue;
    }

    const Eigen::VectorXd s = z_new - z;
    const Eigen::VectorXd y = g_new - g;
    const double rel_change = std::fabs(f_new - fz) / std::max(1.0, std::fabs(fz));
    z = z_new;
    fz = f_new;
    g = g_new;

    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (!scaled) {
        H *= sy / y.dot(y);
        scaled = true;
      }
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
      H = (I - rho * s * y.transpose()) * H * (I - rho * y * s.transpose()) + rho * s * s.transpose();
    }
    if (rel_change <= options.tol && free_gradient_norm(z, g, bounded, floor) <= options.gradient_tol) {
      res.converged = true;
      ++res.iterations;
      break;
    }
  }
  res.z = z;
  res.value = fz;
  res.gradient = g;
  return res;
}

// Hessian of the negative log-likelihood by central differences of the
// analytic gradient.
Eigen::MatrixXd numeric_hessian(const Objective& f, const Eigen::VectorXd& z) {
  const auto n = z.size();
  Eigen::MatrixXd H(n, n);
  Eigen::VectorXd gp, gm;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double h = 1e-4 * std::max(1.0, std::fabs(z[i]));
    Eigen::VectorXd zp = z, zm = z;
    zp[i] += h;
    zm[i] -= h;
    f(zp, gp);
    f(zm, gm);
    H.col(i) = (gp - gm) / (2.0 * h);
  }
  return 0.5 * (H + H.transpose());
}

std::vector<double> start_thresholds(const ModelData& data) {
  const auto counts = data.level_counts();
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  std::vector<double> th;
  double cum = 0.0;
  for (std::size_t k = 0; k + 1 < counts.size(); ++k) {
    cum += counts[k];
    const double q = cum / total;
    th.push_back(std::log(q / (1.0 - q)));
  }
  return th;
}

void require_all_levels(const ModelData& data) {
  const auto counts = data.level_counts();
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (!(counts[k] > 0.0)) {
      throw FitError("response level " + std::to_string(k + 1) +
                     " is never observed; thresholds are not identifiable");
    }
  }
}

FitResult assemble(const ModelData& data, const Objective& f, MinimizeResult mr,
                   const FitOptions& options, std::optional<Eigen::Index> bounded,
                   double floor) {
  // Newton polishing on the numeric Hessian; also yields the information.
  // A run stopped by the iteration cap is reported as it stands.
  Eigen::MatrixXd H = numeric_hessian(f, mr.z);
  const int polish_steps = mr.iterations >= options.max_iter ? 0 : 5;
  for (int polish = 0; polish < polish_steps; ++polish) {
    if (free_gradient_norm(mr.z, mr.gradient, bounded, floor) <= 1e-2 * options.gradient_tol) break;
    if (bounded && mr.z[*bounded] <= floor + 1e-12) break;
    Eigen::LLT<Eigen::MatrixXd> llt(H);
    if (llt.info() != Eigen::Success) break;
    const Eigen::VectorXd z_new = mr.z - llt.solve(mr.gradient);
    Eigen::VectorXd g_new;
    const double f_new = f(z_new, g_new);
    if (!std::isfinite(f_new) || f_new > mr.value + 1e-9 * std::max(1.0, std::fabs(mr.value)) ||
        g_new.norm() >= mr.gradient.norm()) {
      break;
    }
    mr.z = z_new;
    mr.value = f_new;
    mr.gradient = g_new;
    H = numeric_hessian(f, mr.z);
  }

  FitResult res;
  res.estimates = f.coords.unpack(mr.z);
  res.minus2ll = 2.0 * mr.value;
  res.iterations = mr.iterations;
  res.gradient_norm = free_gradient_norm(mr.z, mr.gradient, bounded, floor);
  res.converged = mr.converged || res.gradient_norm <= options.gradient_tol;
  res.clusters = static_cast<int>(data.clusters().size());
  for (const auto& cl : data.clusters()) res.observations += cl.observations();

  const auto n = mr.z.size();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  res.boundary = f.coords.has_tau && res.estimates.tau00 <= 100.0 * kTauFloor;

  // Reported layout always includes tau00 as the last entry.
  const auto reported = static_cast<Eigen::Index>(res.estimates.size());
  res.covariance = Eigen::MatrixXd::Constant(reported, reported, nan);
  const Eigen::Index free = res.boundary || !f.coords.has_tau ? (f.coords.has_tau ? n - 1 : n) : n;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(H.topLeftCorner(free, free));
  res.information_positive_definite =
      ldlt.info() == Eigen::Success && ldlt.isPositive() && (ldlt.vectorD().array() > 0.0).all();
  if (res.information_positive_definite) {
    const Eigen::MatrixXd inv = ldlt.solve(Eigen::MatrixXd::Identity(free, free));
    const Eigen::MatrixXd J = f.coords.jacobian(mr.z).topLeftCorner(free, free);
    res.covariance.topLeftCorner(free, free) = J * inv * J.transpose();
  }
  auto se = [&](Eigen::Index i) {
    const double v = res.covariance(i, i);
    return v > 0.0 ? std::sqrt(v) : nan;
  };
  res.standard_errors.thresholds.resize(res.estimates.thresholds.size());
  res.standard_errors.slopes.resize(res.estimates.slopes.size());
  Eigen::Index i = 0;
  for (auto& v : res.standard_errors.thresholds) v = se(i++);
  for (auto& v : res.standard_errors.slopes) v = se(i++);
  res.standard_errors.tau00 = se(i);
  return res;
}

}  // namespace

FitResult fit_fixed_effects(const ModelData& data, const FitOptions& options) {
  require_all_levels(data);
  const Coordinates coords{static_cast<std::size_t>(data.levels() - 1), data.covariates(), false};
  ParamVector start;
  if (options.init) {
    start = *options.init;
    start.tau00 = 0.0;
  } else {
    start.thresholds = start_thresholds(data);
    start.slopes.assign(data.covariates(), 0.0);
  }
  start.validate();
  if (start.thresholds.size() != coords.thresholds || start.slopes.size() != coords.slopes) {
    throw FitError("initial values do not match the model dimensions");
  }
  const Objective f{data, coords, options.threads};
  auto mr = minimize_bfgs(f, coords.pack(start), options, std::nullopt, 0.0);
  FitResult res = assemble(data, f, std::move(mr), options, std::nullopt, 0.0);
  res.spec = ModelSpec{"", data.levels(), data.covariate_names()};
  return res;
}

FitResult fit(const ModelData& data, const FitOptions& options) {
  require_all_levels(data);
  const Coordinates coords{static_cast<std::size_t>(data.levels() - 1), data.covariates(), true};
  ParamVector start;
  if (options.init) {
    start = *options.init;
  } else {
    FitOptions fe_options = options;
    fe_options.init.reset();
    const FitResult fe = fit_fixed_effects(data, fe_options);
    start = fe.estimates;
    start.tau00 = 0.1;
  }
  start.validate();
  if (start.thresholds.size() != coords.thresholds || start.slopes.size() != coords.slopes) {
    throw FitError("initial values do not match the model dimensions");
  }
  start.tau00 = std::max(start.tau00, kTauFloor);

  const Objective f{data, coords, options.threads};
  const auto tau_index = static_cast<Eigen::Index>(coords.size() - 1);
  const double floor = std::log(kTauFloor);
  auto mr = minimize_bfgs(f, coords.pack(start), options, tau_index, floor);
  FitResult res = assemble(data, f, std::move(mr), options, tau_index, floor);
  res.spec = ModelSpec{"", data.levels(), data.covariate_names()};
  return res;
}

FitResult fit(const ModelSpec& spec, const EncodedDataset& data, const FitOptions& options) {
  const ModelData md = ModelData::from(data, spec);
  FitResult res = fit(md, options);
  res.spec = spec;
  return res;
}

}  // namespace ordmlm
