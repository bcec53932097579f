#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ordmlm/crosstab.hpp"
#include "ordmlm/data_model.hpp"
#include "ordmlm/distributions.hpp"
#include "ordmlm/error.hpp"
#include "ordmlm/glmm.hpp"
#include "ordmlm/inference.hpp"
#include "ordmlm/simulate.hpp"

namespace py = pybind11;
using namespace ordmlm;

namespace {

ParamVector params_of(std::vector<double> thresholds, std::vector<double> slopes, double tau00) {
  ParamVector p{std::move(thresholds), std::move(slopes), tau00};
  p.validate();
  return p;
}

py::dict fit_to_dict(const FitResult& f) {
  py::dict d;
  d["names"] = f.parameter_names();
  d["thresholds"] = f.estimates.thresholds;
  d["slopes"] = f.estimates.slopes;
  d["tau00"] = f.estimates.tau00;
  d["se_thresholds"] = f.standard_errors.thresholds;
  d["se_slopes"] = f.standard_errors.slopes;
  d["se_tau00"] = f.standard_errors.tau00;
  d["minus2ll"] = f.minus2ll;
  d["converged"] = f.converged;
  d["iterations"] = f.iterations;
  d["boundary"] = f.boundary;
  return d;
}

// design rows are per-observation score vectors; covariate labels are the
// scores themselves
EncodedDataset dataset_of(const std::vector<int>& responses, const std::vector<int>& cluster_index,
                          const std::vector<std::vector<double>>& design, int levels,
                          const std::vector<std::string>& covariates) {
  if (design.size() != responses.size()) throw DataError("design needs one row per response");
  std::vector<double> flat;
  int max_score = 0;
  for (const auto& row : design) {
    if (row.size() != covariates.size()) throw DataError("design row width differs from covariate count");
    for (double v : row) {
      if (v < 0 || v != static_cast<int>(v)) throw DataError("scores must be non-negative integers");
      max_score = std::max(max_score, static_cast<int>(v));
    }
    flat.insert(flat.end(), row.begin(), row.end());
  }
  std::vector<CovariateScheme> schemes;
  for (const auto& name : covariates) {
    CovariateScheme s{name, {}};
    for (int k = 0; k <= max_score; ++k) s.categories.push_back(std::to_string(k));
    schemes.push_back(std::move(s));
  }
  int clusters = 0;
  for (int j : cluster_index) clusters = std::max(clusters, j + 1);
  std::vector<std::string> labels;
  for (int j = 0; j < clusters; ++j) labels.push_back(std::to_string(j));
  return EncodedDataset(responses, std::move(flat), cluster_index, std::move(labels), std::move(schemes), levels);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Two-level random-intercept ordinal logistic models";

  // translators run newest first, so the subclass is registered last
  auto& error = py::register_exception<Error>(m, "Error", PyExc_ValueError);
  py::register_exception<ConvergenceError>(m, "ConvergenceError", error.ptr());

  m.def("classify_hemoglobin", [](double hb) { return static_cast<int>(classify_hemoglobin(hb)); },
        py::arg("hemoglobin"));
  m.def("anemia_label", [](int code) { return std::string(anemia_label(code)); }, py::arg("code"));

  m.def("cumulative_pp", &cumulative_pp, py::arg("eta"));
  m.def("icc", &icc, py::arg("tau00"));
  m.def("chi_square_sf", &chi_square_sf, py::arg("x"), py::arg("df"));
  m.def(
      "lrt",
      [](double reduced, double full, int df) {
        const auto r = lrt(reduced, full, df);
        return py::make_tuple(r.chi2, r.df, r.p_value);
      },
      py::arg("dev_reduced"), py::arg("dev_full"), py::arg("df"));
  m.def(
      "odds_ratio",
      [](double beta, double se, double level) {
        const auto r = odds_ratio(beta, se, level);
        return py::make_tuple(r.odds_ratio, r.ci_low, r.ci_high);
      },
      py::arg("beta"), py::arg("se"), py::arg("level") = 0.95);
  m.def(
      "wald_t_test",
      [](double estimate, double se, int df) {
        const auto w = wald_t_test(estimate, se, df);
        return py::make_tuple(w.t, w.p_value, w.ci_low, w.ci_high);
      },
      py::arg("estimate"), py::arg("se"), py::arg("df"));
  m.def(
      "chi_square_test",
      [](std::vector<std::vector<std::int64_t>> counts) {
        std::vector<std::string> rows, cols;
        for (std::size_t i = 0; i < counts.size(); ++i) rows.push_back(std::to_string(i));
        for (std::size_t k = 0; k < (counts.empty() ? 0 : counts[0].size()); ++k) cols.push_back(std::to_string(k));
        const auto r = chi_square_independence(ContingencyTable(rows, cols, std::move(counts)));
        py::dict d;
        d["statistic"] = r.statistic;
        d["df"] = r.df;
        d["p_value"] = r.p_value;
        d["min_expected"] = r.min_expected_cell;
        return d;
      },
      py::arg("counts"));

  m.def(
      "category_probs",
      [](std::vector<double> thresholds, std::vector<double> slopes, std::vector<double> x, double u) {
        return category_probs(params_of(std::move(thresholds), std::move(slopes), 0.0), x, u);
      },
      py::arg("thresholds"), py::arg("slopes"), py::arg("x"), py::arg("u") = 0.0);

  m.def(
      "simulate",
      [](std::vector<double> thresholds, std::vector<double> slopes, std::vector<std::string> covariates,
         double tau00, int clusters, int cluster_size, std::uint64_t seed) {
        SimConfig cfg;
        cfg.truth = ParamVector{std::move(thresholds), std::move(slopes), tau00};
        cfg.covariates = default_covariate_generators(covariates);
        cfg.clusters = clusters;
        cfg.cluster_sizes = {cluster_size};
        cfg.seed = seed;
        cfg.validate();
        const auto out = generate(cfg);
        std::vector<std::vector<double>> design;
        for (std::size_t i = 0; i < out.data.size(); ++i) {
          const auto row = out.data.row(i);
          design.emplace_back(row.begin(), row.end());
        }
        py::dict d;
        d["responses"] = std::vector<int>(out.data.responses().begin(), out.data.responses().end());
        d["cluster_index"] = std::vector<int>(out.data.cluster_index().begin(), out.data.cluster_index().end());
        d["design"] = design;
        d["random_effects"] = out.random_effects;
        return d;
      },
      py::arg("thresholds"), py::arg("slopes"), py::arg("covariates"), py::arg("tau00"), py::arg("clusters"),
      py::arg("cluster_size"), py::arg("seed") = 1);

  m.def(
      "fit",
      [](const std::vector<int>& responses, const std::vector<int>& cluster_index,
         const std::vector<std::vector<double>>& design, int levels, const std::vector<std::string>& covariates,
         double tol, int max_iter) {
        const auto data = dataset_of(responses, cluster_index, design, levels, covariates);
        FitOptions opts;
        opts.tol = tol;
        opts.max_iter = max_iter;
        FitResult f;
        {
          py::gil_scoped_release release;
          f = fit(ModelSpec{"model", levels, covariates}, data, opts);
        }
        return fit_to_dict(f);
      },
      py::arg("responses"), py::arg("cluster_index"), py::arg("design"), py::arg("levels"),
      py::arg("covariates"), py::arg("tol") = 1e-8, py::arg("max_iter") = 500);
}
