#include "ordmlm/report.hpp"

#include <algorithm>
#include <cmath>

#include "ordmlm/error.hpp"
#include "ordmlm/table_format.hpp"

namespace ordmlm {

namespace {

std::string estimate_with_se(double est, double se, int digits) {
  std::string s = format_fixed(est, digits);
  if (std::isfinite(se)) s += " (" + format_fixed(se, 2) + ")";
  return s;
}

std::vector<double> flat(const ParamVector& pv) {
  std::vector<double> v = pv.thresholds;
  v.insert(v.end(), pv.slopes.begin(), pv.slopes.end());
  v.push_back(pv.tau00);
  return v;
}

}  // namespace

std::string level_title(int level, int levels) {
  static const char* const kTitles[] = {"Severely anemic", "Moderately anemic", "Mildly anemic",
                                        "Non-anemic"};
  if (levels == 4 && level >= 1 && level <= 4) return kTitles[level - 1];
  return "Level " + std::to_string(level);
}

std::string fit_csv(const FitResult& fit) {
  CsvTable csv({{"parameter", "string"}, {"estimate", "real"}, {"se", "real"}});
  const auto names = fit.parameter_names();
  const auto est = flat(fit.estimates);
  const auto se = flat(fit.standard_errors);
  for (std::size_t i = 0; i < names.size(); ++i) {
    csv.add_row({names[i], csv_real(est[i]), csv_real(se[i])});
  }
  return csv.str();
}

std::string fit_text(const FitResult& fit) {
  const auto names = fit.parameter_names();
  const auto est = flat(fit.estimates);
  const auto se = flat(fit.standard_errors);
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < names.size(); ++i) {
    rows.push_back({names[i], format_fixed(est[i], 4), format_fixed(se[i], 4)});
  }
  std::string out = fit.spec.name.empty() ? std::string() : fit.spec.name + "\n";
  out += aligned_text({"Parameter", "Estimate", "SE"}, rows);
  out += "-2LL = " + format_fixed(fit.minus2ll, 2) + "\n";
  out += "clusters = " + std::to_string(fit.clusters) +
         ", observations = " + format_fixed(fit.observations, 0) + "\n";
  out += std::string("converged = ") + (fit.converged ? "yes" : "no") +
         ", iterations = " + std::to_string(fit.iterations) +
         ", gradient norm = " + format_sci(fit.gradient_norm) + "\n";
  if (fit.boundary) out += "note: random-intercept variance is at its lower bound\n";
  if (!fit.information_positive_definite) out += "note: observed information is not positive definite\n";
  return out;
}

std::string models_text(const std::vector<FitResult>& fits) {
  if (fits.empty()) return {};
  std::vector<std::string> header{""};
  for (const auto& f : fits) header.push_back(f.spec.name);

  const std::size_t nt = fits.front().estimates.thresholds.size();
  const int levels = static_cast<int>(nt) + 1;
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"Fixed effects"});
  for (std::size_t k = 0; k < nt; ++k) {
    std::vector<std::string> row{"Intercept " + std::to_string(k + 1) + " (" +
                                 level_title(static_cast<int>(k) + 1, levels) + ")"};
    for (const auto& f : fits) {
      row.push_back(estimate_with_se(f.estimates.thresholds[k], f.standard_errors.thresholds[k], 2));
    }
    rows.push_back(std::move(row));
  }
  std::vector<std::string> covariates;
  for (const auto& f : fits) {
    for (const auto& c : f.spec.covariates) {
      if (std::find(covariates.begin(), covariates.end(), c) == covariates.end()) covariates.push_back(c);
    }
  }
  for (const auto& c : covariates) {
    std::vector<std::string> row{c};
    for (const auto& f : fits) {
      auto it = std::find(f.spec.covariates.begin(), f.spec.covariates.end(), c);
      if (it == f.spec.covariates.end()) {
        row.emplace_back("");
      } else {
        const auto i = static_cast<std::size_t>(it - f.spec.covariates.begin());
        row.push_back(estimate_with_se(f.estimates.slopes[i], f.standard_errors.slopes[i], 2));
      }
    }
    rows.push_back(std::move(row));
  }
  rows.push_back({"Error variance"});
  {
    std::vector<std::string> row{"Intercept"};
    for (const auto& f : fits) row.push_back(estimate_with_se(f.estimates.tau00, f.standard_errors.tau00, 4));
    rows.push_back(std::move(row));
  }
  rows.push_back({"Model fit"});
  {
    std::vector<std::string> row{"-2LL"};
    for (std::size_t m = 0; m < fits.size(); ++m) {
      std::string cell = format_fixed(fits[m].minus2ll, 2);
      if (m > 0) {
        const int df = static_cast<int>(fits[m].estimates.size() - fits[m - 1].estimates.size());
        const double diff = fits[m - 1].minus2ll - fits[m].minus2ll;
        if (df >= 1 && diff >= 0.0) {
          const auto t = lrt(fits[m - 1].minus2ll, fits[m].minus2ll, df);
          cell += t.p_value < 1e-4 ? " (p<.0001)" : " (p=" + format_p(t.p_value) + ")";
        }
      }
      row.push_back(std::move(cell));
    }
    rows.push_back(std::move(row));
  }
  return aligned_text(header, rows) + "Entries are estimates with standard errors in parentheses.\n";
}

std::string models_csv(const std::vector<FitResult>& fits) {
  CsvTable csv({{"model", "string"}, {"parameter", "string"}, {"estimate", "real"}, {"se", "real"}});
  for (const auto& f : fits) {
    const auto names = f.parameter_names();
    const auto est = flat(f.estimates);
    const auto se = flat(f.standard_errors);
    for (std::size_t i = 0; i < names.size(); ++i) {
      csv.add_row({f.spec.name, names[i], csv_real(est[i]), csv_real(se[i])});
    }
    csv.add_row({f.spec.name, "minus2ll", csv_real(f.minus2ll), "NA"});
  }
  return csv.str();
}

std::string lrt_csv(const std::vector<std::string>& names, const std::vector<double>& deviances,
                    const std::vector<int>& dfs) {
  if (names.size() != deviances.size() || dfs.size() + 1 != deviances.size()) {
    throw DomainError("LRT table needs one df per step");
  }
  CsvTable csv({{"model", "string"}, {"minus2ll", "real"}, {"chi2", "real"}, {"df", "int"}, {"p_value", "real"}});
  for (std::size_t m = 0; m < names.size(); ++m) {
    if (m == 0) {
      csv.add_row({names[m], csv_real(deviances[m]), "NA", "NA", "NA"});
    } else {
      const auto t = lrt(deviances[m - 1], deviances[m], dfs[m - 1]);
      csv.add_row({names[m], csv_real(deviances[m]), csv_real(t.chi2), std::to_string(t.df), csv_real(t.p_value)});
    }
  }
  return csv.str();
}

std::string lrt_text(const std::vector<std::string>& names, const std::vector<double>& deviances,
                     const std::vector<int>& dfs) {
  if (names.size() != deviances.size() || dfs.size() + 1 != deviances.size()) {
    throw DomainError("LRT table needs one df per step");
  }
  std::vector<std::vector<std::string>> rows;
  for (std::size_t m = 0; m < names.size(); ++m) {
    if (m == 0) {
      rows.push_back({names[m], format_fixed(deviances[m], 2), "", "", ""});
    } else {
      const auto t = lrt(deviances[m - 1], deviances[m], dfs[m - 1]);
      rows.push_back({names[m], format_fixed(deviances[m], 2), format_fixed(t.chi2, 2),
                      std::to_string(t.df), format_p(t.p_value)});
    }
  }
  return aligned_text({"Model", "-2LL", "Chi-square", "DF", "p"}, rows);
}

std::string wald_csv(const std::string& model, const std::vector<WaldTest>& tests, int df) {
  CsvTable csv({{"model", "string"}, {"parameter", "string"}, {"estimate", "real"}, {"se", "real"},
                {"df", "int"}, {"t", "real"}, {"p_value", "real"}, {"ci_low", "real"}, {"ci_high", "real"}});
  for (const auto& w : tests) {
    csv.add_row({model, w.name, csv_real(w.estimate), csv_real(w.se), std::to_string(df), csv_real(w.t),
                 csv_real(w.p_value), csv_real(w.ci_low), csv_real(w.ci_high)});
  }
  return csv.str();
}

std::string wald_text(const std::string& model, const std::vector<WaldTest>& tests, int df) {
  std::vector<std::vector<std::string>> rows;
  const int levels = static_cast<int>(tests.size()) + 1;
  for (std::size_t k = 0; k < tests.size(); ++k) {
    const auto& w = tests[k];
    rows.push_back({level_title(static_cast<int>(k) + 1, levels), format_fixed(w.estimate, 4),
                    format_fixed(w.se, 4), std::to_string(df), format_fixed(w.t, 2), format_p(w.p_value),
                    "0.05", format_fixed(w.ci_low, 4), format_fixed(w.ci_high, 4)});
  }
  return model + "\n" +
         aligned_text({"Intercept", "Estimate", "SE", "DF", "t", "Pr > |t|", "Alpha", "Lower", "Upper"}, rows);
}

std::string odds_ratio_csv(const FitResult& fit, double level) {
  CsvTable csv({{"covariate", "string"}, {"beta", "real"}, {"se", "real"}, {"odds_ratio", "real"},
                {"ci_low", "real"}, {"ci_high", "real"}, {"level", "real"}});
  for (std::size_t c = 0; c < fit.spec.covariates.size(); ++c) {
    const double b = fit.estimates.slopes[c];
    const double se = fit.standard_errors.slopes[c];
    if (std::isfinite(se) && se > 0.0) {
      const auto o = odds_ratio(b, se, level);
      csv.add_row({fit.spec.covariates[c], csv_real(b), csv_real(se), csv_real(o.odds_ratio),
                   csv_real(o.ci_low), csv_real(o.ci_high), csv_real(level)});
    } else {
      csv.add_row({fit.spec.covariates[c], csv_real(b), "NA", csv_real(std::exp(b)), "NA", "NA", csv_real(level)});
    }
  }
  return csv.str();
}

std::string odds_ratio_text(const FitResult& fit, double level) {
  std::vector<std::vector<std::string>> rows;
  for (std::size_t c = 0; c < fit.spec.covariates.size(); ++c) {
    const double b = fit.estimates.slopes[c];
    const double se = fit.standard_errors.slopes[c];
    if (std::isfinite(se) && se > 0.0) {
      const auto o = odds_ratio(b, se, level);
      rows.push_back({fit.spec.covariates[c], format_fixed(b, 2), format_fixed(o.odds_ratio, 2),
                      format_fixed(o.ci_low, 2) + ", " + format_fixed(o.ci_high, 2)});
    } else {
      rows.push_back({fit.spec.covariates[c], format_fixed(b, 2), format_fixed(std::exp(b), 2), "NA"});
    }
  }
  const std::string ci = format_fixed(100.0 * level, 0) + "% CI";
  return aligned_text({"Covariate", "Estimate", "OR", ci}, rows);
}

ProfileTable profile_table(const FitResult& fit, std::size_t covariate,
                           const std::vector<std::string>& categories) {
  if (covariate >= fit.spec.covariates.size()) throw DomainError("profile covariate out of range");
  ProfileTable t;
  t.covariate = fit.spec.covariates[covariate];
  t.categories = categories;
  std::vector<double> x(fit.spec.covariates.size(), 0.0);
  for (std::size_t s = 0; s < categories.size(); ++s) {
    x[covariate] = static_cast<double>(s);
    t.profiles.push_back(profile_probabilities(fit, x));
  }
  return t;
}

std::string profile_csv(const ProfileTable& table) {
  CsvTable csv({{"covariate", "string"}, {"category", "string"}, {"score", "int"}, {"level", "int"},
                {"cumulative", "real"}, {"probability", "real"}});
  for (std::size_t s = 0; s < table.profiles.size(); ++s) {
    const auto& p = table.profiles[s];
    for (std::size_t k = 0; k < p.categories.size(); ++k) {
      const double cum = k < p.cumulative.size() ? p.cumulative[k] : 1.0;
      csv.add_row({table.covariate, table.categories[s], std::to_string(s), std::to_string(k + 1),
                   csv_real(cum), csv_real(p.categories[k])});
    }
  }
  return csv.str();
}

std::string profile_text(const ProfileTable& table) {
  std::vector<std::string> header{"Anemia level"};
  for (const auto& c : table.categories) header.push_back(c);
  std::vector<std::vector<std::string>> rows;
  if (!table.profiles.empty()) {
    const std::size_t K = table.profiles.front().categories.size();
    for (std::size_t k = 0; k < K; ++k) {
      std::vector<std::string> row{level_title(static_cast<int>(k) + 1, static_cast<int>(K))};
      for (const auto& p : table.profiles) row.push_back(format_fixed(p.categories[k], 4));
      rows.push_back(std::move(row));
    }
  }
  return "Predicted probability by " + table.covariate + "\n" + aligned_text(header, rows);
}

}  // namespace ordmlm
