#include "ordmlm/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <set>
#include <sstream>

#include "ordmlm/error.hpp"
#include "ordmlm/inference.hpp"
#include "ordmlm/numeric.hpp"
#include "ordmlm/report.hpp"
#include "ordmlm/table_format.hpp"

#ifndef ORDMLM_VERSION
#define ORDMLM_VERSION "0.0.0"
#endif

namespace ordmlm {

using nlohmann::json;

std::vector<ModelSpec> default_ladder() {
  std::vector<ModelSpec> ladder;
  ModelSpec m{"Model 1", kAnemiaLevels, {}};
  ladder.push_back(m);
  m.name = "Model 2";
  m.covariates = {"age_at_marriage", "children_ever_born"};
  ladder.push_back(m);
  m.name = "Model 3";
  m.covariates.push_back("age_of_child");
  ladder.push_back(m);
  m.name = "Model 4";
  m.covariates.insert(m.covariates.end(), {"religion", "literacy_of_mother"});
  ladder.push_back(m);
  m.name = "Model 5";
  m.covariates.insert(m.covariates.end(), {"living_standard", "place_of_residence", "sex_of_child"});
  ladder.push_back(m);
  return ladder;
}

AnalysisConfig AnalysisConfig::defaults() {
  AnalysisConfig cfg;
  cfg.schemes = default_covariate_schemes();
  cfg.columns = ColumnMapping::identity(cfg.schemes);
  cfg.ladder = default_ladder();
  return cfg;
}

void AnalysisConfig::validate() const {
  if (input.empty()) throw ConfigError("input path is empty");
  if (output_dir.empty()) throw ConfigError("output directory is empty");
  if ((columns.hemoglobin.empty() && columns.response.empty()) || columns.cluster.empty()) {
    throw ConfigError("response and cluster column names are required");
  }
  if (!(fit.tol > 0.0)) throw ConfigError("tol must be > 0");
  if (fit.max_iter < 1) throw ConfigError("max_iter must be >= 1");
  if (!(fit.gradient_tol > 0.0)) throw ConfigError("gradient_tol must be > 0");
  if (nodes < 1 || nodes > 199 || nodes % 2 == 0) throw ConfigError("nodes must be odd and in [1, 199]");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must be in (0, 1)");
  if (wald_df < 0) throw ConfigError("wald_df must be >= 0");
  if (levels < 2) throw ConfigError("levels must be >= 2");
  if (levels != kAnemiaLevels && columns.response.empty()) {
    throw ConfigError("levels other than 4 need a response column");
  }

  std::set<std::string> known;
  for (const auto& s : schemes) {
    if (s.categories.empty()) throw ConfigError("covariate " + s.name + " has no categories");
    if (!known.insert(s.name).second) throw ConfigError("covariate " + s.name + " is defined twice");
  }
  if (ladder.empty()) throw ConfigError("model ladder is empty");
  std::set<std::string> names;
  for (std::size_t m = 0; m < ladder.size(); ++m) {
    const auto& spec = ladder[m];
    if (spec.name.empty()) throw ConfigError("model " + std::to_string(m + 1) + " has no name");
    if (!names.insert(spec.name).second) throw ConfigError("duplicate model name " + spec.name);
    if (spec.levels != levels) throw ConfigError("model " + spec.name + " disagrees on the number of levels");
    std::set<std::string> covs;
    for (const auto& c : spec.covariates) {
      if (!known.count(c)) throw ConfigError("model " + spec.name + " uses unknown covariate " + c);
      if (!columns.covariates.count(c)) throw ConfigError("covariate " + c + " has no input column");
      if (!covs.insert(c).second) throw ConfigError("model " + spec.name + " lists " + c + " twice");
    }
    if (m > 0) {
      const auto& prev = ladder[m - 1].covariates;
      for (const auto& c : prev) {
        if (!covs.count(c)) {
          throw ConfigError("model ladder is not nested: " + spec.name + " drops " + c);
        }
      }
      if (covs.size() <= prev.size()) {
        throw ConfigError("model ladder is not strictly nested at " + spec.name);
      }
    }
  }
}

namespace {

double json_real(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

json real_json(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json reals_json(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(real_json(x));
  return a;
}

std::vector<double> json_reals(const json& j) {
  std::vector<double> v;
  for (const auto& x : j) v.push_back(json_real(x));
  return v;
}

json config_json(const AnalysisConfig& cfg) {
  json j;
  j["input"] = cfg.input;
  j["output_dir"] = cfg.output_dir;
  j["columns"]["hemoglobin"] = cfg.columns.hemoglobin;
  j["columns"]["cluster"] = cfg.columns.cluster;
  j["columns"]["response"] = cfg.columns.response;
  j["levels"] = cfg.levels;
  j["columns"]["covariates"] = cfg.columns.covariates;
  j["schemes"] = json::array();
  for (const auto& s : cfg.schemes) j["schemes"].push_back({{"name", s.name}, {"categories", s.categories}});
  j["ladder"] = json::array();
  for (const auto& m : cfg.ladder) j["ladder"].push_back({{"name", m.name}, {"covariates", m.covariates}});
  j["fit"] = {{"tol", cfg.fit.tol},
              {"max_iter", cfg.fit.max_iter},
              {"gradient_tol", cfg.fit.gradient_tol},
              {"threads", cfg.fit.threads}};
  j["nodes"] = cfg.nodes;
  j["seed"] = cfg.seed;
  j["alpha"] = cfg.alpha;
  j["wald_df"] = cfg.wald_df;
  return j;
}

AnalysisConfig config_from(const json& j) {
  AnalysisConfig cfg = AnalysisConfig::defaults();
  if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
  cfg.input = j.value("input", cfg.input);
  cfg.output_dir = j.value("output_dir", cfg.output_dir);
  if (j.contains("schemes")) {
    cfg.schemes.clear();
    for (const auto& s : j.at("schemes")) {
      cfg.schemes.push_back({s.at("name").get<std::string>(), s.at("categories").get<std::vector<std::string>>()});
    }
    cfg.columns.covariates = ColumnMapping::identity(cfg.schemes).covariates;
  }
  if (j.contains("columns")) {
    const auto& c = j.at("columns");
    cfg.columns.hemoglobin = c.value("hemoglobin", cfg.columns.hemoglobin);
    cfg.columns.cluster = c.value("cluster", cfg.columns.cluster);
    cfg.columns.response = c.value("response", cfg.columns.response);
    if (c.contains("covariates")) {
      for (const auto& [name, column] : c.at("covariates").items()) {
        cfg.columns.covariates[name] = column.get<std::string>();
      }
    }
  }
  cfg.levels = j.value("levels", cfg.levels);
  if (j.contains("ladder")) {
    cfg.ladder.clear();
    for (const auto& m : j.at("ladder")) {
      cfg.ladder.push_back({m.at("name").get<std::string>(), cfg.levels,
                            m.value("covariates", std::vector<std::string>{})});
    }
  } else {
    for (auto& m : cfg.ladder) m.levels = cfg.levels;
  }
  if (j.contains("fit")) {
    const auto& f = j.at("fit");
    cfg.fit.tol = f.value("tol", cfg.fit.tol);
    cfg.fit.max_iter = f.value("max_iter", cfg.fit.max_iter);
    cfg.fit.gradient_tol = f.value("gradient_tol", cfg.fit.gradient_tol);
    cfg.fit.threads = f.value("threads", cfg.fit.threads);
  }
  cfg.nodes = j.value("nodes", cfg.nodes);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.alpha = j.value("alpha", cfg.alpha);
  cfg.wald_df = j.value("wald_df", cfg.wald_df);
  return cfg;
}

json fit_json(const FitResult& f) {
  json j;
  j["name"] = f.spec.name;
  j["covariates"] = f.spec.covariates;
  j["levels"] = f.spec.levels;
  j["thresholds"] = reals_json(f.estimates.thresholds);
  j["slopes"] = reals_json(f.estimates.slopes);
  j["tau00"] = real_json(f.estimates.tau00);
  j["se_thresholds"] = reals_json(f.standard_errors.thresholds);
  j["se_slopes"] = reals_json(f.standard_errors.slopes);
  j["se_tau00"] = real_json(f.standard_errors.tau00);
  j["covariance"] = json::array();
  for (Eigen::Index r = 0; r < f.covariance.rows(); ++r) {
    std::vector<double> row(static_cast<std::size_t>(f.covariance.cols()));
    for (Eigen::Index c = 0; c < f.covariance.cols(); ++c) row[static_cast<std::size_t>(c)] = f.covariance(r, c);
    j["covariance"].push_back(reals_json(row));
  }
  j["minus2ll"] = real_json(f.minus2ll);
  j["converged"] = f.converged;
  j["iterations"] = f.iterations;
  j["gradient_norm"] = real_json(f.gradient_norm);
  j["boundary"] = f.boundary;
  j["information_positive_definite"] = f.information_positive_definite;
  j["clusters"] = f.clusters;
  j["observations"] = f.observations;
  return j;
}

FitResult fit_from(const json& j) {
  FitResult f;
  f.spec.name = j.at("name").get<std::string>();
  f.spec.covariates = j.at("covariates").get<std::vector<std::string>>();
  f.spec.levels = j.at("levels").get<int>();
  f.estimates.thresholds = json_reals(j.at("thresholds"));
  f.estimates.slopes = json_reals(j.at("slopes"));
  f.estimates.tau00 = json_real(j.at("tau00"));
  f.standard_errors.thresholds = json_reals(j.at("se_thresholds"));
  f.standard_errors.slopes = json_reals(j.at("se_slopes"));
  f.standard_errors.tau00 = json_real(j.at("se_tau00"));
  const auto& cov = j.at("covariance");
  const auto n = static_cast<Eigen::Index>(cov.size());
  f.covariance.resize(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto row = json_reals(cov.at(static_cast<std::size_t>(r)));
    for (Eigen::Index c = 0; c < n; ++c) f.covariance(r, c) = row.at(static_cast<std::size_t>(c));
  }
  f.minus2ll = json_real(j.at("minus2ll"));
  f.converged = j.at("converged").get<bool>();
  f.iterations = j.at("iterations").get<int>();
  f.gradient_norm = json_real(j.at("gradient_norm"));
  f.boundary = j.at("boundary").get<bool>();
  f.information_positive_definite = j.at("information_positive_definite").get<bool>();
  f.clusters = j.at("clusters").get<int>();
  f.observations = j.at("observations").get<double>();
  return f;
}

json results_json(const RunResults& r) {
  json j;
  j["exclusions"] = {{"total_records", r.exclusions.total_records},
                     {"retained", r.exclusions.retained},
                     {"by_reason", r.exclusions.by_reason}};
  j["clusters"] = r.clusters;
  j["cluster_labels"] = r.cluster_labels;
  j["crosstabs"] = json::array();
  for (const auto& t : r.crosstabs) {
    json e{{"factor", t.factor}, {"note", t.note}};
    if (t.table) {
      e["rows"] = t.table->row_labels();
      e["cols"] = t.table->col_labels();
      e["counts"] = t.table->counts();
    }
    j["crosstabs"].push_back(std::move(e));
  }
  j["fits"] = json::array();
  for (const auto& f : r.fits) j["fits"].push_back(fit_json(f));
  j["quadrature"] = json::array();
  for (const auto& q : r.quadrature) {
    j["quadrature"].push_back({{"model", q.model},
                               {"nodes", q.nodes},
                               {"laplace_minus2ll", real_json(q.laplace_minus2ll)},
                               {"ghq_minus2ll", real_json(q.ghq_minus2ll)}});
  }
  j["complete"] = r.complete;
  j["error"] = r.error;
  return j;
}

std::string slug(std::string_view name) {
  std::string s;
  for (char ch : name) {
    const auto uc = static_cast<unsigned char>(ch);
    if (std::isalnum(uc)) {
      s += static_cast<char>(std::tolower(uc));
    } else if (!s.empty() && s.back() != '_') {
      s += '_';
    }
  }
  while (!s.empty() && s.back() == '_') s.pop_back();
  return s.empty() ? "unnamed" : s;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << content;
  if (!out) throw Error("write failed for " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const CovariateScheme* find_scheme(const AnalysisConfig& cfg, const std::string& name) {
  for (const auto& s : cfg.schemes) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

int wald_df_for(const RunResults& r, const FitResult& f) {
  if (r.config.wald_df > 0) return r.config.wald_df;
  return std::max(1, f.clusters - 1);
}

}  // namespace

AnalysisConfig config_from_json_text(const std::string& text) {
  try {
    return config_from(json::parse(text));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid configuration: ") + e.what());
  }
}

AnalysisConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return config_from_json_text(ss.str());
}

std::string config_to_json_text(const AnalysisConfig& cfg) { return config_json(cfg).dump(2) + "\n"; }

std::vector<LadderRow> ladder_table(const std::vector<FitResult>& fits) {
  std::vector<LadderRow> rows;
  for (std::size_t m = 0; m < fits.size(); ++m) {
    LadderRow row;
    row.model = fits[m].spec.name;
    row.parameters = static_cast<int>(fits[m].estimates.size());
    row.minus2ll = fits[m].minus2ll;
    if (m > 0) {
      row.df = row.parameters - rows[m - 1].parameters;
      const double diff = fits[m - 1].minus2ll - fits[m].minus2ll;
      if (row.df >= 1) {
        row.has_test = true;
        // a tiny negative difference is optimizer noise between nested optima
        const auto t = lrt(fits[m - 1].minus2ll, fits[m - 1].minus2ll - std::max(diff, 0.0), row.df);
        row.chi2 = t.chi2;
        row.p_value = t.p_value;
      }
    }
    rows.push_back(row);
  }
  return rows;
}

std::size_t select_model(const std::vector<LadderRow>& ladder, double alpha) {
  if (ladder.empty()) throw DomainError("empty ladder");
  std::size_t chosen = ladder.size() - 1;
  while (chosen > 0) {
    const auto& step = ladder[chosen];
    if (step.has_test && step.p_value < alpha) break;
    --chosen;
  }
  return chosen;
}

std::vector<std::string> write_reports(const RunResults& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> files;
  auto emit = [&](const std::string& name, const std::string& content) {
    write_file(dir / name, content);
    files.push_back(name);
  };

  std::string excl = r.exclusions.to_text();
  if (!r.complete) excl += "status: partial (" + r.error + ")\n";
  emit("exclusions.txt", excl);

  // cross-tabulations and chi-square screening
  if (!r.crosstabs.empty()) {
    CsvTable summary({{"factor", "string"}, {"chi2", "real"}, {"df", "int"}, {"p_value", "real"},
                      {"min_expected", "real"}, {"note", "string"}});
    std::vector<std::vector<std::string>> summary_rows;
    for (const auto& t : r.crosstabs) {
      if (!t.table) {
        summary.add_row({t.factor, "NA", "NA", "NA", "NA", t.note});
        summary_rows.push_back({t.factor, "", "", "", t.note});
        continue;
      }
      std::optional<ChiSquareResult> test;
      std::string note = t.note;
      try {
        test = chi_square_independence(*t.table);
        if (test->small_expected_warning) note = "expected count below 5";
      } catch (const DomainError& e) {
        note = e.what();
      }
      emit("crosstab_" + slug(t.factor) + ".csv", crosstab_csv(*t.table));
      emit("crosstab_" + slug(t.factor) + ".txt", crosstab_text(*t.table, t.factor, test ? &*test : nullptr));
      if (test) {
        summary.add_row({t.factor, csv_real(test->statistic), std::to_string(test->df), csv_real(test->p_value),
                         csv_real(test->min_expected_cell), note});
        summary_rows.push_back({t.factor, format_fixed(test->statistic, 2), std::to_string(test->df),
                                format_p(test->p_value), note});
      } else {
        summary.add_row({t.factor, "NA", "NA", "NA", "NA", note});
        summary_rows.push_back({t.factor, "", "", "", note});
      }
    }
    emit("chisquare.csv", summary.str());
    emit("chisquare.txt", aligned_text({"Factor", "Chi-square", "DF", "p", "Note"}, summary_rows));
  }

  if (r.fits.empty()) return files;

  // per-model parameter tables
  for (const auto& f : r.fits) {
    emit("fit_" + slug(f.spec.name) + ".csv", fit_csv(f));
    emit("fit_" + slug(f.spec.name) + ".txt", fit_text(f));
  }
  emit("models.csv", models_csv(r.fits));
  emit("models.txt", models_text(r.fits));

  // deviance ladder and model choice
  const auto ladder = ladder_table(r.fits);
  const std::size_t chosen = select_model(ladder, r.config.alpha);
  {
    CsvTable csv({{"model", "string"}, {"parameters", "int"}, {"minus2ll", "real"}, {"chi2", "real"},
                  {"df", "int"}, {"p_value", "real"}, {"selected", "int"}});
    std::vector<std::vector<std::string>> rows;
    for (std::size_t m = 0; m < ladder.size(); ++m) {
      const auto& l = ladder[m];
      csv.add_row({l.model, std::to_string(l.parameters), csv_real(l.minus2ll),
                   l.has_test ? csv_real(l.chi2) : "NA", l.has_test ? std::to_string(l.df) : "NA",
                   l.has_test ? csv_real(l.p_value) : "NA", m == chosen ? "1" : "0"});
      rows.push_back({l.model, std::to_string(l.parameters), format_fixed(l.minus2ll, 2),
                      l.has_test ? format_fixed(l.chi2, 2) : "", l.has_test ? std::to_string(l.df) : "",
                      l.has_test ? format_p(l.p_value) : "", m == chosen ? "*" : ""});
    }
    emit("ladder.csv", csv.str());
    std::string text = aligned_text({"Model", "Parameters", "-2LL", "Chi-square", "DF", "p", "Selected"}, rows);
    text += "selected: " + ladder[chosen].model + " (alpha = " + format_fixed(r.config.alpha, 2) + ")\n";
    if (!r.complete) text += "note: ladder incomplete; selection covers fitted models only\n";
    emit("ladder.txt", text);
  }

  // random-intercept variance, z-test and ICC
  {
    CsvTable csv({{"model", "string"}, {"tau00", "real"}, {"se", "real"}, {"z", "real"},
                  {"p_one_sided", "real"}, {"icc", "real"}});
    std::vector<std::vector<std::string>> rows;
    for (const auto& f : r.fits) {
      const double tau = f.estimates.tau00;
      const double se = f.standard_errors.tau00;
      std::string z = "NA", p = "NA", zt = "", pt = "";
      if (tau > 0.0 && std::isfinite(se) && se > 0.0) {
        const auto t = variance_z_test(tau, se);
        z = csv_real(t.z);
        p = csv_real(t.p_one_sided);
        zt = format_fixed(t.z, 2);
        pt = format_p(t.p_one_sided);
      }
      csv.add_row({f.spec.name, csv_real(tau), csv_real(se), z, p, csv_real(icc(tau))});
      rows.push_back({f.spec.name, format_fixed(tau, 4), format_fixed(se, 4), zt, pt, format_fixed(icc(tau), 4)});
    }
    emit("variance.csv", csv.str());
    emit("variance.txt", aligned_text({"Model", "tau00", "SE", "z", "p (one-sided)", "ICC"}, rows));
  }

  // threshold t-tests
  {
    std::string csv_all, text_all;
    CsvTable csv({{"model", "string"}, {"parameter", "string"}, {"estimate", "real"}, {"se", "real"},
                  {"df", "int"}, {"t", "real"}, {"p_value", "real"}, {"ci_low", "real"}, {"ci_high", "real"}});
    for (const auto& f : r.fits) {
      bool usable = true;
      for (double se : f.standard_errors.thresholds) usable = usable && std::isfinite(se) && se > 0.0;
      if (!usable) continue;
      const int df = wald_df_for(r, f);
      const auto tests = wald_t_tests(f, df);
      for (const auto& w : tests) {
        csv.add_row({f.spec.name, w.name, csv_real(w.estimate), csv_real(w.se), std::to_string(df), csv_real(w.t),
                     csv_real(w.p_value), csv_real(w.ci_low), csv_real(w.ci_high)});
      }
      text_all += wald_text(f.spec.name, tests, df) + "\n";
    }
    emit("intercept_tests.csv", csv.str());
    emit("intercept_tests.txt", text_all);
  }

  // odds ratios and (g) probability profiles of the selected model
  const FitResult& sel = r.fits[chosen];
  emit("odds_ratios.csv", odds_ratio_csv(sel));
  emit("odds_ratios.txt", sel.spec.name + "\n" + odds_ratio_text(sel));
  for (std::size_t c = 0; c < sel.spec.covariates.size(); ++c) {
    const auto* scheme = find_scheme(r.config, sel.spec.covariates[c]);
    if (!scheme) continue;
    const auto table = profile_table(sel, c, scheme->categories);
    emit("profile_" + slug(table.covariate) + ".csv", profile_csv(table));
    emit("profile_" + slug(table.covariate) + ".txt", profile_text(table));
  }

  if (!r.quadrature.empty()) {
    CsvTable csv({{"model", "string"}, {"nodes", "int"}, {"laplace_minus2ll", "real"},
                  {"ghq_minus2ll", "real"}, {"difference", "real"}});
    std::vector<std::vector<std::string>> rows;
    for (const auto& q : r.quadrature) {
      csv.add_row({q.model, std::to_string(q.nodes), csv_real(q.laplace_minus2ll), csv_real(q.ghq_minus2ll),
                   csv_real(q.laplace_minus2ll - q.ghq_minus2ll)});
      rows.push_back({q.model, std::to_string(q.nodes), format_fixed(q.laplace_minus2ll, 4),
                      format_fixed(q.ghq_minus2ll, 4), format_sci(q.laplace_minus2ll - q.ghq_minus2ll)});
    }
    emit("quadrature.csv", csv.str());
    emit("quadrature.txt", aligned_text({"Model", "Nodes", "Laplace -2LL", "AGHQ -2LL", "Difference"}, rows));
  }
  return files;
}

std::string results_to_json_text(const RunResults& r, const std::vector<std::string>& artifacts,
                                 double elapsed_seconds) {
  json j;
  j["tool"] = "ordmlm";
  j["version"] = ORDMLM_VERSION;
  j["status"] = r.complete ? "complete" : "partial";
  j["config"] = config_json(r.config);
  j["results"] = results_json(r);
  j["artifacts"] = artifacts;
  j["timings"] = {{"elapsed_seconds", elapsed_seconds}};
  return j.dump(2) + "\n";
}

RunResults results_from_json_text(const std::string& text) {
  try {
    const json j = json::parse(text);
    RunResults r;
    r.config = config_from(j.at("config"));
    const auto& res = j.at("results");
    const auto& ex = res.at("exclusions");
    r.exclusions.total_records = ex.at("total_records").get<std::size_t>();
    r.exclusions.retained = ex.at("retained").get<std::size_t>();
    r.exclusions.by_reason = ex.at("by_reason").get<std::map<std::string, std::size_t>>();
    r.clusters = res.at("clusters").get<int>();
    r.cluster_labels = res.at("cluster_labels").get<std::vector<std::string>>();
    for (const auto& t : res.at("crosstabs")) {
      FactorTable ft;
      ft.factor = t.at("factor").get<std::string>();
      ft.note = t.at("note").get<std::string>();
      if (t.contains("counts")) {
        ft.table.emplace(t.at("rows").get<std::vector<std::string>>(), t.at("cols").get<std::vector<std::string>>(),
                         t.at("counts").get<std::vector<std::vector<std::int64_t>>>());
      }
      r.crosstabs.push_back(std::move(ft));
    }
    for (const auto& f : res.at("fits")) r.fits.push_back(fit_from(f));
    for (const auto& q : res.at("quadrature")) {
      r.quadrature.push_back({q.at("model").get<std::string>(), q.at("nodes").get<int>(),
                              json_real(q.at("laplace_minus2ll")), json_real(q.at("ghq_minus2ll"))});
    }
    r.complete = res.at("complete").get<bool>();
    r.error = res.at("error").get<std::string>();
    return r;
  } catch (const json::exception& e) {
    throw DataError(std::string("invalid run manifest: ") + e.what());
  }
}

PipelineOutcome run_pipeline(const AnalysisConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  PipelineOutcome out;
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    out.code = ExitCode::ConfigError;
    out.message = e.what();
    return out;
  }

  RunResults& r = out.results;
  r.config = cfg;
  const std::filesystem::path dir(cfg.output_dir);

  auto finish = [&](ExitCode code, const std::string& message) {
    out.code = code;
    out.message = message;
    r.complete = code == ExitCode::Success;
    r.error = message;
    try {
      std::filesystem::create_directories(dir);
      out.artifacts = write_reports(r, dir);
      const double elapsed =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      write_file(dir / "manifest.json", results_to_json_text(r, out.artifacts, elapsed));
      out.artifacts.push_back("manifest.json");
    } catch (const std::exception& e) {
      if (out.code == ExitCode::Success) out.code = ExitCode::DataError;
      out.message += std::string(out.message.empty() ? "" : "; ") + "report writing failed: " + e.what();
    }
    return out;
  };

  // ingestion and recoding
  std::optional<EncodedDataset> data;
  try {
    const auto doc = read_csv_file(cfg.input);
    const auto records = records_from_csv(doc, cfg.columns);
    EncodingSpec spec;
    spec.levels = cfg.levels;
    std::set<std::string> used;
    for (const auto& m : cfg.ladder) used.insert(m.covariates.begin(), m.covariates.end());
    for (const auto& s : cfg.schemes) {
      if (used.count(s.name)) spec.covariates.push_back(s);
    }
    data.emplace(encode_dataset(records, spec, r.exclusions));
  } catch (const ConfigError& e) {
    return finish(ExitCode::ConfigError, e.what());
  } catch (const Error& e) {
    return finish(ExitCode::DataError, e.what());
  }
  r.clusters = data->cluster_count();
  r.cluster_labels = data->cluster_labels();

  // bivariate screening for every covariate and the cluster factor
  std::vector<std::string> factors = data->covariate_names();
  factors.emplace_back(kClusterFactor);
  for (const auto& factor : factors) {
    FactorTable ft;
    ft.factor = factor;
    try {
      ft.table = build_crosstab(*data, factor);
    } catch (const DomainError& e) {
      ft.note = e.what();
    }
    r.crosstabs.push_back(std::move(ft));
  }

  // model ladder; fits are independent once the dataset is encoded
  struct Attempt {
    std::optional<ModelData> data;
    std::optional<FitResult> fit;
    std::string error;
    ExitCode code = ExitCode::Success;
  };
  std::vector<Attempt> attempts(cfg.ladder.size());
  FitOptions inner = cfg.fit;
  inner.threads = 1;
  parallel_for(cfg.ladder.size(), cfg.fit.threads, [&](std::size_t m) {
    const auto& spec = cfg.ladder[m];
    auto& a = attempts[m];
    try {
      a.data.emplace(ModelData::from(*data, spec));
      a.fit = fit(*a.data, inner);
      a.fit->spec = spec;
      if (!a.fit->converged) {
        a.code = ExitCode::FitNonConvergence;
        a.error = spec.name + " did not converge";
      }
    } catch (const ConvergenceError& e) {
      a.code = ExitCode::FitNonConvergence;
      a.error = spec.name + ": " + e.what();
    } catch (const Error& e) {
      a.code = ExitCode::DataError;
      a.error = spec.name + ": " + e.what();
    }
  });
  for (auto& a : attempts) {
    if (a.fit) r.fits.push_back(*a.fit);
    if (a.code != ExitCode::Success) return finish(a.code, a.error);
    try {
      const double ghq = total_minus2ll_ghq(a.fit->estimates, *a.data, cfg.nodes, cfg.fit.threads);
      r.quadrature.push_back({a.fit->spec.name, cfg.nodes, a.fit->minus2ll, ghq});
    } catch (const ConvergenceError& e) {
      return finish(ExitCode::FitNonConvergence, a.fit->spec.name + " quadrature: " + e.what());
    }
  }
  return finish(ExitCode::Success, "");
}

std::vector<std::string> regenerate_reports(const std::filesystem::path& dir) {
  const RunResults r = results_from_json_text(read_file(dir / "manifest.json"));
  return write_reports(r, dir);
}

}  // namespace ordmlm
