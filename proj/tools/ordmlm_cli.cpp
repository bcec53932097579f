#include <CLI11.hpp>
#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ordmlm/crosstab.hpp"
#include "ordmlm/csv_io.hpp"
#include "ordmlm/error.hpp"
#include "ordmlm/glmm.hpp"
#include "ordmlm/inference.hpp"
#include "ordmlm/pipeline.hpp"
#include "ordmlm/report.hpp"
#include "ordmlm/simulate.hpp"

namespace {

using namespace ordmlm;

struct Overrides {
  std::string config;
  std::string input;
  std::string out;
  std::optional<double> tol;
  std::optional<int> max_iter;
  std::optional<int> nodes;
  std::optional<std::uint64_t> seed;
  std::optional<double> alpha;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "JSON configuration file");
  cmd->add_option("--input", o.input, "input CSV");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--tol", o.tol, "relative objective tolerance");
  cmd->add_option("--max-iter", o.max_iter, "optimizer iteration cap");
  cmd->add_option("--nodes", o.nodes, "Gauss-Hermite nodes of the validation pass");
  cmd->add_option("--seed", o.seed, "random seed");
  cmd->add_option("--alpha", o.alpha, "significance level of ladder selection");
}

AnalysisConfig resolve(const Overrides& o) {
  AnalysisConfig cfg = o.config.empty() ? AnalysisConfig::defaults() : load_config(o.config);
  if (!o.input.empty()) cfg.input = o.input;
  if (!o.out.empty()) cfg.output_dir = o.out;
  if (o.tol) cfg.fit.tol = *o.tol;
  if (o.max_iter) cfg.fit.max_iter = *o.max_iter;
  if (o.nodes) cfg.nodes = *o.nodes;
  if (o.seed) cfg.seed = *o.seed;
  if (o.alpha) cfg.alpha = *o.alpha;
  return cfg;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

std::filesystem::path out_dir(const AnalysisConfig& cfg) {
  if (cfg.output_dir.empty()) throw ConfigError("--out is required");
  std::filesystem::create_directories(cfg.output_dir);
  return cfg.output_dir;
}

EncodingSpec encoding_for(const AnalysisConfig& cfg, const std::vector<std::string>& names) {
  EncodingSpec spec;
  spec.levels = cfg.levels;
  for (const auto& s : cfg.schemes) {
    if (std::find(names.begin(), names.end(), s.name) != names.end()) spec.covariates.push_back(s);
  }
  if (spec.covariates.size() != std::set<std::string>(names.begin(), names.end()).size()) {
    throw ConfigError("unknown covariate in model");
  }
  return spec;
}

std::vector<std::string> ladder_covariates(const AnalysisConfig& cfg) {
  std::vector<std::string> names;
  for (const auto& m : cfg.ladder) {
    for (const auto& c : m.covariates) {
      if (std::find(names.begin(), names.end(), c) == names.end()) names.push_back(c);
    }
  }
  return names;
}

EncodedDataset load(const AnalysisConfig& cfg, const std::vector<std::string>& covariates,
                    ExclusionReport& report) {
  if (cfg.input.empty()) throw ConfigError("--input is required");
  const auto doc = read_csv_file(cfg.input);
  ColumnMapping mapping = cfg.columns;
  std::erase_if(mapping.covariates, [&](const auto& kv) {
    return std::find(covariates.begin(), covariates.end(), kv.first) == covariates.end();
  });
  return encode_dataset(records_from_csv(doc, mapping), encoding_for(cfg, covariates), report);
}

int run_recode(const AnalysisConfig& cfg) {
  ExclusionReport report;
  const auto data = load(cfg, ladder_covariates(cfg), report);
  const auto dir = out_dir(cfg);
  write_text(dir / "encoded.csv", encoded_to_csv(data));
  write_text(dir / "exclusions.txt", report.to_text());
  std::cout << report.to_text();
  return 0;
}

int run_crosstab(const AnalysisConfig& cfg, std::vector<std::string> factors) {
  RunResults r;
  r.config = cfg;
  const auto data = load(cfg, ladder_covariates(cfg), r.exclusions);
  if (factors.empty()) {
    factors = data.covariate_names();
    factors.emplace_back(kClusterFactor);
  }
  for (const auto& f : factors) {
    FactorTable ft;
    ft.factor = f;
    try {
      ft.table = build_crosstab(data, f);
    } catch (const DomainError& e) {
      ft.note = e.what();
    }
    r.crosstabs.push_back(std::move(ft));
  }
  r.clusters = data.cluster_count();
  r.complete = true;
  const auto files = write_reports(r, out_dir(cfg));
  for (const auto& f : files) std::cout << f << "\n";
  return 0;
}

int run_fit(AnalysisConfig cfg, const std::string& model, const std::string& covariates,
            const std::string& response_column, std::optional<int> levels) {
  if (!response_column.empty()) cfg.columns.response = response_column;
  if (levels) cfg.levels = *levels;
  ModelSpec spec;
  if (!covariates.empty() || model.empty()) {
    spec.name = model.empty() ? "Model" : model;
    std::stringstream ss(covariates);
    for (std::string c; std::getline(ss, c, ',');) {
      if (!c.empty()) spec.covariates.push_back(c);
    }
  } else {
    auto it = std::find_if(cfg.ladder.begin(), cfg.ladder.end(), [&](const ModelSpec& m) { return m.name == model; });
    if (it == cfg.ladder.end()) throw ConfigError("no model named " + model);
    spec = *it;
  }
  spec.levels = cfg.levels;
  for (const auto& c : spec.covariates) {
    if (!cfg.columns.covariates.count(c)) throw ConfigError("covariate " + c + " has no input column");
  }
  if (cfg.levels != kAnemiaLevels && cfg.columns.response.empty()) {
    throw ConfigError("levels other than 4 need --response-column");
  }
  ExclusionReport report;
  const auto data = load(cfg, spec.covariates, report);
  const FitResult f = fit(spec, data, cfg.fit);
  std::cout << fit_text(f);
  if (!cfg.output_dir.empty()) {
    const auto dir = out_dir(cfg);
    std::string slug = spec.name;
    for (auto& ch : slug) ch = std::isalnum(static_cast<unsigned char>(ch)) ? static_cast<char>(std::tolower(ch)) : '_';
    write_text(dir / ("fit_" + slug + ".csv"), fit_csv(f));
    write_text(dir / ("fit_" + slug + ".txt"), fit_text(f));
  }
  if (!f.converged) {
    std::cerr << "error: " << spec.name << " did not converge\n";
    return static_cast<int>(ExitCode::FitNonConvergence);
  }
  return 0;
}

int run_lrt(const AnalysisConfig& cfg, std::vector<double> deviances, std::vector<int> dfs,
            std::vector<std::string> names) {
  if (deviances.size() < 2) throw ConfigError("--deviances needs at least two values");
  if (dfs.size() == 1 && deviances.size() > 2) dfs.assign(deviances.size() - 1, dfs.front());
  if (dfs.size() + 1 != deviances.size()) throw ConfigError("--df needs one value per step");
  if (names.empty()) {
    for (std::size_t m = 0; m < deviances.size(); ++m) names.push_back("Model " + std::to_string(m + 1));
  }
  if (names.size() != deviances.size()) throw ConfigError("--names needs one value per deviance");
  try {
    std::cout << lrt_text(names, deviances, dfs);
    if (!cfg.output_dir.empty()) write_text(out_dir(cfg) / "lrt.csv", lrt_csv(names, deviances, dfs));
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  return 0;
}

struct SimArgs {
  int clusters = 100;
  int cluster_size = 100;
  double tau = 0.2;
  std::vector<double> thresholds{-3.5, -1.5, -0.3};
  std::vector<double> slopes;
  std::vector<std::string> covariates;
};

int run_simulate(const AnalysisConfig& cfg, const SimArgs& a) {
  if (a.slopes.size() != a.covariates.size()) throw ConfigError("--slopes and --covariates differ in length");
  SimConfig sim;
  sim.truth.thresholds = a.thresholds;
  sim.truth.slopes = a.slopes;
  sim.truth.tau00 = a.tau;
  try {
    sim.covariates = default_covariate_generators(a.covariates);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  sim.clusters = a.clusters;
  sim.cluster_sizes = {a.cluster_size};
  sim.seed = cfg.seed;
  try {
    sim.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  const auto out = generate(sim);
  const auto dir = out_dir(cfg);
  write_text(dir / "simulated.csv", dataset_to_csv(out.data));
  std::cout << "wrote " << out.data.size() << " rows in " << out.data.cluster_count() << " clusters\n";
  return 0;
}

int run_report(const AnalysisConfig& cfg) {
  const auto files = regenerate_reports(out_dir(cfg));
  for (const auto& f : files) std::cout << f << "\n";
  return 0;
}

int run_all(const AnalysisConfig& cfg) {
  const auto outcome = run_pipeline(cfg);
  if (outcome.code != ExitCode::Success) std::cerr << "error: " << outcome.message << "\n";
  for (const auto& f : outcome.artifacts) std::cout << f << "\n";
  return static_cast<int>(outcome.code);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-level ordinal logistic analysis of child anemia survey data"};
  app.require_subcommand(1);
  Overrides o;

  auto* run = app.add_subcommand("run", "full pipeline: recode, cross-tabs, model ladder, reports");
  auto* recode = app.add_subcommand("recode", "classify hemoglobin and encode covariates");
  auto* crosstab = app.add_subcommand("crosstab", "cross-tabulations with chi-square tests");
  auto* fitcmd = app.add_subcommand("fit", "fit one model");
  auto* lrtcmd = app.add_subcommand("lrt", "likelihood-ratio tests along a ladder of deviances");
  auto* simulate = app.add_subcommand("simulate", "generate a synthetic dataset");
  auto* report = app.add_subcommand("report", "regenerate tables from a run manifest");
  for (auto* cmd : {run, recode, crosstab, fitcmd, lrtcmd, simulate, report}) add_common(cmd, o);

  std::vector<std::string> factors;
  crosstab->add_option("--factor", factors, "factor to tabulate (repeatable)");

  std::string model, covariates, response_column;
  std::optional<int> levels;
  fitcmd->add_option("--model", model, "model name from the configured ladder");
  fitcmd->add_option("--covariates", covariates, "comma-separated covariates (overrides --model ladder lookup)");
  fitcmd->add_option("--response-column", response_column, "column with pre-coded responses 1..levels");
  fitcmd->add_option("--levels", levels, "number of response levels");

  std::vector<double> deviances;
  std::vector<int> dfs;
  std::vector<std::string> names;
  lrtcmd->add_option("--deviances", deviances, "-2LL of each model in ladder order")->required()->delimiter(',');
  lrtcmd->add_option("--df", dfs, "df of each step (one value applies to all)")->required()->delimiter(',');
  lrtcmd->add_option("--names", names, "model names")->delimiter(',');

  SimArgs sim;
  simulate->add_option("--clusters", sim.clusters, "number of clusters");
  simulate->add_option("--cluster-size", sim.cluster_size, "observations per cluster");
  simulate->add_option("--tau", sim.tau, "random-intercept variance");
  simulate->add_option("--thresholds", sim.thresholds, "increasing cut-points")->delimiter(',');
  simulate->add_option("--slopes", sim.slopes, "slopes, one per covariate")->delimiter(',');
  simulate->add_option("--covariates", sim.covariates, "covariate names")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return static_cast<int>(ExitCode::ConfigError);
  }

  try {
    const AnalysisConfig cfg = resolve(o);
    if (*run) return run_all(cfg);
    if (*recode) return run_recode(cfg);
    if (*crosstab) return run_crosstab(cfg, factors);
    if (*fitcmd) return run_fit(cfg, model, covariates, response_column, levels);
    if (*lrtcmd) return run_lrt(cfg, deviances, dfs, names);
    if (*simulate) return run_simulate(cfg, sim);
    if (*report) return run_report(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::ConfigError);
  } catch (const ConvergenceError& e) {
    std::cerr << "fit error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::FitNonConvergence);
  } catch (const std::exception& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::DataError);
  }
  return 0;
}
