#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hdinfer/bootstrap.hpp"
#include "hdinfer/csv.hpp"
#include "hdinfer/debias.hpp"
#include "hdinfer/diagnostics.hpp"
#include "hdinfer/lasso.hpp"
#include "hdinfer/rng.hpp"
#include "hdinfer/simharness.hpp"
#include "hdinfer/standardize.hpp"

namespace {

using namespace hdinfer;

struct LoadedData {
  RegressionData std_data;  // standardized
  Vector scales;
  std::vector<std::string> names;
};

LoadedData load_and_standardize(const std::string& path,
                                const std::string& response, bool no_header) {
  CsvOptions opts;
  opts.has_header = !no_header;
  opts.response = response;
  CsvData csv = load_regression_csv(path, opts);
  LoadedData out;
  out.std_data = standardize(csv.data);
  out.scales = out.std_data.column_scales;
  out.names = csv.column_names;
  return out;
}

std::vector<Index> parse_coords(const std::string& arg,
                                const std::vector<std::string>& names) {
  std::vector<Index> out;
  std::string tok;
  std::istringstream is(arg);
  while (std::getline(is, tok, ',')) {
    bool named = false;
    for (std::size_t k = 0; k < names.size(); ++k) {
      if (names[k] == tok) {
        out.push_back(static_cast<Index>(k));
        named = true;
        break;
      }
    }
    if (!named) out.push_back(std::stoll(tok) - 1);  // 1-based index
  }
  return out;
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << text;
}

int cmd_fit(const std::string& file, const std::string& response,
            bool no_header, double lambda, double lambda_sigma, bool json) {
  LoadedData ld = load_and_standardize(file, response, no_header);
  SolverConfig solver;
  LassoFit fit;
  double sigma2 = 0.0;
  double used_lambda = lambda;
  if (lambda > 0.0) {
    fit = fit_lasso(ld.std_data, lambda, solver);
    sigma2 = estimate_noise_variance(ld.std_data, fit);
  } else {
    PipelineResult pr = fit_lasso_pipeline(ld.std_data, solver, lambda_sigma);
    fit = pr.fit;
    sigma2 = pr.sigma2;
    used_lambda = pr.lambda;
  }
  const Vector beta_raw = destandardize_coefficients(fit.beta_hat, ld.scales);

  if (json) {
    nlohmann::json j;
    j["lambda"] = used_lambda;
    j["converged"] = fit.converged;
    j["kkt_gap"] = fit.kkt_gap;
    j["sweeps"] = fit.iterations;
    j["sigma2_hat"] = sigma2;
    j["active_set_size"] = fit.active_set.size();
    nlohmann::json coefs = nlohmann::json::array();
    for (Index k : fit.active_set) {
      coefs.push_back({{"coord", k + 1},
                       {"name", ld.names[static_cast<std::size_t>(k)]},
                       {"beta_standardized", fit.beta_hat[k]},
                       {"beta", beta_raw[k]}});
    }
    j["coefficients"] = coefs;
    std::cout << j.dump(2) << "\n";
  } else {
    std::printf("lambda = %.6g   sigma_hat = %.6g   |S_hat| = %zu\n",
                used_lambda, std::sqrt(sigma2), fit.active_set.size());
    std::printf("converged = %s   kkt_gap = %.3g   sweeps = %d\n",
                fit.converged ? "yes" : "no", fit.kkt_gap, fit.iterations);
    for (Index k : fit.active_set) {
      std::printf("  %-16s %12.6g\n",
                  ld.names[static_cast<std::size_t>(k)].c_str(), beta_raw[k]);
    }
  }
  return 0;
}

int cmd_ci(const std::string& file, const std::string& response,
           bool no_header, const std::string& coords_arg,
           const std::string& method, double level, int boot,
           std::uint64_t seed, double lambda, double lambda_sigma, bool json) {
  LoadedData ld = load_and_standardize(file, response, no_header);
  SolverConfig solver;
  double used_lambda = lambda;
  LassoFit fit;
  double sigma2;
  if (lambda > 0.0) {
    fit = fit_lasso(ld.std_data, lambda, solver);
    sigma2 = estimate_noise_variance(ld.std_data, fit);
  } else {
    PipelineResult pr = fit_lasso_pipeline(ld.std_data, solver, lambda_sigma);
    fit = pr.fit;
    sigma2 = pr.sigma2;
    used_lambda = pr.lambda;
  }
  const double sigma_hat = std::sqrt(sigma2);
  const double alpha = 1.0 - level;

  nlohmann::json rows = nlohmann::json::array();
  for (Index j : parse_coords(coords_arg, ld.names)) {
    const DebiasArtifacts art =
        nodewise_direction(ld.std_data, j, used_lambda, solver);
    const DebiasedEstimate est = debias(ld.std_data, fit, art);
    double lo, hi, center;
    if (method == "db") {
      const Interval ci = plugin_ci(est, art, sigma_hat, alpha);
      lo = ci.lower;
      hi = ci.upper;
      center = est.beta_db;
    } else {
      const BootstrapDistribution dist =
          bootstrap_debiased(ld.std_data, fit, sigma_hat, art, boot,
                             SeedSpec{seed, 0}, solver);
      if (method == "bsdb") {
        const ConfidenceInterval ci = percentile_ci(est.beta_db, dist, level);
        lo = ci.lower;
        hi = ci.upper;
        center = est.beta_db;
      } else if (method == "ddb") {
        center = ddb_estimate(est.beta_db, dist);
        const double half = sigma_hat * normal_quantile(1.0 - alpha / 2.0) *
                            std::sqrt(art.z_norm2) / art.denom;
        lo = center - half;
        hi = center + half;
      } else {
        throw std::runtime_error("unknown method: " + method);
      }
    }
    // intervals are on the standardized coefficient scale; map back
    const double sc = ld.scales[j];
    if (json) {
      rows.push_back({{"coord", j + 1},
                      {"name", ld.names[static_cast<std::size_t>(j)]},
                      {"estimate", center * sc},
                      {"lower", lo * sc},
                      {"upper", hi * sc},
                      {"method", method},
                      {"level", level}});
    } else {
      std::printf("%-16s est = %12.6g   %g%% CI = [%12.6g, %12.6g]\n",
                  ld.names[static_cast<std::size_t>(j)].c_str(), center * sc,
                  100.0 * level, lo * sc, hi * sc);
    }
  }
  if (json) std::cout << rows.dump(2) << "\n";
  return 0;
}

int cmd_simulate(const std::string& config_path, int reps, int boot,
                 std::int64_t seed, const std::string& out,
                 const std::string& format, int threads) {
  SimConfig cfg = parse_config_file(config_path);
  if (reps > 0) cfg.n_reps = reps;
  if (boot > 0) cfg.B = boot;
  if (seed >= 0) cfg.master_seed = static_cast<std::uint64_t>(seed);
  if (threads > 0) cfg.threads = threads;
  const SimulationReport report = run_simulation(cfg);
  ReportFormat fmt = ReportFormat::TextTable;
  if (format == "csv") fmt = ReportFormat::Csv;
  else if (format == "json") fmt = ReportFormat::Json;
  else if (format != "table") throw std::runtime_error("unknown format: " + format);
  write_output(out, emit_report(report, fmt));
  return 0;
}

int cmd_diagnose(const std::string& file, const std::string& config_path,
                 const std::string& response, bool no_header, Index coord,
                 double lambda, double sigma, bool json) {
  if (!config_path.empty()) {
    // Simulation mode: population + empirical report for the configured design.
    SimConfig cfg = parse_config_file(config_path);
    const Vector beta = beta_vector(cfg);
    std::vector<Index> S;
    for (Index j = 0; j < beta.size(); ++j) {
      if (beta[j] != 0.0) S.push_back(j);
    }
    Matrix Sigma = Matrix::Identity(cfg.p, cfg.p);
    if (cfg.sigma_design == DesignCov::Equicorrelated) {
      Sigma.setConstant(cfg.rho);
      Sigma.diagonal().setOnes();
    }
    const double lam = lambda > 0.0
                           ? lambda
                           : cfg.lambda_scale * cfg.noise_sigma *
                                 std::sqrt(2.0 * std::log(double(cfg.p)) / cfg.n);
    const ConditionReport pop = population_condition_report(
        Sigma, S, beta, lam, static_cast<double>(cfg.n), cfg.noise_sigma);

    const Instance inst = generate_instance(cfg, 0);
    const Index j = coord >= 1 ? coord - 1 : S.front();
    const DebiasArtifacts art = nodewise_direction(inst.data, j, lam, cfg.solver);
    const ConditionReport emp =
        condition_report(inst.data, S, art, beta, lam, cfg.noise_sigma);
    if (json) {
      std::cout << "{\n\"population\": " << to_json_string(pop)
                << ",\n\"empirical\": " << to_json_string(emp) << "\n}\n";
    } else {
      std::cout << "# population conditions\n"
                << to_text(pop) << "# empirical conditions (rep 0)\n"
                << to_text(emp);
    }
    return 0;
  }

  LoadedData ld = load_and_standardize(file, response, no_header);
  SolverConfig solver;
  PipelineResult pr = fit_lasso_pipeline(ld.std_data, solver,
                                         sigma > 0 ? sigma : 1.0);
  const double lam = lambda > 0.0 ? lambda : pr.lambda;
  if (pr.fit.active_set.empty()) {
    throw std::runtime_error("lasso support is empty; nothing to diagnose");
  }
  const Index j = coord >= 1 ? coord - 1 : pr.fit.active_set.front();
  const DebiasArtifacts art = nodewise_direction(ld.std_data, j, lam, solver);
  // With real data the true support/coefficients are unknown; the fitted
  // support and coefficients stand in for them.
  const ConditionReport emp =
      condition_report(ld.std_data, pr.fit.active_set, art, pr.fit.beta_hat,
                       lam, std::sqrt(pr.sigma2));
  if (json) {
    std::cout << to_json_string(emp) << "\n";
  } else {
    std::cout << to_text(emp);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bootstrap-corrected debiased-lasso inference"};
  app.require_subcommand(1);

  std::string file, response, coords_arg, method = "bsdb", config_path;
  std::string out_path, format = "table";
  bool no_header = false, json = false;
  double lambda = 0.0, lambda_sigma = 1.0, level = 0.95, sigma = 0.0;
  int boot = 500, boot_override = 0, reps = 0, threads = 0;
  std::int64_t seed = -1;
  Index coord = 0;

  auto* fit = app.add_subcommand("fit", "Lasso fit and noise estimate");
  fit->add_option("data", file, "CSV file")->required();
  fit->add_option("--response", response, "response column (name or 1-based index)")
      ->required();
  fit->add_flag("--no-header", no_header, "CSV has no header row");
  fit->add_option("--lambda", lambda, "penalty (default: universal level)");
  fit->add_option("--lambda-sigma", lambda_sigma,
                  "noise scale for the universal level (default 1)");
  fit->add_flag("--json", json, "JSON output");

  auto* ci = app.add_subcommand("ci", "Confidence intervals for coordinates");
  ci->add_option("data", file, "CSV file")->required();
  ci->add_option("--response", response, "response column")->required();
  ci->add_option("--coord", coords_arg, "coordinate list, e.g. 1,4,7 or names")
      ->required();
  ci->add_option("--method", method, "bsdb | db | ddb (default bsdb)");
  ci->add_option("--level", level, "confidence level (default 0.95)");
  ci->add_option("--boot", boot, "bootstrap resamples (default 500)");
  ci->add_option("--seed", seed, "bootstrap seed (default 0)");
  ci->add_option("--lambda", lambda, "penalty (default: universal level)");
  ci->add_option("--lambda-sigma", lambda_sigma,
                 "noise scale for the universal level");
  ci->add_flag("--no-header", no_header, "CSV has no header row");
  ci->add_flag("--json", json, "JSON output");

  auto* sim = app.add_subcommand("simulate", "Monte-Carlo coverage study");
  sim->add_option("--config", config_path, "flat key = value config file")
      ->required();
  sim->add_option("--reps", reps, "override replication count");
  sim->add_option("--boot", boot_override, "override bootstrap resamples");
  sim->add_option("--out", out_path, "output path (default stdout)");
  sim->add_option("--format", format, "table | csv | json");
  sim->add_option("--seed", seed, "override master seed");
  sim->add_option("--threads", threads, "worker threads (0 = auto)");

  auto* diag = app.add_subcommand("diagnose", "Support-recovery conditions");
  diag->add_option("data", file, "CSV file (or use --config)");
  diag->add_option("--config", config_path, "simulation config file");
  diag->add_option("--response", response, "response column (CSV mode)");
  diag->add_flag("--no-header", no_header, "CSV has no header row");
  diag->add_option("--coord", coord, "coordinate for z diagnostics (1-based)");
  diag->add_option("--lambda", lambda, "penalty override");
  diag->add_option("--sigma", sigma, "noise scale for the band");
  diag->add_flag("--json", json, "JSON output");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(fit)) {
      return cmd_fit(file, response, no_header, lambda, lambda_sigma, json);
    }
    if (app.got_subcommand(ci)) {
      return cmd_ci(file, response, no_header, coords_arg, method, level, boot,
                    seed >= 0 ? static_cast<std::uint64_t>(seed) : 0, lambda,
                    lambda_sigma, json);
    }
    if (app.got_subcommand(sim)) {
      return cmd_simulate(config_path, reps, boot_override, seed, out_path,
                          format, threads);
    }
    if (app.got_subcommand(diag)) {
      return cmd_diagnose(file, config_path, response, no_header, coord,
                          lambda, sigma, json);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
