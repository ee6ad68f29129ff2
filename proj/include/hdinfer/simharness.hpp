#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hdinfer/bootstrap.hpp"
#include "hdinfer/diagnostics.hpp"
#include "hdinfer/types.hpp"

namespace hdinfer {

enum class BetaSpec { SettingI, SettingII, Custom };
enum class DesignCov { Identity, Equicorrelated };

// Fixed: one design drawn per run and reused across replications (a
// deterministic design, fresh noise each replication).  Redraw: a fresh
// design every replication.
enum class DesignMode { Fixed, Redraw };

struct SimConfig {
  int n = 100;
  int p = 500;
  int s = 20;
  BetaSpec beta_spec = BetaSpec::SettingI;
  std::vector<double> custom_beta;
  DesignCov sigma_design = DesignCov::Identity;
  double rho = 0.2;  // equicorrelated off-diagonal
  double noise_sigma = 1.0;
  int n_reps = 1000;
  int B = 500;
  double level = 0.95;
  std::vector<Index> tested_coords;  // empty = support plus null_coords nulls
  bool test_all_coords = false;      // overrides tested_coords with 1..p
  int null_coords = 30;
  std::uint64_t master_seed = 0;
  std::vector<Method> methods = {Method::BsDb, Method::Db, Method::DdbPlugin};
  DesignMode design_mode = DesignMode::Fixed;
  bool force_standardize = false;
  double lambda_scale = 1.0;
  SolverConfig solver;
  int threads = 0;  // 0 = hardware, capped by HDINFER_THREADS
};

struct Instance {
  RegressionData data;
  Vector beta_true;
  Vector eps;
};

struct CoordRecord {
  Index j = 0;
  bool in_support = false;
  double beta_j = 0.0;
  double est_lasso = 0.0;
  double est_db = 0.0;
  double est_ddb = 0.0;
  bool cov_bsdb = false, cov_db = false, cov_ddb = false;
  double len_bsdb = 0.0, len_db = 0.0, len_ddb = 0.0;
  double pivot_ddb = 0.0;  // R_j^(DDB)
};

struct RepResult {
  bool failed = false;
  std::string fail_reason;
  double sigma_hat = 0.0;
  bool omega0 = false;
  double kappa = 0.0, K1 = 0.0, C_min = 0.0, K0 = 0.0;
  double g1 = 0.0, g1_prime = 0.0;
  int s_tilde = 0;
  double z4_ratio = 0.0, z2_over_n = 0.0;
  std::vector<CoordRecord> coords;
};

struct MethodStats {
  double cov_S = 0.0, cov_Sc = 0.0;
  double len_S = 0.0, len_Sc = 0.0;
};

struct BiasRow {
  Index j = 0;
  double beta_j = 0.0;
  double lasso = 0.0, db = 0.0, ddb = 0.0;  // mean(estimate - beta_j)
};

struct GroupBias {
  // Means of (estimate - beta_j) over the weak / strong / zero coefficient
  // groups (strong = largest nonzero magnitude among tested coordinates).
  double weak_lasso = 0.0, weak_db = 0.0, weak_ddb = 0.0;
  double strong_lasso = 0.0, strong_db = 0.0, strong_ddb = 0.0;
  double zero_lasso = 0.0, zero_db = 0.0, zero_ddb = 0.0;
  int n_weak = 0, n_strong = 0, n_zero = 0;
};

struct SimulationReport {
  std::vector<Method> methods;
  MethodStats bsdb, db, ddb;
  std::vector<BiasRow> bias_table;
  GroupBias groups;
  double mean_sigma_hat = 0.0;
  ConditionReport condition_summary;
  double omega0_rate = 0.0;
  int n_reps_total = 0;
  int n_reps_successful = 0;
  double level = 0.0;
  double lambda = 0.0;
  std::uint64_t master_seed = 0;
};

enum class ReportFormat { TextTable, Csv, Json };

// The regression coefficient vector of the configured setting.
Vector beta_vector(const SimConfig& config);

// Tested coordinates: explicit list, or the support plus `null_coords`
// deterministic pseudo-random null coordinates.
std::vector<Index> resolve_tested_coords(const SimConfig& config);

// One simulated data set: X rows i.i.d. N(0, Sigma) (fixed across reps in
// Fixed mode), eps i.i.d. N(0, noise_sigma^2), y = X beta + eps.
Instance generate_instance(const SimConfig& config, int rep);

// Full per-replication record: pipeline fit, nodewise directions, one shared
// bootstrap distribution per coordinate feeding the BS-DB interval and the
// DDB estimate, plus coverage/length bookkeeping.
RepResult run_replication(const SimConfig& config, int rep);

// Aggregates per-rep records into the report; throws when all replications
// failed or more than 5% of them did.
SimulationReport aggregate(const SimConfig& config,
                           const std::vector<RepResult>& reps);

// Runs n_reps replications (in parallel across reps) and aggregates.
SimulationReport run_simulation(const SimConfig& config);

// Renders the report: a table mirroring the coverage/length layout, CSV with
// one row per (method, metric), or the full nested JSON.
std::string emit_report(const SimulationReport& report, ReportFormat format);

// Reconstructs a report from its CSV rendering (numeric fields only).
SimulationReport parse_report_csv(const std::string& csv);

// Flat "key = value" config file; unknown keys are errors.
SimConfig parse_config_text(const std::string& text);
SimConfig parse_config_file(const std::string& path);

// Worker count after applying the HDINFER_THREADS cap.
int resolve_threads(int requested);

}  // namespace hdinfer
