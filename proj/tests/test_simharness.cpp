#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include <json.hpp>

#include "hdinfer/simharness.hpp"

using namespace hdinfer;

namespace {

SimConfig tiny_config() {
  SimConfig cfg;
  cfg.n = 40;
  cfg.p = 30;
  cfg.s = 3;
  cfg.beta_spec = BetaSpec::SettingI;
  cfg.noise_sigma = 1.0;
  cfg.n_reps = 3;
  cfg.B = 25;
  cfg.level = 0.95;
  cfg.null_coords = 5;
  cfg.master_seed = 17;
  return cfg;
}

}  // namespace

TEST_CASE("beta vectors for the two settings") {
  SimConfig cfg = tiny_config();
  cfg.s = 20;
  cfg.p = 500;
  Vector b1 = beta_vector(cfg);
  for (int j = 0; j < 20; ++j) CHECK(b1[j] == 2.0);
  CHECK(b1.tail(480).cwiseAbs().maxCoeff() == 0.0);

  cfg.beta_spec = BetaSpec::SettingII;
  Vector b2 = beta_vector(cfg);
  for (int j = 0; j < 5; ++j) CHECK(b2[j] == 1.0);
  for (int j = 5; j < 20; ++j) CHECK(b2[j] == 2.0);
}

TEST_CASE("identity and rho=0 equicorrelated designs coincide bitwise") {
  SimConfig a = tiny_config();
  a.sigma_design = DesignCov::Identity;
  SimConfig b = tiny_config();
  b.sigma_design = DesignCov::Equicorrelated;
  b.rho = 0.0;
  const auto ia = generate_instance(a, 0);
  const auto ib = generate_instance(b, 0);
  CHECK((ia.data.X - ib.data.X).cwiseAbs().maxCoeff() == 0.0);
  CHECK((ia.data.y - ib.data.y).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("instances are deterministic in (seed, rep)") {
  const SimConfig cfg = tiny_config();
  const auto i1 = generate_instance(cfg, 2);
  const auto i2 = generate_instance(cfg, 2);
  CHECK((i1.data.X - i2.data.X).cwiseAbs().maxCoeff() == 0.0);
  CHECK((i1.eps - i2.eps).cwiseAbs().maxCoeff() == 0.0);

  // Fixed design: same X across reps, fresh noise
  const auto i3 = generate_instance(cfg, 3);
  CHECK((i1.data.X - i3.data.X).cwiseAbs().maxCoeff() == 0.0);
  CHECK((i1.eps - i3.eps).cwiseAbs().maxCoeff() != 0.0);

  SimConfig redraw = cfg;
  redraw.design_mode = DesignMode::Redraw;
  const auto r1 = generate_instance(redraw, 1);
  const auto r2 = generate_instance(redraw, 2);
  CHECK((r1.data.X - r2.data.X).cwiseAbs().maxCoeff() != 0.0);
}

TEST_CASE("equicorrelated column correlation is near rho") {
  SimConfig cfg = tiny_config();
  cfg.n = 10000;
  cfg.p = 2;
  cfg.s = 1;
  cfg.sigma_design = DesignCov::Equicorrelated;
  cfg.rho = 0.2;
  const auto inst = generate_instance(cfg, 0);
  const Vector a = inst.data.X.col(0);
  const Vector b = inst.data.X.col(1);
  const double corr =
      a.dot(b) / std::sqrt(a.squaredNorm() * b.squaredNorm());
  CHECK(std::abs(corr - 0.2) <= 0.03);
}

TEST_CASE("force_standardize gives exact column norms") {
  SimConfig cfg = tiny_config();
  cfg.force_standardize = true;
  const auto inst = generate_instance(cfg, 0);
  for (Index j = 0; j < cfg.p; ++j) {
    CHECK(std::abs(inst.data.X.col(j).squaredNorm() - cfg.n) <=
          1e-8 * cfg.n);
  }
  // y is generated on the final (normalized) design, so beta_true keeps its
  // meaning on the fitted scale
  const Vector recon = inst.data.X * inst.beta_true + inst.eps;
  CHECK((inst.data.y - recon).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("replications are reproducible and complete") {
  const SimConfig cfg = tiny_config();
  const auto r1 = run_replication(cfg, 0);
  const auto r2 = run_replication(cfg, 0);
  REQUIRE_FALSE(r1.failed);
  REQUIRE(r1.coords.size() == r2.coords.size());
  CHECK(r1.sigma_hat == r2.sigma_hat);
  for (std::size_t k = 0; k < r1.coords.size(); ++k) {
    CHECK(r1.coords[k].est_db == r2.coords[k].est_db);
    CHECK(r1.coords[k].est_ddb == r2.coords[k].est_ddb);
    CHECK(r1.coords[k].len_bsdb == r2.coords[k].len_bsdb);
  }
  // coverage accounting: records per rep = tested coordinates
  CHECK(r1.coords.size() == resolve_tested_coords(cfg).size());
  CHECK(r1.coords.size() == 3u + 5u);  // support + nulls
}

TEST_CASE("aggregate means and failure policy") {
  SimConfig cfg = tiny_config();
  cfg.n_reps = 2;

  RepResult a;
  a.sigma_hat = 1.0;
  CoordRecord c;
  c.j = 0;
  c.in_support = true;
  c.beta_j = 2.0;
  c.cov_db = true;
  c.len_db = 2.0;
  c.cov_bsdb = true;
  c.len_bsdb = 2.0;
  c.cov_ddb = true;
  c.len_ddb = 2.0;
  a.coords.push_back(c);

  SUBCASE("single record aggregates to itself") {
    const auto rep = aggregate(cfg, {a});
    CHECK(rep.db.cov_S == doctest::Approx(1.0));
    CHECK(rep.db.len_S == doctest::Approx(2.0));
    CHECK(rep.n_reps_successful == 1);
  }
  SUBCASE("coverage means over replications") {
    RepResult b = a;
    b.coords[0].cov_db = false;
    const auto rep = aggregate(cfg, {a, b});
    CHECK(rep.db.cov_S == doctest::Approx(0.5));
  }
  SUBCASE("all-failed aborts") {
    RepResult bad;
    bad.failed = true;
    CHECK_THROWS_AS(aggregate(cfg, {bad, bad}),
                    AllReplicationsFailedError);
  }
  SUBCASE("more than five percent failed aborts") {
    std::vector<RepResult> reps(40, a);
    reps[0].failed = true;
    reps[1].failed = true;
    reps[2].failed = true;  // 3/40 = 7.5%
    CHECK_THROWS(aggregate(cfg, reps));
  }
}

TEST_CASE("aggregation is invariant to replication order") {
  SimConfig cfg = tiny_config();
  cfg.n_reps = 4;
  std::vector<RepResult> reps;
  for (int r = 0; r < 4; ++r) reps.push_back(run_replication(cfg, r));
  const auto fwd = aggregate(cfg, reps);
  std::reverse(reps.begin(), reps.end());
  const auto rev = aggregate(cfg, reps);
  // equality up to summation order (bit-exactness across thread schedules is
  // separate: results are always folded in replication-index order)
  CHECK(fwd.db.cov_S == doctest::Approx(rev.db.cov_S).epsilon(1e-14));
  CHECK(fwd.bsdb.len_Sc == doctest::Approx(rev.bsdb.len_Sc).epsilon(1e-14));
  CHECK(fwd.mean_sigma_hat ==
        doctest::Approx(rev.mean_sigma_hat).epsilon(1e-14));
  CHECK(fwd.omega0_rate == doctest::Approx(rev.omega0_rate).epsilon(1e-14));
}

TEST_CASE("full run determinism across thread counts") {
  SimConfig cfg = tiny_config();
  cfg.n_reps = 4;
  cfg.threads = 1;
  const auto rep1 = run_simulation(cfg);
  cfg.threads = 2;
  const auto rep2 = run_simulation(cfg);
  CHECK(emit_report(rep1, ReportFormat::Csv) ==
        emit_report(rep2, ReportFormat::Csv));
}

TEST_CASE("report CSV round-trips numerically") {
  SimConfig cfg = tiny_config();
  const auto rep = run_simulation(cfg);
  const std::string csv = emit_report(rep, ReportFormat::Csv);
  const auto back = parse_report_csv(csv);
  CHECK(back.bsdb.cov_S == rep.bsdb.cov_S);
  CHECK(back.bsdb.len_Sc == rep.bsdb.len_Sc);
  CHECK(back.db.cov_S == rep.db.cov_S);
  CHECK(back.ddb.len_S == rep.ddb.len_S);
  CHECK(back.mean_sigma_hat == rep.mean_sigma_hat);
  CHECK(back.omega0_rate == rep.omega0_rate);
  CHECK(back.n_reps_total == rep.n_reps_total);
  CHECK(back.level == rep.level);
  CHECK(back.lambda == rep.lambda);
  CHECK(back.condition_summary.kappa == rep.condition_summary.kappa);
  CHECK(back.condition_summary.C_min == rep.condition_summary.C_min);
  CHECK(back.groups.strong_ddb == rep.groups.strong_ddb);
  REQUIRE(back.bias_table.size() == rep.bias_table.size());
  for (std::size_t k = 0; k < back.bias_table.size(); ++k) {
    CHECK(back.bias_table[k].j == rep.bias_table[k].j);
    CHECK(back.bias_table[k].lasso == rep.bias_table[k].lasso);
    CHECK(back.bias_table[k].ddb == rep.bias_table[k].ddb);
  }
}

TEST_CASE("JSON report carries the documented structure") {
  SimConfig cfg = tiny_config();
  const auto rep = run_simulation(cfg);
  const auto j = nlohmann::json::parse(emit_report(rep, ReportFormat::Json));
  REQUIRE(j.contains("run"));
  CHECK(j["run"]["n_reps_total"].is_number_integer());
  CHECK(j["run"]["level"].is_number());
  REQUIRE(j.contains("methods"));
  for (const char* m : {"bsdb", "db", "ddb"}) {
    REQUIRE(j["methods"].contains(m));
    for (const char* k : {"cov_s", "cov_sc", "len_s", "len_sc"}) {
      CHECK(j["methods"][m][k].is_number());
    }
  }
  REQUIRE(j.contains("bias_table"));
  CHECK(j["bias_table"].is_array());
  CHECK(j["bias_table"].size() == 8);
  for (const auto& row : j["bias_table"]) {
    CHECK(row["coord"].is_number_integer());
    CHECK(row["lasso"].is_number());
  }
  REQUIRE(j.contains("groups"));
  REQUIRE(j.contains("condition_summary"));
  CHECK(j["condition_summary"]["kappa"].is_number());
  REQUIRE(j.contains("summary"));
  CHECK(j["summary"]["mean_sigma_hat"].is_number());
  CHECK(j["summary"]["omega0_rate"].is_number());
}

TEST_CASE("empty method set renders a header-only table") {
  SimulationReport rep;
  const std::string table = emit_report(rep, ReportFormat::TextTable);
  CHECK(table.find("method") != std::string::npos);
  CHECK(table.find("BS-DB") == std::string::npos);
  CHECK(table.find("DDB") == std::string::npos);
}

TEST_CASE("text table lists the methods") {
  SimConfig cfg = tiny_config();
  cfg.methods = {Method::Db};
  const auto rep = run_simulation(cfg);
  const std::string table = emit_report(rep, ReportFormat::TextTable);
  CHECK(table.find("DB") != std::string::npos);
  CHECK(table.find("BS-DB") == std::string::npos);
  CHECK(table.find("mean_sigma_hat") != std::string::npos);
}

TEST_CASE("config parsing") {
  const std::string text = R"(
# comment
n = 60
p = 80
s = 4
beta_spec = setting_ii
sigma_design = equicorrelated
rho = 0.15
noise_sigma = 2.0
n_reps = 7
B = 33
level = 0.9
tested_coords = 1,2,80
master_seed = 99
methods = db, ddb
design_mode = redraw
force_standardize = true
lambda_scale = 1.5
threads = 2
kkt_tol = 1e-9
)";
  const SimConfig cfg = parse_config_text(text);
  CHECK(cfg.n == 60);
  CHECK(cfg.p == 80);
  CHECK(cfg.beta_spec == BetaSpec::SettingII);
  CHECK(cfg.sigma_design == DesignCov::Equicorrelated);
  CHECK(cfg.rho == doctest::Approx(0.15));
  CHECK(cfg.noise_sigma == doctest::Approx(2.0));
  CHECK(cfg.n_reps == 7);
  CHECK(cfg.B == 33);
  CHECK(cfg.level == doctest::Approx(0.9));
  REQUIRE(cfg.tested_coords.size() == 3);
  CHECK(cfg.tested_coords[0] == 0);  // 1-based in the file
  CHECK(cfg.tested_coords[2] == 79);
  CHECK(cfg.master_seed == 99);
  REQUIRE(cfg.methods.size() == 2);
  CHECK(cfg.methods[0] == Method::Db);
  CHECK(cfg.design_mode == DesignMode::Redraw);
  CHECK(cfg.force_standardize);
  CHECK(cfg.lambda_scale == doctest::Approx(1.5));
  CHECK(cfg.threads == 2);
  CHECK(cfg.solver.kkt_tol == doctest::Approx(1e-9));

  CHECK_THROWS_AS(parse_config_text("bogus_key = 1"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("n 5"), ConfigError);

  // "all" expands against the final p regardless of key order
  const SimConfig all_cfg = parse_config_text("tested_coords = all\np = 12");
  CHECK(resolve_tested_coords(all_cfg).size() == 12);
}

TEST_CASE("tested coordinates default to support plus nulls") {
  SimConfig cfg = tiny_config();
  cfg.null_coords = 4;
  const auto coords = resolve_tested_coords(cfg);
  CHECK(coords.size() == 3u + 4u);
  // support always included
  for (Index j : {0, 1, 2}) {
    CHECK(std::find(coords.begin(), coords.end(), j) != coords.end());
  }
  // deterministic in the master seed
  const auto coords2 = resolve_tested_coords(cfg);
  CHECK(coords == coords2);
  SimConfig other = cfg;
  other.master_seed = 18;
  CHECK(resolve_tested_coords(other) != coords);
}

TEST_CASE("near-noiseless strong signals give tiny intervals") {
  // p < n here: with p > n the vanishing-noise penalty saturates the
  // support (every column absorbs a noise-scale crumb) and the residual
  // degrees of freedom vanish.
  SimConfig cfg;
  cfg.n = 60;
  cfg.p = 40;
  cfg.s = 3;
  cfg.custom_beta.assign(40, 0.0);
  cfg.custom_beta[0] = cfg.custom_beta[1] = cfg.custom_beta[2] = 5.0;
  cfg.beta_spec = BetaSpec::Custom;
  cfg.noise_sigma = 1e-9;
  cfg.n_reps = 2;
  cfg.B = 40;
  cfg.null_coords = 5;
  cfg.master_seed = 5;
  const auto rep = run_simulation(cfg);
  CHECK(rep.bsdb.len_S <= 1e-6);
  CHECK(rep.bsdb.len_Sc <= 1e-6);
  CHECK(rep.db.len_S <= 1e-6);
  // estimates are near-exact at this noise level
  for (const auto& row : rep.bias_table) {
    CHECK(std::abs(row.db) <= 1e-6);
  }
}

TEST_CASE("HDINFER_THREADS caps the worker count") {
  setenv("HDINFER_THREADS", "1", 1);
  CHECK(resolve_threads(8) == 1);
  unsetenv("HDINFER_THREADS");
  CHECK(resolve_threads(3) == 3);
}
