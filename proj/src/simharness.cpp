#include "hdinfer/simharness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "hdinfer/rng.hpp"
#include "hdinfer/standardize.hpp"

namespace hdinfer {

namespace {

// Sub-stream tags under the run's master seed.
constexpr std::uint64_t kDesignStream = 1;
constexpr std::uint64_t kNoiseStream = 2;
constexpr std::uint64_t kBootstrapStream = 3;
constexpr std::uint64_t kCoordStream = 4;

void validate_config(const SimConfig& cfg) {
  if (cfg.n < 2) throw ConfigError("n must be >= 2");
  if (cfg.p < 2) throw ConfigError("p must be >= 2");
  if (cfg.beta_spec != BetaSpec::Custom && (cfg.s < 1 || cfg.s > cfg.p)) {
    throw ConfigError("s must be in [1, p]");
  }
  if (!(cfg.noise_sigma > 0.0)) throw ConfigError("noise_sigma must be positive");
  if (cfg.n_reps < 1) throw ConfigError("n_reps must be >= 1");
  if (cfg.B < 1) throw ConfigError("B must be >= 1");
  if (!(cfg.level > 0.0 && cfg.level < 1.0)) {
    throw ConfigError("level must be in (0,1)");
  }
  if (cfg.sigma_design == DesignCov::Equicorrelated) {
    const double lo = -1.0 / static_cast<double>(cfg.p - 1);
    if (!(cfg.rho > lo && cfg.rho < 1.0)) {
      throw ConfigError("rho must be in (-1/(p-1), 1)");
    }
  }
  for (Index j : cfg.tested_coords) {
    if (j < 0 || j >= cfg.p) throw ConfigError("tested coordinate out of range");
  }
  if (cfg.beta_spec == BetaSpec::Custom &&
      static_cast<Index>(cfg.custom_beta.size()) != cfg.p) {
    throw ConfigError("custom beta must have length p");
  }
  if (cfg.methods.empty()) throw ConfigError("at least one method required");
}

bool has_method(const SimConfig& cfg, Method m) {
  return std::find(cfg.methods.begin(), cfg.methods.end(), m) !=
         cfg.methods.end();
}

std::vector<Index> support_of(const Vector& beta) {
  std::vector<Index> s;
  for (Index j = 0; j < beta.size(); ++j) {
    if (beta[j] != 0.0) s.push_back(j);
  }
  return s;
}

struct SimContext {
  SimConfig cfg;
  Vector beta;
  std::vector<Index> support;
  std::vector<Index> tested;
  Matrix chol;        // lower Cholesky factor of Sigma; empty when identity
  Matrix fixed_X;     // design shared across reps (Fixed mode)
  std::vector<DebiasArtifacts> fixed_arts;
  double lambda = 0.0;    // regression penalty, scaled to noise_sigma
  double lambda_j = 0.0;  // nodewise penalty; the response x_j has unit scale
  bool need_bootstrap = false;
};

Matrix draw_design(const SimConfig& cfg, const Matrix& chol, int rep) {
  SeedSpec root{cfg.master_seed, 0};
  const std::uint64_t sub =
      cfg.design_mode == DesignMode::Fixed ? 0 : static_cast<std::uint64_t>(rep);
  CounterRng rng(root.substream(kDesignStream).substream(sub));
  Matrix G(cfg.n, cfg.p);
  for (Index i = 0; i < cfg.n; ++i) {
    for (Index j = 0; j < cfg.p; ++j) G(i, j) = rng.normal();
  }
  if (chol.size() == 0) return G;
  return G * chol.transpose();
}

Matrix cholesky_factor(const SimConfig& cfg) {
  if (cfg.sigma_design == DesignCov::Identity || cfg.rho == 0.0) {
    return Matrix();
  }
  Matrix Sigma = Matrix::Constant(cfg.p, cfg.p, cfg.rho);
  Sigma.diagonal().setOnes();
  Eigen::LLT<Matrix> llt(Sigma);
  if (llt.info() != Eigen::Success) {
    throw SingularCovarianceError("equicorrelated covariance is not PD");
  }
  return llt.matrixL();
}

// The design after the optional exact normalization; y is always formed on
// this final matrix so beta_true keeps its meaning.
Matrix realized_design(const SimContext& ctx, int rep) {
  const SimConfig& cfg = ctx.cfg;
  Matrix X = cfg.design_mode == DesignMode::Fixed
                 ? ctx.fixed_X
                 : draw_design(cfg, ctx.chol, rep);
  if (cfg.force_standardize) {
    const double sqrt_n = std::sqrt(static_cast<double>(cfg.n));
    for (Index j = 0; j < X.cols(); ++j) {
      X.col(j) *= sqrt_n / X.col(j).norm();
    }
  }
  return X;
}

Instance make_instance(const SimContext& ctx, int rep) {
  const SimConfig& cfg = ctx.cfg;
  Instance inst;
  inst.beta_true = ctx.beta;

  RegressionData data;
  data.X = realized_design(ctx, rep);
  SeedSpec root{cfg.master_seed, 0};
  inst.eps = cfg.noise_sigma *
             gaussian_vector(root.substream(kNoiseStream)
                                 .substream(static_cast<std::uint64_t>(rep)),
                             cfg.n);
  data.y = data.X * inst.beta_true + inst.eps;
  data.column_scales = Vector::Ones(cfg.p);
  data.standardized = true;  // unit-variance columns, exact when forced
  inst.data = data;
  return inst;
}

double universal_level(const SimConfig& cfg) {
  return cfg.lambda_scale * cfg.noise_sigma *
         std::sqrt(2.0 * std::log(static_cast<double>(cfg.p)) /
                   static_cast<double>(cfg.n));
}

SimContext build_context(const SimConfig& cfg) {
  validate_config(cfg);
  SimContext ctx;
  ctx.cfg = cfg;
  ctx.beta = beta_vector(cfg);
  ctx.support = support_of(ctx.beta);
  if (ctx.support.empty()) throw ConfigError("beta has empty support");
  ctx.cfg.s = static_cast<int>(ctx.support.size());
  ctx.tested = resolve_tested_coords(cfg);
  ctx.chol = cholesky_factor(cfg);
  ctx.lambda = universal_level(cfg);
  ctx.lambda_j = ctx.lambda / cfg.noise_sigma;
  ctx.need_bootstrap =
      has_method(cfg, Method::BsDb) || has_method(cfg, Method::DdbPlugin);
  if (cfg.design_mode == DesignMode::Fixed) {
    ctx.fixed_X = draw_design(cfg, ctx.chol, 0);
    RegressionData shell;
    shell.X = realized_design(ctx, 0);
    shell.y = Vector::Zero(cfg.n);
    shell.column_scales = Vector::Ones(cfg.p);
    shell.standardized = true;
    ctx.fixed_arts.reserve(ctx.tested.size());
    for (Index j : ctx.tested) {
      ctx.fixed_arts.push_back(
          nodewise_direction(shell, j, ctx.lambda_j, cfg.solver));
    }
  }
  return ctx;
}

RepResult run_replication_ctx(const SimContext& ctx, int rep) {
  const SimConfig& cfg = ctx.cfg;
  RepResult result;
  try {
    const Instance inst = make_instance(ctx, rep);
    const PipelineResult pipe = fit_lasso_pipeline(
        inst.data, cfg.solver, cfg.noise_sigma, cfg.lambda_scale);
    if (!pipe.fit.converged) {
      result.failed = true;
      result.fail_reason = "lasso did not converge";
      return result;
    }
    const double sigma_hat = std::sqrt(pipe.sigma2);
    result.sigma_hat = sigma_hat;

    std::vector<DebiasArtifacts> local_arts;
    const std::vector<DebiasArtifacts>* arts = &ctx.fixed_arts;
    if (cfg.design_mode == DesignMode::Redraw) {
      local_arts.reserve(ctx.tested.size());
      for (Index j : ctx.tested) {
        local_arts.push_back(
            nodewise_direction(inst.data, j, ctx.lambda_j, cfg.solver));
      }
      arts = &local_arts;
    }

    const ConditionReport cond =
        condition_report(inst.data, ctx.support, arts->front(), inst.beta_true,
                         pipe.lambda, cfg.noise_sigma);
    result.kappa = cond.kappa;
    result.K1 = cond.K1;
    result.C_min = cond.C_min;
    result.K0 = cond.K0;
    result.g1 = cond.g1;
    result.g1_prime = cond.g1_prime;
    result.s_tilde = cond.s_tilde;
    result.z4_ratio = cond.z4_ratio;
    result.z2_over_n = cond.z2_over_n;

    // Omega_0: no false positives and the sup-norm error within g1(lambda).
    bool inside = true;
    for (Index k : pipe.fit.active_set) {
      if (inst.beta_true[k] == 0.0) {
        inside = false;
        break;
      }
    }
    double max_err = 0.0;
    for (Index k : ctx.support) {
      max_err = std::max(max_err,
                         std::abs(pipe.fit.beta_hat[k] - inst.beta_true[k]));
    }
    result.omega0 = inside && max_err <= cond.g1;

    std::vector<BootstrapDistribution> dists;
    if (ctx.need_bootstrap) {
      SeedSpec root{cfg.master_seed, 0};
      const SeedSpec boot_seed = root.substream(kBootstrapStream)
                                     .substream(static_cast<std::uint64_t>(rep));
      dists = bootstrap_debiased_multi(inst.data, pipe.fit, sigma_hat, *arts,
                                       cfg.B, boot_seed, cfg.solver);
    }

    const double alpha = 1.0 - cfg.level;
    const double zq = normal_quantile(1.0 - alpha / 2.0);
    result.coords.reserve(ctx.tested.size());
    for (std::size_t k = 0; k < ctx.tested.size(); ++k) {
      const DebiasArtifacts& art = (*arts)[k];
      CoordRecord rec;
      rec.j = art.j;
      rec.beta_j = inst.beta_true[art.j];
      rec.in_support = rec.beta_j != 0.0;
      const DebiasedEstimate est = debias(inst.data, pipe.fit, art);
      rec.est_lasso = est.beta_lasso;
      rec.est_db = est.beta_db;

      const Interval db_ci = plugin_ci(est, art, sigma_hat, alpha);
      rec.cov_db = db_ci.lower <= rec.beta_j && rec.beta_j <= db_ci.upper;
      rec.len_db = db_ci.upper - db_ci.lower;

      if (ctx.need_bootstrap) {
        const BootstrapDistribution& dist = dists[k];
        const ConfidenceInterval bs_ci =
            percentile_ci(est.beta_db, dist, cfg.level);
        rec.cov_bsdb = bs_ci.lower <= rec.beta_j && rec.beta_j <= bs_ci.upper;
        rec.len_bsdb = bs_ci.upper - bs_ci.lower;

        rec.est_ddb = ddb_estimate(est.beta_db, dist);
        const double half = zq * sigma_hat * std::sqrt(art.z_norm2) / art.denom;
        rec.cov_ddb = rec.est_ddb - half <= rec.beta_j &&
                      rec.beta_j <= rec.est_ddb + half;
        rec.len_ddb = 2.0 * half;
        rec.pivot_ddb =
            pivots(est, rec.est_ddb, art, sigma_hat, rec.beta_j).r_j_ddb;
      } else {
        rec.est_ddb = std::numeric_limits<double>::quiet_NaN();
        rec.pivot_ddb = std::numeric_limits<double>::quiet_NaN();
      }
      result.coords.push_back(rec);
    }
  } catch (const std::exception& e) {
    result.failed = true;
    result.fail_reason = e.what();
    result.coords.clear();
  }
  return result;
}

const char* method_name(Method m) {
  switch (m) {
    case Method::BsDb: return "bsdb";
    case Method::Db: return "db";
    case Method::DdbPlugin: return "ddb";
  }
  return "?";
}

const char* method_label(Method m) {
  switch (m) {
    case Method::BsDb: return "BS-DB";
    case Method::Db: return "DB";
    case Method::DdbPlugin: return "DDB";
  }
  return "?";
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

Vector beta_vector(const SimConfig& cfg) {
  Vector beta = Vector::Zero(cfg.p);
  switch (cfg.beta_spec) {
    case BetaSpec::SettingI:
      for (int j = 0; j < cfg.s; ++j) beta[j] = 2.0;
      break;
    case BetaSpec::SettingII: {
      const int weak = std::min(5, cfg.s);
      for (int j = 0; j < weak; ++j) beta[j] = 1.0;
      for (int j = weak; j < cfg.s; ++j) beta[j] = 2.0;
      break;
    }
    case BetaSpec::Custom:
      for (Index j = 0; j < cfg.p; ++j) beta[j] = cfg.custom_beta[j];
      break;
  }
  return beta;
}

std::vector<Index> resolve_tested_coords(const SimConfig& cfg) {
  if (cfg.test_all_coords) {
    std::vector<Index> out(static_cast<std::size_t>(cfg.p));
    std::iota(out.begin(), out.end(), Index{0});
    return out;
  }
  if (!cfg.tested_coords.empty()) {
    auto out = cfg.tested_coords;
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }
  const Vector beta = beta_vector(cfg);
  std::vector<Index> out = support_of(beta);
  std::vector<Index> nulls;
  for (Index j = 0; j < cfg.p; ++j) {
    if (beta[j] == 0.0) nulls.push_back(j);
  }
  const auto want = std::min<std::size_t>(nulls.size(),
                                          static_cast<std::size_t>(cfg.null_coords));
  SeedSpec root{cfg.master_seed, 0};
  CounterRng rng(root.substream(kCoordStream));
  for (std::size_t k = 0; k < want; ++k) {
    const auto pick = static_cast<std::size_t>(
        rng.uniform() * static_cast<double>(nulls.size() - k));
    const auto idx = std::min(pick, nulls.size() - k - 1);
    out.push_back(nulls[idx]);
    std::swap(nulls[idx], nulls[nulls.size() - k - 1]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

Instance generate_instance(const SimConfig& cfg, int rep) {
  validate_config(cfg);
  SimContext ctx;
  ctx.cfg = cfg;
  ctx.beta = beta_vector(cfg);
  ctx.chol = cholesky_factor(cfg);
  if (cfg.design_mode == DesignMode::Fixed) {
    ctx.fixed_X = draw_design(cfg, ctx.chol, 0);
  }
  return make_instance(ctx, rep);
}

RepResult run_replication(const SimConfig& cfg, int rep) {
  return run_replication_ctx(build_context(cfg), rep);
}

SimulationReport aggregate(const SimConfig& cfg,
                           const std::vector<RepResult>& reps) {
  validate_config(cfg);
  const auto total = static_cast<int>(reps.size());
  int ok = 0;
  for (const auto& r : reps) ok += r.failed ? 0 : 1;
  if (ok == 0) {
    throw AllReplicationsFailedError("all replications failed");
  }
  if (20 * (total - ok) > total) {
    throw AllReplicationsFailedError(
        std::to_string(total - ok) + " of " + std::to_string(total) +
        " replications failed (above the 5% ceiling)");
  }

  SimulationReport rep;
  rep.methods = cfg.methods;
  rep.n_reps_total = total;
  rep.n_reps_successful = ok;
  rep.level = cfg.level;
  rep.lambda = universal_level(cfg);
  rep.master_seed = cfg.master_seed;

  struct Accum {
    double cov_S = 0, cov_Sc = 0, len_S = 0, len_Sc = 0;
    long n_S = 0, n_Sc = 0;
    MethodStats stats() const {
      MethodStats m;
      if (n_S > 0) {
        m.cov_S = cov_S / static_cast<double>(n_S);
        m.len_S = len_S / static_cast<double>(n_S);
      }
      if (n_Sc > 0) {
        m.cov_Sc = cov_Sc / static_cast<double>(n_Sc);
        m.len_Sc = len_Sc / static_cast<double>(n_Sc);
      }
      return m;
    }
  };
  Accum acc_bsdb, acc_db, acc_ddb;
  std::map<Index, BiasRow> bias;
  std::map<Index, long> bias_n;

  double sum_sigma = 0.0;
  long omega0_count = 0;
  double sk = 0, sK1 = 0, sCmin = 0, sK0 = 0, sg1 = 0, sg1p = 0, sst = 0,
         sz4 = 0, sz2 = 0;

  for (const auto& r : reps) {
    if (r.failed) continue;
    sum_sigma += r.sigma_hat;
    omega0_count += r.omega0 ? 1 : 0;
    sk += r.kappa;
    sK1 += r.K1;
    sCmin += r.C_min;
    sK0 += r.K0;
    sg1 += r.g1;
    sg1p += r.g1_prime;
    sst += r.s_tilde;
    sz4 += r.z4_ratio;
    sz2 += r.z2_over_n;
    for (const auto& c : r.coords) {
      auto add = [&](Accum& a, bool cov, double len) {
        if (c.in_support) {
          a.cov_S += cov ? 1.0 : 0.0;
          a.len_S += len;
          ++a.n_S;
        } else {
          a.cov_Sc += cov ? 1.0 : 0.0;
          a.len_Sc += len;
          ++a.n_Sc;
        }
      };
      add(acc_bsdb, c.cov_bsdb, c.len_bsdb);
      add(acc_db, c.cov_db, c.len_db);
      add(acc_ddb, c.cov_ddb, c.len_ddb);

      auto& row = bias[c.j];
      row.j = c.j;
      row.beta_j = c.beta_j;
      row.lasso += c.est_lasso - c.beta_j;
      row.db += c.est_db - c.beta_j;
      row.ddb += c.est_ddb - c.beta_j;
      ++bias_n[c.j];
    }
  }

  rep.bsdb = acc_bsdb.stats();
  rep.db = acc_db.stats();
  rep.ddb = acc_ddb.stats();
  rep.mean_sigma_hat = sum_sigma / ok;
  rep.omega0_rate = static_cast<double>(omega0_count) / ok;

  rep.condition_summary.kappa = sk / ok;
  rep.condition_summary.K1 = sK1 / ok;
  rep.condition_summary.C_min = sCmin / ok;
  rep.condition_summary.K0 = sK0 / ok;
  rep.condition_summary.g1 = sg1 / ok;
  rep.condition_summary.g1_prime = sg1p / ok;
  rep.condition_summary.s = cfg.s;
  rep.condition_summary.s_tilde =
      static_cast<int>(std::lround(sst / ok));
  rep.condition_summary.z4_ratio = sz4 / ok;
  rep.condition_summary.z2_over_n = sz2 / ok;

  double strong_mag = 0.0;
  for (auto& [j, row] : bias) {
    const double m = static_cast<double>(bias_n[j]);
    row.lasso /= m;
    row.db /= m;
    row.ddb /= m;
    rep.bias_table.push_back(row);
    strong_mag = std::max(strong_mag, std::abs(row.beta_j));
  }

  GroupBias& g = rep.groups;
  for (const auto& row : rep.bias_table) {
    const double mag = std::abs(row.beta_j);
    if (mag == 0.0) {
      g.zero_lasso += row.lasso;
      g.zero_db += row.db;
      g.zero_ddb += row.ddb;
      ++g.n_zero;
    } else if (mag == strong_mag) {
      g.strong_lasso += row.lasso;
      g.strong_db += row.db;
      g.strong_ddb += row.ddb;
      ++g.n_strong;
    } else {
      g.weak_lasso += row.lasso;
      g.weak_db += row.db;
      g.weak_ddb += row.ddb;
      ++g.n_weak;
    }
  }
  auto norm = [](double& a, double& b, double& c, int n) {
    if (n > 0) {
      a /= n;
      b /= n;
      c /= n;
    }
  };
  norm(g.weak_lasso, g.weak_db, g.weak_ddb, g.n_weak);
  norm(g.strong_lasso, g.strong_db, g.strong_ddb, g.n_strong);
  norm(g.zero_lasso, g.zero_db, g.zero_ddb, g.n_zero);
  return rep;
}

int resolve_threads(int requested) {
  int t = requested > 0 ? requested
                        : static_cast<int>(std::thread::hardware_concurrency());
  if (t < 1) t = 1;
  if (const char* env = std::getenv("HDINFER_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) t = std::min(t, cap);
  }
  return t;
}

SimulationReport run_simulation(const SimConfig& cfg) {
  const SimContext ctx = build_context(cfg);
  std::vector<RepResult> results(static_cast<std::size_t>(cfg.n_reps));
  const int threads = std::min(resolve_threads(cfg.threads), cfg.n_reps);

  if (threads <= 1) {
    for (int r = 0; r < cfg.n_reps; ++r) {
      results[static_cast<std::size_t>(r)] = run_replication_ctx(ctx, r);
    }
  } else {
    std::atomic<int> next{0};
    auto worker = [&]() {
      for (;;) {
        const int r = next.fetch_add(1);
        if (r >= cfg.n_reps) break;
        results[static_cast<std::size_t>(r)] = run_replication_ctx(ctx, r);
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return aggregate(ctx.cfg, results);
}

std::string emit_report(const SimulationReport& rep, ReportFormat format) {
  auto stats_of = [&](Method m) -> const MethodStats& {
    switch (m) {
      case Method::BsDb: return rep.bsdb;
      case Method::Db: return rep.db;
      default: return rep.ddb;
    }
  };

  if (format == ReportFormat::TextTable) {
    std::ostringstream os;
    char line[160];
    std::snprintf(line, sizeof(line), "%-8s %8s %8s %8s %8s\n", "method",
                  "cov_S", "cov_Sc", "len_S", "len_Sc");
    os << line;
    for (Method m : rep.methods) {
      const MethodStats& st = stats_of(m);
      std::snprintf(line, sizeof(line), "%-8s %8.3f %8.3f %8.3f %8.3f\n",
                    method_label(m), st.cov_S, st.cov_Sc, st.len_S, st.len_Sc);
      os << line;
    }
    os << "\n";
    std::snprintf(line, sizeof(line), "replications = %d/%d\n",
                  rep.n_reps_successful, rep.n_reps_total);
    os << line;
    std::snprintf(line, sizeof(line), "level = %g\nlambda = %.6g\n", rep.level,
                  rep.lambda);
    os << line;
    std::snprintf(line, sizeof(line),
                  "mean_sigma_hat = %.4f\nomega0_rate = %.4f\n",
                  rep.mean_sigma_hat, rep.omega0_rate);
    os << line;
    if (rep.groups.n_strong + rep.groups.n_weak + rep.groups.n_zero > 0) {
      os << "\nmean bias (estimate - beta) by coefficient group:\n";
      std::snprintf(line, sizeof(line), "%-8s %10s %10s %10s\n", "group",
                    "Las", "DB", "DDB");
      os << line;
      const GroupBias& g = rep.groups;
      if (g.n_weak > 0) {
        std::snprintf(line, sizeof(line), "%-8s %10.4f %10.4f %10.4f\n",
                      "weak", g.weak_lasso, g.weak_db, g.weak_ddb);
        os << line;
      }
      if (g.n_strong > 0) {
        std::snprintf(line, sizeof(line), "%-8s %10.4f %10.4f %10.4f\n",
                      "strong", g.strong_lasso, g.strong_db, g.strong_ddb);
        os << line;
      }
      if (g.n_zero > 0) {
        std::snprintf(line, sizeof(line), "%-8s %10.4f %10.4f %10.4f\n",
                      "zero", g.zero_lasso, g.zero_db, g.zero_ddb);
        os << line;
      }
    }
    return os.str();
  }

  if (format == ReportFormat::Csv) {
    std::ostringstream os;
    os << "method,metric,value\n";
    for (Method m : rep.methods) {
      const MethodStats& st = stats_of(m);
      const char* name = method_name(m);
      os << name << ",cov_s," << num(st.cov_S) << "\n";
      os << name << ",cov_sc," << num(st.cov_Sc) << "\n";
      os << name << ",len_s," << num(st.len_S) << "\n";
      os << name << ",len_sc," << num(st.len_Sc) << "\n";
    }
    os << "summary,mean_sigma_hat," << num(rep.mean_sigma_hat) << "\n";
    os << "summary,omega0_rate," << num(rep.omega0_rate) << "\n";
    os << "summary,n_reps_total," << rep.n_reps_total << "\n";
    os << "summary,n_reps_successful," << rep.n_reps_successful << "\n";
    os << "summary,level," << num(rep.level) << "\n";
    os << "summary,lambda," << num(rep.lambda) << "\n";
    os << "summary,master_seed," << rep.master_seed << "\n";
    os << "condition,kappa," << num(rep.condition_summary.kappa) << "\n";
    os << "condition,k1," << num(rep.condition_summary.K1) << "\n";
    os << "condition,c_min," << num(rep.condition_summary.C_min) << "\n";
    os << "condition,k0," << num(rep.condition_summary.K0) << "\n";
    os << "condition,s," << rep.condition_summary.s << "\n";
    os << "condition,s_tilde," << rep.condition_summary.s_tilde << "\n";
    os << "condition,g1," << num(rep.condition_summary.g1) << "\n";
    os << "condition,g1_prime," << num(rep.condition_summary.g1_prime) << "\n";
    os << "condition,z4_ratio," << num(rep.condition_summary.z4_ratio) << "\n";
    os << "condition,z2_over_n," << num(rep.condition_summary.z2_over_n)
       << "\n";
    const GroupBias& g = rep.groups;
    os << "groups,n_weak," << g.n_weak << "\n";
    os << "groups,n_strong," << g.n_strong << "\n";
    os << "groups,n_zero," << g.n_zero << "\n";
    os << "groups,weak_lasso," << num(g.weak_lasso) << "\n";
    os << "groups,weak_db," << num(g.weak_db) << "\n";
    os << "groups,weak_ddb," << num(g.weak_ddb) << "\n";
    os << "groups,strong_lasso," << num(g.strong_lasso) << "\n";
    os << "groups,strong_db," << num(g.strong_db) << "\n";
    os << "groups,strong_ddb," << num(g.strong_ddb) << "\n";
    os << "groups,zero_lasso," << num(g.zero_lasso) << "\n";
    os << "groups,zero_db," << num(g.zero_db) << "\n";
    os << "groups,zero_ddb," << num(g.zero_ddb) << "\n";
    for (const auto& row : rep.bias_table) {
      // coordinates are reported 1-based
      const std::string tag = std::to_string(row.j + 1);
      os << "bias,beta_coord_" << tag << "," << num(row.beta_j) << "\n";
      os << "bias,lasso_coord_" << tag << "," << num(row.lasso) << "\n";
      os << "bias,db_coord_" << tag << "," << num(row.db) << "\n";
      os << "bias,ddb_coord_" << tag << "," << num(row.ddb) << "\n";
    }
    return os.str();
  }

  // JSON
  nlohmann::json j;
  j["run"] = {{"n_reps_total", rep.n_reps_total},
              {"n_reps_successful", rep.n_reps_successful},
              {"level", rep.level},
              {"lambda", rep.lambda},
              {"master_seed", rep.master_seed}};
  nlohmann::json jm;
  for (Method m : rep.methods) {
    const MethodStats& st = stats_of(m);
    jm[method_name(m)] = {{"cov_s", st.cov_S},
                          {"cov_sc", st.cov_Sc},
                          {"len_s", st.len_S},
                          {"len_sc", st.len_Sc}};
  }
  j["methods"] = jm;
  j["summary"] = {{"mean_sigma_hat", rep.mean_sigma_hat},
                  {"omega0_rate", rep.omega0_rate}};
  nlohmann::json jb = nlohmann::json::array();
  for (const auto& row : rep.bias_table) {
    jb.push_back({{"coord", row.j + 1},
                  {"beta", row.beta_j},
                  {"lasso", row.lasso},
                  {"db", row.db},
                  {"ddb", row.ddb}});
  }
  j["bias_table"] = jb;
  const GroupBias& g = rep.groups;
  j["groups"] = {{"weak",
                  {{"n", g.n_weak},
                   {"lasso", g.weak_lasso},
                   {"db", g.weak_db},
                   {"ddb", g.weak_ddb}}},
                 {"strong",
                  {{"n", g.n_strong},
                   {"lasso", g.strong_lasso},
                   {"db", g.strong_db},
                   {"ddb", g.strong_ddb}}},
                 {"zero",
                  {{"n", g.n_zero},
                   {"lasso", g.zero_lasso},
                   {"db", g.zero_db},
                   {"ddb", g.zero_ddb}}}};
  const ConditionReport& c = rep.condition_summary;
  j["condition_summary"] = {{"kappa", c.kappa},   {"K1", c.K1},
                            {"C_min", c.C_min},   {"K0", c.K0},
                            {"s", c.s},           {"s_tilde", c.s_tilde},
                            {"g1", c.g1},         {"g1_prime", c.g1_prime},
                            {"z4_ratio", c.z4_ratio},
                            {"z2_over_n", c.z2_over_n}};
  return j.dump(2) + "\n";
}

SimulationReport parse_report_csv(const std::string& csv) {
  SimulationReport rep;
  std::istringstream is(csv);
  std::string line;
  std::getline(is, line);  // header
  std::map<Index, BiasRow> bias;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos) {
      throw std::runtime_error("malformed report CSV row: " + line);
    }
    const std::string section = line.substr(0, c1);
    const std::string key = line.substr(c1 + 1, c2 - c1 - 1);
    const double value = std::strtod(line.c_str() + c2 + 1, nullptr);

    auto method_stats = [&](MethodStats& st) {
      if (key == "cov_s") st.cov_S = value;
      else if (key == "cov_sc") st.cov_Sc = value;
      else if (key == "len_s") st.len_S = value;
      else if (key == "len_sc") st.len_Sc = value;
    };
    if (section == "bsdb" || section == "db" || section == "ddb") {
      Method m = section == "bsdb" ? Method::BsDb
                 : section == "db" ? Method::Db
                                   : Method::DdbPlugin;
      if (std::find(rep.methods.begin(), rep.methods.end(), m) ==
          rep.methods.end()) {
        rep.methods.push_back(m);
      }
      method_stats(m == Method::BsDb ? rep.bsdb
                   : m == Method::Db ? rep.db
                                     : rep.ddb);
    } else if (section == "summary") {
      if (key == "mean_sigma_hat") rep.mean_sigma_hat = value;
      else if (key == "omega0_rate") rep.omega0_rate = value;
      else if (key == "n_reps_total") rep.n_reps_total = static_cast<int>(value);
      else if (key == "n_reps_successful")
        rep.n_reps_successful = static_cast<int>(value);
      else if (key == "level") rep.level = value;
      else if (key == "lambda") rep.lambda = value;
      else if (key == "master_seed")
        rep.master_seed = static_cast<std::uint64_t>(value);
    } else if (section == "condition") {
      ConditionReport& c = rep.condition_summary;
      if (key == "kappa") c.kappa = value;
      else if (key == "k1") c.K1 = value;
      else if (key == "c_min") c.C_min = value;
      else if (key == "k0") c.K0 = value;
      else if (key == "s") c.s = static_cast<int>(value);
      else if (key == "s_tilde") c.s_tilde = static_cast<int>(value);
      else if (key == "g1") c.g1 = value;
      else if (key == "g1_prime") c.g1_prime = value;
      else if (key == "z4_ratio") c.z4_ratio = value;
      else if (key == "z2_over_n") c.z2_over_n = value;
    } else if (section == "groups") {
      GroupBias& g = rep.groups;
      if (key == "n_weak") g.n_weak = static_cast<int>(value);
      else if (key == "n_strong") g.n_strong = static_cast<int>(value);
      else if (key == "n_zero") g.n_zero = static_cast<int>(value);
      else if (key == "weak_lasso") g.weak_lasso = value;
      else if (key == "weak_db") g.weak_db = value;
      else if (key == "weak_ddb") g.weak_ddb = value;
      else if (key == "strong_lasso") g.strong_lasso = value;
      else if (key == "strong_db") g.strong_db = value;
      else if (key == "strong_ddb") g.strong_ddb = value;
      else if (key == "zero_lasso") g.zero_lasso = value;
      else if (key == "zero_db") g.zero_db = value;
      else if (key == "zero_ddb") g.zero_ddb = value;
    } else if (section == "bias") {
      const auto us = key.rfind('_');
      const Index j = std::stoll(key.substr(us + 1)) - 1;
      auto& row = bias[j];
      row.j = j;
      if (key.rfind("beta_", 0) == 0) row.beta_j = value;
      else if (key.rfind("lasso_", 0) == 0) row.lasso = value;
      else if (key.rfind("db_", 0) == 0) row.db = value;
      else if (key.rfind("ddb_", 0) == 0) row.ddb = value;
    } else {
      throw std::runtime_error("unknown report CSV section: " + section);
    }
  }
  for (auto& [j, row] : bias) rep.bias_table.push_back(row);
  return rep;
}

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(trim(cur));
  return out;
}

}  // namespace

SimConfig parse_config_text(const std::string& text) {
  SimConfig cfg;
  cfg.n_reps = 1000;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) +
                        ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "n") cfg.n = std::stoi(value);
    else if (key == "p") cfg.p = std::stoi(value);
    else if (key == "s") cfg.s = std::stoi(value);
    else if (key == "beta_spec") {
      if (value == "setting_i") cfg.beta_spec = BetaSpec::SettingI;
      else if (value == "setting_ii") cfg.beta_spec = BetaSpec::SettingII;
      else if (value == "custom") cfg.beta_spec = BetaSpec::Custom;
      else throw ConfigError("unknown beta_spec: " + value);
    } else if (key == "custom_beta") {
      cfg.custom_beta.clear();
      for (const auto& tok : split(value, ',')) {
        cfg.custom_beta.push_back(std::stod(tok));
      }
    } else if (key == "sigma_design") {
      if (value == "identity") cfg.sigma_design = DesignCov::Identity;
      else if (value == "equicorrelated")
        cfg.sigma_design = DesignCov::Equicorrelated;
      else throw ConfigError("unknown sigma_design: " + value);
    } else if (key == "rho") cfg.rho = std::stod(value);
    else if (key == "noise_sigma") cfg.noise_sigma = std::stod(value);
    else if (key == "n_reps") cfg.n_reps = std::stoi(value);
    else if (key == "B") cfg.B = std::stoi(value);
    else if (key == "level") cfg.level = std::stod(value);
    else if (key == "tested_coords") {
      cfg.tested_coords.clear();
      cfg.test_all_coords = false;
      if (value == "auto") {
        // default selection
      } else if (value == "all") {
        cfg.test_all_coords = true;  // expanded once p is final
      } else {
        for (const auto& tok : split(value, ',')) {
          cfg.tested_coords.push_back(std::stoll(tok) - 1);  // 1-based input
        }
      }
    } else if (key == "null_coords") cfg.null_coords = std::stoi(value);
    else if (key == "master_seed") cfg.master_seed = std::stoull(value);
    else if (key == "methods") {
      cfg.methods.clear();
      for (const auto& tok : split(value, ',')) {
        if (tok == "bsdb") cfg.methods.push_back(Method::BsDb);
        else if (tok == "db") cfg.methods.push_back(Method::Db);
        else if (tok == "ddb") cfg.methods.push_back(Method::DdbPlugin);
        else throw ConfigError("unknown method: " + tok);
      }
    } else if (key == "design_mode") {
      if (value == "fixed") cfg.design_mode = DesignMode::Fixed;
      else if (value == "redraw") cfg.design_mode = DesignMode::Redraw;
      else throw ConfigError("unknown design_mode: " + value);
    } else if (key == "force_standardize") {
      cfg.force_standardize = value == "true" || value == "1";
    } else if (key == "lambda_scale") cfg.lambda_scale = std::stod(value);
    else if (key == "threads") cfg.threads = std::stoi(value);
    else if (key == "kkt_tol") cfg.solver.kkt_tol = std::stod(value);
    else if (key == "max_sweeps") cfg.solver.max_sweeps = std::stoi(value);
    else if (key == "coord_tol") cfg.solver.coord_tol = std::stod(value);
    else throw ConfigError("unknown config key: " + key);
  }
  return cfg;
}

SimConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

}  // namespace hdinfer
