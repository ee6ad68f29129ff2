#include "hdinfer/bootstrap.hpp"

#include <algorithm>
#include <cmath>

#include "hdinfer/rng.hpp"

namespace hdinfer {

std::vector<BootstrapDistribution> bootstrap_debiased_multi(
    const RegressionData& data, const LassoFit& fit, double sigma_hat,
    std::span<const DebiasArtifacts> arts, int B, SeedSpec seed,
    const SolverConfig& config) {
  if (B < 1) throw std::invalid_argument("B must be >= 1");
  if (sigma_hat < 0.0) {
    throw std::invalid_argument("sigma_hat must be nonnegative");
  }
  const Index n = data.n();
  for (const auto& art : arts) {
    if (art.denom <= 1e-8 * static_cast<double>(n)) {
      throw DegenerateDirectionError(art.j, art.denom);
    }
  }

  std::vector<BootstrapDistribution> out(arts.size());
  for (std::size_t k = 0; k < arts.size(); ++k) {
    out[k].j = arts[k].j;
    out[k].B = B;
    out[k].seed = seed;
    out[k].draws.reserve(static_cast<std::size_t>(B));
  }

  const Vector fitted = data.X * fit.beta_hat;
  RegressionData boot = data;  // shares X; y replaced per draw
  int failures = 0;
  for (int b = 0; b < B; ++b) {
    const Vector xi = gaussian_vector(seed.substream(static_cast<std::uint64_t>(b)), n);
    boot.y = fitted + sigma_hat * xi;
    LassoFit refit;
    bool ok = true;
    try {
      refit = fit_lasso(boot, fit.lambda, config, &fit.beta_hat);
      ok = refit.converged;
    } catch (const NonFiniteError&) {
      ok = false;
    }
    if (!ok) {
      ++failures;
      continue;
    }
    const Vector residual = boot.y - data.X * refit.beta_hat;
    for (std::size_t k = 0; k < arts.size(); ++k) {
      const auto& art = arts[k];
      const double star_db =
          refit.beta_hat[art.j] + art.z.dot(residual) / art.denom;
      out[k].draws.push_back(star_db - fit.beta_hat[art.j]);
    }
  }

  if (5 * failures > B) {
    throw TooManyRefitFailuresError(
        std::to_string(failures) + " of " + std::to_string(B) +
        " bootstrap refits failed (more than 20%)");
  }
  for (auto& dist : out) dist.refit_failures = failures;
  return out;
}

BootstrapDistribution bootstrap_debiased(const RegressionData& data,
                                         const LassoFit& fit, double sigma_hat,
                                         const DebiasArtifacts& art, int B,
                                         SeedSpec seed,
                                         const SolverConfig& config) {
  auto dists = bootstrap_debiased_multi(data, fit, sigma_hat, {&art, 1}, B,
                                        seed, config);
  return std::move(dists.front());
}

double empirical_quantile(std::span<const double> draws, double alpha) {
  if (draws.empty()) throw EmptyDrawsError("no draws to take a quantile of");
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw InvalidAlphaError("quantile level must be in (0,1)");
  }
  const auto m = static_cast<double>(draws.size());
  auto rank = static_cast<std::size_t>(std::ceil(alpha * m));
  rank = std::clamp<std::size_t>(rank, 1, draws.size());
  std::vector<double> sorted(draws.begin(), draws.end());
  std::nth_element(sorted.begin(), sorted.begin() + (rank - 1), sorted.end());
  return sorted[rank - 1];
}

ConfidenceInterval percentile_ci(double beta_db,
                                 const BootstrapDistribution& dist,
                                 double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw InvalidAlphaError("confidence level must be in (0,1)");
  }
  const double alpha = 1.0 - level;
  ConfidenceInterval ci;
  ci.j = dist.j;
  ci.level = level;
  ci.method = Method::BsDb;
  ci.lower = beta_db - empirical_quantile(dist.draws, 1.0 - alpha / 2.0);
  ci.upper = beta_db - empirical_quantile(dist.draws, alpha / 2.0);
  return ci;
}

double ddb_estimate(double beta_db, const BootstrapDistribution& dist) {
  return beta_db - empirical_quantile(dist.draws, 0.5);
}

PivotValues pivots(const DebiasedEstimate& est, double ddb,
                   const DebiasArtifacts& art, double sigma_hat,
                   double beta_true_j) {
  if (!(sigma_hat > 0.0)) {
    throw ZeroSigmaError("sigma_hat must be positive for the DDB pivot");
  }
  PivotValues pv;
  pv.scale = art.denom / std::sqrt(art.z_norm2);
  pv.r_j = pv.scale * (est.beta_db - beta_true_j);
  pv.r_j_ddb = pv.scale / sigma_hat * (ddb - beta_true_j);
  return pv;
}

}  // namespace hdinfer
