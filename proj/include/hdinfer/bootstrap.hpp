#pragma once

#include <span>
#include <vector>

#include "hdinfer/debias.hpp"
#include "hdinfer/lasso.hpp"
#include "hdinfer/types.hpp"

namespace hdinfer {

enum class Method { BsDb, Db, DdbPlugin };

// Bootstrap draws of beta*_j^(DB) - beta_hat_j for one coordinate.
struct BootstrapDistribution {
  Index j = 0;
  std::vector<double> draws;  // length B - refit_failures
  int B = 0;
  SeedSpec seed;
  int refit_failures = 0;
};

struct ConfidenceInterval {
  Index j = 0;
  double lower = 0.0;
  double upper = 0.0;
  double level = 0.0;
  Method method = Method::BsDb;
};

struct PivotValues {
  double r_j = 0.0;      // (z'x_j/||z||)(beta_db - beta_j)
  double r_j_ddb = 0.0;  // (z'x_j)/(sigma_hat ||z||)(beta_ddb - beta_j)
  double scale = 0.0;    // z'x_j/||z||
};

// Gaussian residual bootstrap: for each b, y* = X beta_hat + sigma_hat xi
// with xi from gaussian_stream(seed.substream(b), n), the lasso refit at the
// same lambda (warm-started from beta_hat), and the debiased recomputation
// reusing the same z.  Failed refits are dropped; more than 20% of B throws.
BootstrapDistribution bootstrap_debiased(const RegressionData& data,
                                         const LassoFit& fit, double sigma_hat,
                                         const DebiasArtifacts& art, int B,
                                         SeedSpec seed,
                                         const SolverConfig& config = {});

// Same draws for several coordinates sharing the B refits (the refit does not
// depend on the coordinate, so the result is bit-identical to calling
// bootstrap_debiased per coordinate with the same seed).
std::vector<BootstrapDistribution> bootstrap_debiased_multi(
    const RegressionData& data, const LassoFit& fit, double sigma_hat,
    std::span<const DebiasArtifacts> arts, int B, SeedSpec seed,
    const SolverConfig& config = {});

// Order-statistic quantile: sorted value at rank ceil(alpha * m), clamped to
// [1, m].
double empirical_quantile(std::span<const double> draws, double alpha);

// (beta_db - q_{1-alpha/2}(draws), beta_db - q_{alpha/2}(draws)).
ConfidenceInterval percentile_ci(double beta_db,
                                 const BootstrapDistribution& dist,
                                 double level);

// Double-debiased estimate: beta_db - median(draws), lower median for even
// counts.
double ddb_estimate(double beta_db, const BootstrapDistribution& dist);

// Pivot statistics; requires the true beta_j (simulation use).
PivotValues pivots(const DebiasedEstimate& est, double ddb,
                   const DebiasArtifacts& art, double sigma_hat,
                   double beta_true_j);

}  // namespace hdinfer
