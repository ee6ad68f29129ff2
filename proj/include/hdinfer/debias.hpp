#pragma once

#include "hdinfer/lasso.hpp"
#include "hdinfer/types.hpp"

namespace hdinfer {

// Debiasing direction for one coordinate: z is the residual of the nodewise
// lasso of x_j on the remaining columns.
struct DebiasArtifacts {
  Index j = 0;
  Vector z;               // length n, z = x_j - X_{-j} gamma
  Vector gamma;           // length p-1, nodewise coefficients
  double lambda_j = 0.0;
  double denom = 0.0;     // z'x_j
  double z_norm2 = 0.0;   // ||z||_2^2
  double nodewise_kkt_gap = 0.0;
  // Regularity diagnostics, attached but never gating:
  double z4_ratio = 0.0;  // ||z||_4^4 / ||z||_2^4
  double z2_over_n = 0.0; // ||z||_2^2 / n
};

struct DebiasedEstimate {
  Index j = 0;
  double beta_db = 0.0;
  double beta_lasso = 0.0;
  double correction = 0.0;  // z'(y - X beta_hat) / z'x_j
};

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

// Solves the nodewise lasso and assembles the direction.  Refuses coordinates
// whose direction is nearly orthogonal to x_j (denom <= 1e-8 * n).
DebiasArtifacts nodewise_direction(const RegressionData& data, Index j,
                                   double lambda_j,
                                   const SolverConfig& config = {});

// ||y - X beta_hat||^2 / (n - |S_hat|).
double estimate_noise_variance(const RegressionData& data, const LassoFit& fit);

// beta_db = beta_lasso_j + z'(y - X beta_hat) / z'x_j.
DebiasedEstimate debias(const RegressionData& data, const LassoFit& fit,
                        const DebiasArtifacts& art);

// Plug-in normal interval centered at beta_db with half-width
// sigma_hat * z_{1-alpha/2} * ||z||_2 / (z'x_j).
Interval plugin_ci(const DebiasedEstimate& est, const DebiasArtifacts& art,
                   double sigma_hat, double alpha);

}  // namespace hdinfer
