#include "hdinfer/debias.hpp"

#include <cmath>

#include "hdinfer/rng.hpp"

namespace hdinfer {

DebiasArtifacts nodewise_direction(const RegressionData& data, Index j,
                                   double lambda_j,
                                   const SolverConfig& config) {
  validate(data);
  const Index n = data.n();
  const Index p = data.p();
  if (p < 2) throw std::invalid_argument("nodewise regression requires p >= 2");
  if (j < 0 || j >= p) throw std::out_of_range("coordinate index out of range");
  if (!(lambda_j > 0.0)) {
    throw std::invalid_argument("lambda_j must be positive");
  }

  RegressionData node;
  node.X.resize(n, p - 1);
  node.X.leftCols(j) = data.X.leftCols(j);
  node.X.rightCols(p - 1 - j) = data.X.rightCols(p - 1 - j);
  node.y = data.X.col(j);
  node.standardized = data.standardized;

  const LassoFit fit = fit_lasso(node, lambda_j, config);

  DebiasArtifacts art;
  art.j = j;
  art.gamma = fit.beta_hat;
  art.lambda_j = lambda_j;
  art.z = node.y - node.X * fit.beta_hat;
  art.denom = art.z.dot(data.X.col(j));
  art.z_norm2 = art.z.squaredNorm();
  art.nodewise_kkt_gap = fit.kkt_gap;
  art.z2_over_n = art.z_norm2 / static_cast<double>(n);
  const double z4 = art.z.array().pow(4).sum();
  art.z4_ratio = z4 / (art.z_norm2 * art.z_norm2);

  if (art.denom <= 1e-8 * static_cast<double>(n)) {
    throw DegenerateDirectionError(j, art.denom);
  }
  return art;
}

double estimate_noise_variance(const RegressionData& data,
                               const LassoFit& fit) {
  const Index n = data.n();
  const auto nonzeros = static_cast<Index>(fit.active_set.size());
  if (nonzeros >= n) {
    throw SaturatedFitError("support size " + std::to_string(nonzeros) +
                            " leaves no residual degrees of freedom");
  }
  const double rss = (data.y - data.X * fit.beta_hat).squaredNorm();
  return rss / static_cast<double>(n - nonzeros);
}

DebiasedEstimate debias(const RegressionData& data, const LassoFit& fit,
                        const DebiasArtifacts& art) {
  if (art.denom <= 1e-8 * static_cast<double>(data.n())) {
    throw DegenerateDirectionError(art.j, art.denom);
  }
  DebiasedEstimate est;
  est.j = art.j;
  est.beta_lasso = fit.beta_hat[art.j];
  est.correction = art.z.dot(data.y - data.X * fit.beta_hat) / art.denom;
  est.beta_db = est.beta_lasso + est.correction;
  return est;
}

Interval plugin_ci(const DebiasedEstimate& est, const DebiasArtifacts& art,
                   double sigma_hat, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw InvalidAlphaError("alpha must be in (0,1)");
  }
  if (sigma_hat < 0.0) {
    throw std::invalid_argument("sigma_hat must be nonnegative");
  }
  const double half = sigma_hat * normal_quantile(1.0 - alpha / 2.0) *
                      std::sqrt(art.z_norm2) / art.denom;
  return Interval{est.beta_db - half, est.beta_db + half};
}

}  // namespace hdinfer
