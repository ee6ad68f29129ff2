#include "hdinfer/lasso.hpp"

#include <cmath>
#include <limits>

#include "hdinfer/debias.hpp"

namespace hdinfer {

namespace {

double soft_threshold(double v, double lambda) {
  if (v > lambda) return v - lambda;
  if (v < -lambda) return v + lambda;
  return 0.0;
}

double objective(const Vector& residual, const Vector& beta, double lambda,
                 Index n) {
  return 0.5 * residual.squaredNorm() / static_cast<double>(n) +
         lambda * beta.lpNorm<1>();
}

}  // namespace

double kkt_gap(const Matrix& X, const Vector& y, const Vector& beta,
               double lambda) {
  const Index n = X.rows();
  const Vector grad = X.transpose() * (y - X * beta) / static_cast<double>(n);
  double gap = 0.0;
  for (Index j = 0; j < X.cols(); ++j) {
    double v;
    if (beta[j] != 0.0) {
      v = std::abs(grad[j] - lambda * (beta[j] > 0 ? 1.0 : -1.0));
    } else {
      v = std::max(0.0, std::abs(grad[j]) - lambda);
    }
    gap = std::max(gap, v);
  }
  return gap;
}

LassoFit fit_lasso(const RegressionData& data, double lambda,
                   const SolverConfig& config, const Vector* warm_start) {
  validate(data);
  if (!data.standardized) {
    throw std::invalid_argument("fit_lasso requires standardized data");
  }
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");

  const Index n = data.n();
  const Index p = data.p();
  const Matrix& X = data.X;
  const Vector& y = data.y;
  const double inv_n = 1.0 / static_cast<double>(n);

  // Diagonal of the Gram matrix; == 1 for exactly standardized columns but
  // kept general for unit-variance simulated designs.
  Vector col_sq(p);
  for (Index j = 0; j < p; ++j) col_sq[j] = X.col(j).squaredNorm() * inv_n;

  LassoFit fit;
  fit.lambda = lambda;
  if (warm_start != nullptr && warm_start->size() == p) {
    fit.beta_hat = *warm_start;
  } else {
    fit.beta_hat = Vector::Zero(p);
  }
  Vector& beta = fit.beta_hat;
  Vector residual = y - X * beta;

  const auto update_coord = [&](Index j) {
    const double old = beta[j];
    const double g = X.col(j).dot(residual) * inv_n + col_sq[j] * old;
    const double updated = soft_threshold(g, lambda) / col_sq[j];
    if (updated != old) {
      residual.noalias() -= X.col(j) * (updated - old);
      beta[j] = updated;
      return std::abs(updated - old);
    }
    return 0.0;
  };
  const auto end_sweep = [&](double max_change) {
    ++fit.iterations;
    if (config.track_objective) {
      fit.objective_trace.push_back(objective(residual, beta, lambda, n));
    }
    if (!std::isfinite(max_change) || !residual.allFinite()) {
      throw NonFiniteError("lasso objective became non-finite");
    }
  };

  std::vector<Index> active;
  int sweeps_since_refresh = 0;
  while (fit.iterations < config.max_sweeps) {
    // Full pass over all coordinates.
    double max_change = 0.0;
    for (Index j = 0; j < p; ++j) {
      max_change = std::max(max_change, update_coord(j));
    }
    end_sweep(max_change);
    if (max_change <= config.coord_tol) {
      residual = y - X * beta;
      sweeps_since_refresh = 0;
      fit.kkt_gap = kkt_gap(X, y, beta, lambda);
      if (fit.kkt_gap <= config.kkt_tol) {
        fit.converged = true;
        break;
      }
      continue;
    }
    // Iterate on the current active set until it stabilizes, then re-check
    // with a full pass.
    active.clear();
    for (Index j = 0; j < p; ++j) {
      if (beta[j] != 0.0) active.push_back(j);
    }
    while (fit.iterations < config.max_sweeps) {
      double inner_change = 0.0;
      for (Index j : active) {
        inner_change = std::max(inner_change, update_coord(j));
      }
      end_sweep(inner_change);
      if (++sweeps_since_refresh >= 64) {
        residual = y - X * beta;  // kill accumulated drift
        sweeps_since_refresh = 0;
      }
      if (inner_change <= config.coord_tol) break;
    }
  }
  if (!fit.converged) {
    residual = y - X * beta;
    fit.kkt_gap = kkt_gap(X, y, beta, lambda);
    fit.converged = fit.kkt_gap <= config.kkt_tol;
  }

  for (Index j = 0; j < p; ++j) {
    if (beta[j] != 0.0) fit.active_set.push_back(j);
  }
  return fit;
}

double universal_lambda(const RegressionData& data, double sigma_estimate) {
  validate(data);
  const Index n = data.n();
  const Index p = data.p();
  if (p < 2) {
    throw std::invalid_argument(
        "universal_lambda requires p >= 2 (log p vanishes at p = 1)");
  }
  if (sigma_estimate < 0.0) {
    throw std::invalid_argument("sigma_estimate must be nonnegative");
  }
  double sigma = sigma_estimate;
  if (sigma == 0.0) {
    const double mean = data.y.mean();
    sigma = std::sqrt((data.y.array() - mean).square().sum() /
                      static_cast<double>(n - 1));
    if (sigma == 0.0) {
      throw DegenerateResponseError("pilot scale of y is zero");
    }
  }
  return sigma * std::sqrt(2.0 * std::log(static_cast<double>(p)) /
                           static_cast<double>(n));
}

PipelineResult fit_lasso_pipeline(const RegressionData& data,
                                  const SolverConfig& config,
                                  double lambda_sigma, double lambda_scale) {
  PipelineResult result;
  result.lambda = lambda_scale * universal_lambda(data, lambda_sigma);
  result.fit = fit_lasso(data, result.lambda, config);
  result.sigma2 = estimate_noise_variance(data, result.fit);
  return result;
}

}  // namespace hdinfer
