#pragma once

#include <vector>

#include "hdinfer/types.hpp"

namespace hdinfer {

struct SolverConfig {
  double kkt_tol = 1e-8;     // max KKT violation accepted as converged
  int max_sweeps = 100000;
  double coord_tol = 1e-10;  // per-sweep max coefficient change for early exit
  bool track_objective = false;
};

struct LassoFit {
  Vector beta_hat;
  std::vector<Index> active_set;  // sorted nonzero support
  double lambda = 0.0;
  double kkt_gap = 0.0;
  int iterations = 0;  // completed sweeps
  bool converged = false;
  std::vector<double> objective_trace;  // per sweep, when tracked
};

// Max KKT violation of beta for the objective 1/(2n)||y - Xb||^2 + lambda|b|_1:
//   |x_j'(y - Xb)/n - lambda sgn(b_j)|        for b_j != 0
//   max(0, |x_j'(y - Xb)/n| - lambda)         for b_j == 0
double kkt_gap(const Matrix& X, const Vector& y, const Vector& beta,
               double lambda);

// Cyclic coordinate descent.  Ties at the soft-threshold kink resolve to
// exactly zero.  A non-converged fit is returned with converged = false
// rather than thrown.
LassoFit fit_lasso(const RegressionData& data, double lambda,
                   const SolverConfig& config = {},
                   const Vector* warm_start = nullptr);

// sigma * sqrt(2 log p / n).  With sigma_estimate = 0 the sample standard
// deviation of y is used as a pilot scale.  Requires p >= 2.
double universal_lambda(const RegressionData& data, double sigma_estimate);

struct PipelineResult {
  LassoFit fit;
  double sigma2 = 0.0;  // noise-variance estimate on the final fit
  double lambda = 0.0;
};

// Fits at the universal level lambda = lambda_scale * lambda_sigma *
// sqrt(2 log p / n) and estimates the noise variance on that fit.
// lambda_sigma is the noise scale the penalty is calibrated to (the true
// sigma when known, e.g. in simulations; 1 by default).
PipelineResult fit_lasso_pipeline(const RegressionData& data,
                                  const SolverConfig& config = {},
                                  double lambda_sigma = 1.0,
                                  double lambda_scale = 1.0);

}  // namespace hdinfer
