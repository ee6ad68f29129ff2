#pragma once

#include <limits>
#include <string>
#include <vector>

#include "hdinfer/debias.hpp"
#include "hdinfer/lasso.hpp"
#include "hdinfer/types.hpp"

namespace hdinfer {

// Numeric evaluation of the support-recovery conditions.  The empirical
// variant is computed from the sample Gram matrix; the population variant
// from a covariance matrix, with its own extra fields.
struct ConditionReport {
  double kappa = 0.0;   // incoherence ||G_{S^c,S} G_{S,S}^{-1}||_inf
  double K1 = 0.0;      // ||G_{S,S}^{-1}||_inf
  double C_min = 0.0;   // smallest eigenvalue of G_{S,S}
  double K0 = 0.0;      // max |X_ij| (empirical only)
  double z4_ratio = std::numeric_limits<double>::quiet_NaN();
  double z2_over_n = std::numeric_limits<double>::quiet_NaN();
  int s = 0;
  int s_tilde = 0;
  double g1 = std::numeric_limits<double>::quiet_NaN();
  double g1_prime = std::numeric_limits<double>::quiet_NaN();
  // Population-only fields:
  double C_star = std::numeric_limits<double>::quiet_NaN();   // max_j Sigma_jj
  double C_lower = std::numeric_limits<double>::quiet_NaN();  // 1/max_j (Sigma^-1)_jj
  double g2 = std::numeric_limits<double>::quiet_NaN();
  double C_n = std::numeric_limits<double>::quiet_NaN();
  int precision_col_sparsity = -1;  // max column sparsity of Sigma^-1
  bool asymptotic_range = true;     // false when C_n >= 1 (or undefined)
};

// Exact error decomposition of the debiased estimator:
// total = noise + bias + remainder whenever the support Gram is invertible.
struct ErrorDecomposition {
  double noise = 0.0;
  double bias = 0.0;
  double remainder = 0.0;
  double total = 0.0;     // beta_db - beta_j
  bool sign_form = false; // remainder via the sign-difference formula
};

// Empirical conditions on the sample Gram restricted to S, plus the
// weak-signal count s_tilde for the band g1(lambda) + g1'(lambda).
ConditionReport condition_report(const RegressionData& data,
                                 const std::vector<Index>& S,
                                 const DebiasArtifacts& art,
                                 const Vector& beta_true, double lambda,
                                 double sigma);

// beta^o_S = beta_S + G^{-1}(X_S'eps/n) - lambda G^{-1} sgn(beta_S), zero off
// S.  sgn(0) = 0.
Vector oracle_estimator(const RegressionData& data, const std::vector<Index>& S,
                        const Vector& beta_true, const Vector& eps,
                        double lambda);

// Noise / Bias / Remainder split of beta_db - beta_j.  When S_hat is inside
// S the remainder uses the sign-difference form with the KKT-implied
// subgradient (exactly zero under sign consistency); otherwise it falls back
// to total - noise - bias.
ErrorDecomposition decompose_error(const RegressionData& data,
                                   const std::vector<Index>& S,
                                   const Vector& beta_true, const Vector& eps,
                                   const LassoFit& fit,
                                   const DebiasArtifacts& art, double lambda);

// Population-covariance variant of the conditions, including C*, C_*, the
// finite-sample factor C_n and the band 2 g2(lambda).
ConditionReport population_condition_report(const Matrix& Sigma,
                                            const std::vector<Index>& S,
                                            const Vector& beta_true,
                                            double lambda, double n,
                                            double sigma);

// Flat key = value text block.
std::string to_text(const ConditionReport& report);

// JSON object as a string.
std::string to_json_string(const ConditionReport& report);

}  // namespace hdinfer
