#pragma once

#include "hdinfer/types.hpp"

namespace hdinfer {

// Rescales every column to ||x_j||_2^2 = n.  Columns are scaled, never
// centered.  Idempotent; composes scale factors into column_scales so that
// X = X_raw * diag(column_scales) keeps holding.
RegressionData standardize(const RegressionData& data);

// Maps coefficients fitted on the standardized columns back to the raw
// column scale: out_j = beta_std_j * scales_j.
Vector destandardize_coefficients(const Vector& beta_std, const Vector& scales);

}  // namespace hdinfer
