#include "hdinfer/standardize.hpp"

#include <cmath>

namespace hdinfer {

void validate(const RegressionData& data) {
  if (data.n() < 2) throw std::invalid_argument("need at least 2 observations");
  if (data.p() < 1) throw std::invalid_argument("need at least 1 column");
  if (data.y.size() != data.n()) {
    throw LengthMismatchError("y length does not match row count of X");
  }
  if (!data.X.allFinite() || !data.y.allFinite()) {
    throw NonFiniteError("data contains non-finite entries");
  }
}

RegressionData standardize(const RegressionData& data) {
  validate(data);
  const Index n = data.n();
  const Index p = data.p();

  RegressionData out = data;
  if (out.column_scales.size() != p) {
    out.column_scales = Vector::Ones(p);
  }
  const double sqrt_n = std::sqrt(static_cast<double>(n));
  for (Index j = 0; j < p; ++j) {
    const double norm = out.X.col(j).norm();
    if (norm == 0.0) throw ZeroColumnError(j);
    const double scale = sqrt_n / norm;
    out.X.col(j) *= scale;
    out.column_scales[j] *= scale;
  }
  out.standardized = true;
  return out;
}

Vector destandardize_coefficients(const Vector& beta_std, const Vector& scales) {
  if (beta_std.size() != scales.size()) {
    throw LengthMismatchError("coefficient and scale vectors differ in length");
  }
  return beta_std.cwiseProduct(scales);
}

}  // namespace hdinfer
