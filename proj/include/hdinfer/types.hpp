#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace hdinfer {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// A regression problem: n observations (rows of X), p predictors, response y.
// column_scales records the factor each raw column was multiplied by, so
// X = X_raw * diag(column_scales) always holds.  `standardized` means the
// columns are on the ||x_j||_2^2 = n scale, either exactly (via standardize)
// or by construction (unit-variance simulated designs).
struct RegressionData {
  Matrix X;
  Vector y;
  Vector column_scales;
  bool standardized = false;

  Index n() const { return X.rows(); }
  Index p() const { return X.cols(); }
};

// Identifies one deterministic random stream.  Equal (master_seed, stream_id)
// always reproduce the same stream; distinct stream_ids give statistically
// independent streams (counter-based derivation, see rng.hpp).
struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_id = 0;

  // Derived stream, independent of this one for distinct k.
  SeedSpec substream(std::uint64_t k) const;
};

struct ZeroColumnError : std::runtime_error {
  explicit ZeroColumnError(Index column)
      : std::runtime_error("column " + std::to_string(column) +
                           " is identically zero"),
        column(column) {}
  Index column;
};

struct LengthMismatchError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonFiniteError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DegenerateResponseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DegenerateDirectionError : std::runtime_error {
  explicit DegenerateDirectionError(Index j, double denom)
      : std::runtime_error("direction for coordinate " + std::to_string(j) +
                           " is nearly orthogonal to x_j (z'x_j = " +
                           std::to_string(denom) + ")"),
        j(j),
        denom(denom) {}
  Index j;
  double denom;
};

struct SaturatedFitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidAlphaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EmptyDrawsError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TooManyRefitFailuresError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ZeroSigmaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SingularSupportGramError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SingularCovarianceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AllReplicationsFailedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Throws if the data violates basic shape/finiteness invariants.
void validate(const RegressionData& data);

}  // namespace hdinfer
