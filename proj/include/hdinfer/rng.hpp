#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "hdinfer/types.hpp"

namespace hdinfer {

// Counter-based generator: the state is a keyed counter advanced by a fixed
// odd increment and the output is an avalanche hash of the counter
// (splitmix64).  Draws are bit-identical for equal SeedSpec on any platform
// with IEEE doubles, and streams for distinct (master_seed, stream_id) keys
// are independent for all practical purposes.
class CounterRng {
 public:
  explicit CounterRng(SeedSpec seed);

  std::uint64_t next_u64();

  // Uniform on (0, 1].
  double uniform();

  // Standard normal via Box-Muller; two uniforms per variate.
  double normal();

 private:
  std::uint64_t state_;
};

// `count` i.i.d. standard normal variates, deterministic in `seed`.
std::vector<double> gaussian_stream(SeedSpec seed, std::size_t count);

// Same stream written into an Eigen vector.
Vector gaussian_vector(SeedSpec seed, Index count);

// Inverse standard normal CDF, accurate to ~1e-14 (rational approximation
// plus one Halley refinement).
double normal_quantile(double prob);

// Standard normal CDF.
double normal_cdf(double x);

}  // namespace hdinfer
