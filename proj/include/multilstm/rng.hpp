#pragma once

#include <cstdint>

namespace multilstm {

// Deterministic seeded generator: xoshiro256** seeded through splitmix64.
// Identical seed gives an identical stream on every platform; split()
// produces independent deterministic substreams. Distributions are
// hand-rolled so no standard-library variation can leak in.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  // Uniform in [0, 1).
  double uniform();
  // Uniform in [lo, hi).
  double uniform(double lo, double hi);
  // Uniform integer in [lo, hi] inclusive, unbiased via rejection.
  int uniform_int(int lo, int hi);
  // Standard normal via Box-Muller (two uniform draws per call).
  double normal();

  // Independent substream; deterministic in (parent state, tag).
  Rng split(std::uint64_t tag);

 private:
  std::uint64_t s_[4];
};

}  // namespace multilstm
