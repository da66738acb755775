#pragma once

#include <cstdint>

namespace mrfuse {

// Counter-based generator: every draw is a pure function of
// (seed, stream, counter), so runs are reproducible bit-for-bit and
// independent substreams are cheap to derive. The mixing function is the
// splitmix64 finalizer.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64();

  // Uniform on (0, 1].
  double next_double();

  // Standard normal via Box-Muller.
  double next_gaussian();

  // Gamma(shape, scale) via Marsaglia-Tsang; shape > 0, scale > 0.
  double next_gamma(double shape, double scale);

  // Poisson with the given nonnegative mean. Exact product method for small
  // means, rounded normal approximation beyond mean = 64.
  std::uint64_t next_poisson(double mean);

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
  bool have_spare_gaussian_ = false;
  double spare_gaussian_ = 0.0;
};

// Derives a solver seed for an independent trial from a master seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

}  // namespace mrfuse
