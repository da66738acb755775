#include "mrfuse/rng.hpp"

#include <cmath>

#include "mrfuse/errors.hpp"

namespace mrfuse {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream)
    : key_(mix64(seed + kGolden) ^ mix64(stream * 0xD2B74407B1CE6E93ULL + 1)) {}

std::uint64_t Rng::next_u64() { return mix64(key_ + kGolden * ++counter_); }

double Rng::next_double() {
  // 53 mantissa bits, shifted into (0, 1].
  return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
}

double Rng::next_gaussian() {
  if (have_spare_gaussian_) {
    have_spare_gaussian_ = false;
    return spare_gaussian_;
  }
  const double u1 = next_double();  // > 0, log is safe
  const double u2 = next_double();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * M_PI * u2;
  spare_gaussian_ = r * std::sin(theta);
  have_spare_gaussian_ = true;
  return r * std::cos(theta);
}

double Rng::next_gamma(double shape, double scale) {
  if (!(shape > 0.0) || !(scale > 0.0)) {
    throw ParamError("next_gamma: shape and scale must be positive");
  }
  if (shape < 1.0) {
    // Boost to shape + 1 and correct with U^(1/shape).
    const double g = next_gamma(shape + 1.0, 1.0);
    const double u = next_double();
    return scale * g * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x;
    double v;
    do {
      x = next_gaussian();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = next_double();
    if (u < 1.0 - 0.0331 * x * x * x * x) return scale * d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
      return scale * d * v;
  }
}

std::uint64_t Rng::next_poisson(double mean) {
  if (mean < 0.0 || !std::isfinite(mean)) {
    throw ParamError("next_poisson: mean must be finite and nonnegative");
  }
  if (mean == 0.0) return 0;
  if (mean <= 64.0) {
    const double limit = std::exp(-mean);
    std::uint64_t k = 0;
    double p = next_double();
    while (p > limit) {
      ++k;
      p *= next_double();
    }
    return k;
  }
  const double draw = mean + std::sqrt(mean) * next_gaussian();
  return draw <= 0.0 ? 0 : static_cast<std::uint64_t>(std::llround(draw));
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return mix64(master + kGolden * (index + 1));
}

}  // namespace mrfuse
