#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "mrfuse/matrix.hpp"
#include "mrfuse/operators.hpp"
#include "mrfuse/solver.hpp"

namespace mrfuse {

struct PlantedReference {
  Matrix V;  // W * H, exactly rank <= K
  Matrix W;  // column L1-normalized
  Matrix H;
};

// Low-rank planted reference with uniform-(0,1] factors.
PlantedReference planted_reference(std::size_t f, std::size_t n, std::size_t k,
                                   std::uint64_t seed);

// Noiseless degraded pair (X0, Y0) = (R V, V S).
std::pair<Matrix, Matrix> wald_generate(const Matrix& v,
                                        const SparseOperator& r,
                                        const SparseOperator& s);

// Additive noise model: a Poisson component (x1) drawn around the supplied
// means and/or a standard-normal component (x2) are Frobenius-normalized,
// mixed, and scaled so that the noise-to-signal ratio is exactly
// 10^(-snr_db/20) before the nonnegativity clip.
struct NoiseSpec {
  double snr_db = std::numeric_limits<double>::infinity();
  bool poisson = false;   // x1
  bool gaussian = false;  // x2
  // Multiplicative Gamma noise standard deviation, exclusive with the
  // additive model at the call sites that use it.
  std::optional<double> gamma_std;
  std::uint64_t seed = 0;
  // Alternative construction that calibrates the noise ratio independently
  // per band (matrix row) instead of globally.
  bool per_band = false;

  bool additive() const {
    return snr_db != std::numeric_limits<double>::infinity();
  }
  void validate() const;
};

// Returns max(0, clean + eps). poisson_mean must match clean's shape when the
// Poisson component is enabled (it is ignored otherwise).
Matrix make_additive_noise(const Matrix& clean, const Matrix& poisson_mean,
                           const NoiseSpec& spec);

// Entrywise product with i.i.d. Gamma variables of mean 1 and the given
// standard deviation (shape 1/std^2, scale std^2). Requires std in (0,1).
Matrix apply_gamma_noise(const Matrix& m, double std_dev, std::uint64_t seed);

struct Note {
  double freq_hz = 440.0;
  // Activation intervals [start, end) in seconds.
  std::vector<std::pair<double, double>> intervals;
};

struct AudioScene {
  std::vector<Note> notes;
  double sample_rate = 44100.0;
  double duration_s = 0.0;
  int harmonics = 8;
  double decay_rate = 3.0;  // amplitude decay per second after note onset

  void validate() const;
};

// Sum over active notes of a damped harmonic series with 1/h amplitudes.
std::vector<double> synth_audio(const AudioScene& scene);

enum class WindowFn { kHann, kRectangular };

// Magnitude short-time Fourier transform: window_len/2 + 1 rows, one column
// per frame, trailing partial frame truncated. window_len must be a power of
// two and the signal at least one window long.
Matrix spectrogram(const std::vector<double>& signal, std::size_t window_len,
                   std::size_t hop, WindowFn window = WindowFn::kHann);

struct OracleFactors {
  Matrix W;  // one column per note
  Matrix H;  // one row per note
};

// Per-note reference factors: each note is rendered in isolation, turned into
// a magnitude spectrogram at the given window length, and factorized at
// rank 1; the resulting vectors are concatenated.
OracleFactors oracle_factors(const AudioScene& scene, std::size_t window_len,
                             const BetaParam& beta = BetaParam(1.0),
                             std::uint64_t seed = 0);

}  // namespace mrfuse
