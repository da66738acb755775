#include "mrfuse/synth.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

namespace mrfuse {

namespace {

double frob(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// Builds the normalized mixture eps = eta * |clean|_F * N~ / |N~|_F for one
// block of entries; returns false on a degenerate (all-zero) draw.
bool draw_noise_block(const double* clean, const double* mean, std::size_t n,
                      const NoiseSpec& spec, Rng& rng,
                      std::vector<double>& eps) {
  std::vector<double> mixture(n, 0.0);
  if (spec.poisson) {
    std::vector<double> np(n);
    for (std::size_t i = 0; i < n; ++i) {
      np[i] = static_cast<double>(rng.next_poisson(mean[i]));
    }
    const double norm = frob(np);
    if (norm == 0.0) return false;
    for (std::size_t i = 0; i < n; ++i) mixture[i] += np[i] / norm;
  }
  if (spec.gaussian) {
    std::vector<double> nf(n);
    for (std::size_t i = 0; i < n; ++i) nf[i] = rng.next_gaussian();
    const double norm = frob(nf);
    if (norm == 0.0) return false;
    for (std::size_t i = 0; i < n; ++i) mixture[i] += nf[i] / norm;
  }
  const double mix_norm = frob(mixture);
  if (mix_norm == 0.0) return false;

  double clean_norm = 0.0;
  for (std::size_t i = 0; i < n; ++i) clean_norm += clean[i] * clean[i];
  clean_norm = std::sqrt(clean_norm);
  const double eta = std::pow(10.0, -spec.snr_db / 20.0);
  const double scale = eta * clean_norm / mix_norm;
  eps.resize(n);
  for (std::size_t i = 0; i < n; ++i) eps[i] = scale * mixture[i];
  return true;
}

// Iterative radix-2 FFT, in place. n must be a power of two.
void fft(std::vector<std::complex<double>>& a) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * M_PI / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

}  // namespace

PlantedReference planted_reference(std::size_t f, std::size_t n, std::size_t k,
                                   std::uint64_t seed) {
  if (k == 0 || k > std::min(f, n)) {
    throw ParamError("planted_reference: rank " + std::to_string(k) +
                     " outside [1, min(" + std::to_string(f) + "," +
                     std::to_string(n) + ")]");
  }
  Rng rng(seed);
  PlantedReference ref;
  ref.W = random_uniform(f, k, rng);
  for (std::size_t c = 0; c < k; ++c) {
    double mass = 0.0;
    for (std::size_t i = 0; i < f; ++i) mass += ref.W(i, c);
    for (std::size_t i = 0; i < f; ++i) ref.W(i, c) /= mass;
  }
  ref.H = random_uniform(k, n, rng);
  ref.V = matmul(ref.W, ref.H);
  return ref;
}

std::pair<Matrix, Matrix> wald_generate(const Matrix& v,
                                        const SparseOperator& r,
                                        const SparseOperator& s) {
  return {matmul(r, v), matmul(v, s)};
}

void NoiseSpec::validate() const {
  if (additive() && !poisson && !gaussian) {
    throw ParamError(
        "NoiseSpec: finite snr_db needs at least one of the Poisson and "
        "Gaussian components");
  }
  if (gamma_std && !(*gamma_std > 0.0 && *gamma_std < 1.0)) {
    throw ParamError("NoiseSpec: gamma_std must lie in (0,1)");
  }
}

Matrix make_additive_noise(const Matrix& clean, const Matrix& poisson_mean,
                           const NoiseSpec& spec) {
  spec.validate();
  if (!spec.additive()) return clean;
  if (spec.poisson && !clean.same_shape(poisson_mean)) {
    throw ShapeError("make_additive_noise: Poisson means " +
                     poisson_mean.shape_str() + " vs data " +
                     clean.shape_str());
  }

  Matrix out(clean.rows(), clean.cols());
  std::vector<double> eps;
  const std::size_t block = spec.per_band ? clean.cols() : clean.size();
  const std::size_t blocks = spec.per_band ? clean.rows() : 1;
  for (std::size_t b = 0; b < blocks; ++b) {
    const double* cp = clean.data() + b * block;
    const double* mp =
        spec.poisson ? poisson_mean.data() + b * block : nullptr;
    bool ok = false;
    for (std::uint64_t attempt = 0; attempt < 64 && !ok; ++attempt) {
      Rng rng(spec.seed, b * 64 + attempt);
      ok = draw_noise_block(cp, mp, block, spec, rng, eps);
    }
    if (!ok) {
      throw NumericError(
          "make_additive_noise: degenerate noise draw after 64 substreams");
    }
    double* op = out.data() + b * block;
    for (std::size_t i = 0; i < block; ++i) {
      op[i] = std::max(0.0, cp[i] + eps[i]);
    }
  }
  return out;
}

Matrix apply_gamma_noise(const Matrix& m, double std_dev, std::uint64_t seed) {
  if (!(std_dev > 0.0 && std_dev < 1.0)) {
    throw ParamError("apply_gamma_noise: std must lie in (0,1), got " +
                     std::to_string(std_dev));
  }
  const double shape = 1.0 / (std_dev * std_dev);
  const double scale = std_dev * std_dev;
  Rng rng(seed);
  Matrix out(m.rows(), m.cols());
  const double* pm = m.data();
  double* po = out.data();
  for (std::size_t i = 0; i < m.size(); ++i) {
    po[i] = pm[i] * rng.next_gamma(shape, scale);
  }
  return out;
}

void AudioScene::validate() const {
  if (!(sample_rate > 0.0) || !(duration_s > 0.0) || harmonics < 1) {
    throw ParamError("AudioScene: positive sample rate, duration and at least "
                     "one harmonic required");
  }
  for (const Note& note : notes) {
    const double top = note.freq_hz * harmonics;
    if (!(sample_rate > 2.0 * top)) {
      throw ParamError("AudioScene: harmonic " + std::to_string(top) +
                       " Hz exceeds Nyquist at fs = " +
                       std::to_string(sample_rate));
    }
    for (const auto& [start, end] : note.intervals) {
      if (start < 0.0 || end > duration_s || end <= start) {
        throw ParamError("AudioScene: interval [" + std::to_string(start) +
                         ", " + std::to_string(end) + ") outside [0, " +
                         std::to_string(duration_s) + ")");
      }
    }
  }
}

std::vector<double> synth_audio(const AudioScene& scene) {
  scene.validate();
  const auto total =
      static_cast<std::size_t>(std::llround(scene.duration_s * scene.sample_rate));
  std::vector<double> signal(total, 0.0);
  for (const Note& note : scene.notes) {
    for (const auto& [start, end] : note.intervals) {
      const auto first =
          static_cast<std::size_t>(std::ceil(start * scene.sample_rate));
      const auto last = std::min(
          total, static_cast<std::size_t>(std::ceil(end * scene.sample_rate)));
      for (std::size_t t = first; t < last; ++t) {
        const double t_rel =
            static_cast<double>(t) / scene.sample_rate - start;
        const double envelope = std::exp(-scene.decay_rate * t_rel);
        double v = 0.0;
        for (int h = 1; h <= scene.harmonics; ++h) {
          v += std::sin(2.0 * M_PI * h * note.freq_hz * t_rel) / h;
        }
        signal[t] += envelope * v;
      }
    }
  }
  return signal;
}

Matrix spectrogram(const std::vector<double>& signal, std::size_t window_len,
                   std::size_t hop, WindowFn window) {
  if (window_len == 0 || (window_len & (window_len - 1)) != 0) {
    throw ParamError("spectrogram: window length " +
                     std::to_string(window_len) + " is not a power of two");
  }
  if (hop == 0) throw ParamError("spectrogram: hop must be >= 1");
  if (signal.size() < window_len) {
    throw ParamError("spectrogram: signal of " +
                     std::to_string(signal.size()) +
                     " samples is shorter than one window of " +
                     std::to_string(window_len));
  }
  const std::size_t frames = (signal.size() - window_len) / hop + 1;
  const std::size_t bins = window_len / 2 + 1;

  std::vector<double> taper(window_len, 1.0);
  if (window == WindowFn::kHann) {
    for (std::size_t i = 0; i < window_len; ++i) {
      taper[i] = 0.5 * (1.0 - std::cos(2.0 * M_PI * static_cast<double>(i) /
                                       static_cast<double>(window_len)));
    }
  }

  Matrix spec(bins, frames);
  std::vector<std::complex<double>> buf(window_len);
  for (std::size_t t = 0; t < frames; ++t) {
    const double* src = signal.data() + t * hop;
    for (std::size_t i = 0; i < window_len; ++i) {
      buf[i] = std::complex<double>(src[i] * taper[i], 0.0);
    }
    fft(buf);
    for (std::size_t b = 0; b < bins; ++b) {
      spec(b, t) = std::abs(buf[b]);
    }
  }
  return spec;
}

OracleFactors oracle_factors(const AudioScene& scene, std::size_t window_len,
                             const BetaParam& beta, std::uint64_t seed) {
  scene.validate();
  if (scene.notes.empty()) {
    throw ParamError("oracle_factors: scene has no notes");
  }
  OracleFactors oracle;
  SolverConfig cfg;
  cfg.max_iter_l1 = 300;
  cfg.kappa = 1e-9;
  for (std::size_t k = 0; k < scene.notes.size(); ++k) {
    AudioScene solo = scene;
    solo.notes = {scene.notes[k]};
    const Matrix spec =
        spectrogram(synth_audio(solo), window_len, window_len, WindowFn::kHann);
    cfg.seed = derive_seed(seed, k);
    const BaselineResult rank1 = baseline_beta_nmf(spec, 1, beta, cfg);
    if (k == 0) {
      oracle.W = Matrix(spec.rows(), scene.notes.size());
      oracle.H = Matrix(scene.notes.size(), spec.cols());
    }
    for (std::size_t i = 0; i < spec.rows(); ++i) oracle.W(i, k) = rank1.W(i, 0);
    for (std::size_t j = 0; j < spec.cols(); ++j) oracle.H(k, j) = rank1.H(0, j);
  }
  return oracle;
}

}  // namespace mrfuse
