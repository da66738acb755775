#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "mrfuse/matrix.hpp"

namespace mrfuse {

// SNR and PSNR values are clamped to +/- 300 dB so reports stay finite and
// sortable; zero-mass rows/columns record the -300 sentinel.
inline constexpr double kDbCap = 300.0;

// Permutation aligning the rows of `h` with the rows of `h_ref`: entry k is
// the row of `h` assigned to reference row k, minimizing the total squared
// distance between L1-normalized rows. Exhaustive search for K <= 8, the
// Hungarian algorithm beyond.
std::vector<std::size_t> match_components(const Matrix& h, const Matrix& h_ref);

// Per-row SNR_k = 20 log10(|h_k|_F / |h_k - ref_k|_F) after L1 row
// normalization, rows of `h` taken through `perm`.
std::vector<double> snr_rows(const Matrix& h, const Matrix& h_ref,
                             const std::vector<std::size_t>& perm);

// Column variant for source matrices (L1 column normalization).
std::vector<double> snr_cols(const Matrix& w, const Matrix& w_ref,
                             const std::vector<std::size_t>& perm);

double rmse(const Matrix& v, const Matrix& v_hat);

// Mean over bands of 10 log10(max(band)^2 / MSE(band)).
double psnr(const Matrix& v, const Matrix& v_hat);

// 100/spatial_ratio * sqrt(mean over bands of (RMSE_f / mean_f)^2).
double ergas(const Matrix& v, const Matrix& v_hat, double spatial_ratio);

// Per-pixel spectral angles in degrees; zero-norm pixels map to 0 and are
// excluded from the mean.
std::vector<double> sam_map(const Matrix& v, const Matrix& v_hat);
double sam_deg(const Matrix& v, const Matrix& v_hat);

// Mean over bands and sliding windows of the universal quality index
// 4*cov*mx*my / ((varx+vary)*(mx^2+my^2)); degenerate windows are skipped.
// Bands are rows holding vectorized height-by-width images; the window is
// clamped to the image side.
double uiqi(const Matrix& v, const Matrix& v_hat, std::size_t height,
            std::size_t width, std::size_t window = 32);

struct MetricsReport {
  double runtime_s = 0.0;
  double psnr_db = 0.0;
  double rmse = 0.0;
  double ergas = 0.0;
  double sam_deg = 0.0;
  double uiqi = 0.0;
  std::vector<double> per_source_snr_h;
  std::vector<double> per_source_snr_w;
  std::vector<std::size_t> permutation;

  // Frozen v1 column order: runtime_s,psnr_db,rmse,ergas,sam_deg,uiqi.
  static std::string csv_header();
  std::string csv_row() const;
};

// Full fusion metric suite against a reference image.
MetricsReport evaluate_fusion(const Matrix& v, const Matrix& v_hat,
                              std::size_t height, std::size_t width,
                              double spatial_ratio, std::size_t uiqi_window = 32);

// 8-bit SAM map export; the fixed mapping (0 deg -> 0, >= 45 deg -> 255,
// linear in between) is recorded in the file comment.
void save_sam_map_pgm(const std::filesystem::path& path,
                      const std::vector<double>& map, std::size_t height,
                      std::size_t width);

namespace detail {
std::vector<std::size_t> assignment_exhaustive(const Matrix& cost);
std::vector<std::size_t> assignment_hungarian(const Matrix& cost);
}  // namespace detail

}  // namespace mrfuse
