#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mrfuse/matrix.hpp"

namespace mrfuse {

// NMAT binary container: 16-byte header (magic "NMAT", u32 rows, u32 cols,
// u32 reserved, all little-endian) followed by the row-major little-endian
// f64 payload.
void save_nmat(const std::filesystem::path& path, const Matrix& m);
Matrix load_nmat(const std::filesystem::path& path);

// CSV import/export for small matrices. The loader rejects ragged rows and
// negative or non-finite entries.
void save_csv(const std::filesystem::path& path, const Matrix& m);
Matrix load_csv(const std::filesystem::path& path);

// 8-bit binary PGM with an optional '#' comment line after the magic.
void save_pgm(const std::filesystem::path& path,
              const std::vector<std::uint8_t>& gray, std::size_t height,
              std::size_t width, const std::string& comment);

// 16-bit mono PCM WAV. Samples are clipped to [-1, 1] on write.
void save_wav_mono16(const std::filesystem::path& path,
                     const std::vector<double>& samples, std::uint32_t rate);
std::vector<double> load_wav_mono16(const std::filesystem::path& path,
                                    std::uint32_t* rate_out = nullptr);

// Writes a file atomically: the content goes to a sibling temp file that is
// renamed over the target once complete.
void atomic_write(const std::filesystem::path& path, const std::string& content);

}  // namespace mrfuse
