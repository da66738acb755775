#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "mrfuse/matrix.hpp"

namespace mrfuse {

// Sparse nonnegative downsampling operator stored row-compressed. The
// support is fixed at construction; multiplicative updates only rescale the
// stored weights, so entries outside the support stay exactly zero.
//
// Builders produce the operator in low-by-high orientation (one row per
// output sample, row-stochastic). The second-dimension downsampler S of the
// coupled model is the high-by-low transpose; use transposed().
class SparseOperator {
 public:
  SparseOperator() = default;
  SparseOperator(std::size_t rows, std::size_t cols,
                 std::vector<std::size_t> row_ptr,
                 std::vector<std::size_t> col_idx, std::vector<double> weights,
                 int d = 0, int f = 0);

  static SparseOperator identity(std::size_t n);
  // Support taken from the strictly positive entries of m.
  static SparseOperator from_dense(const Matrix& m);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return col_idx_.size(); }
  int d() const { return d_; }
  int f() const { return f_; }

  std::size_t row_begin(std::size_t r) const { return row_ptr_[r]; }
  std::size_t row_end(std::size_t r) const { return row_ptr_[r + 1]; }
  std::size_t col_index(std::size_t k) const { return col_idx_[k]; }
  double weight(std::size_t k) const { return weights_[k]; }
  double& weight(std::size_t k) { return weights_[k]; }

  SparseOperator transposed() const;
  Matrix to_dense() const;

  // Rescales every row to unit L1 norm (rows with zero mass are left alone).
  void normalize_rows();

  std::string shape_str() const { return mrfuse::shape_str(rows_, cols_); }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::size_t> col_idx_;
  std::vector<double> weights_;
  int d_ = 0;
  int f_ = 0;
};

// Banded one-dimensional downsampler: n_low = n_high / d rows, row r covers
// the core columns [r*d, (r+1)*d) plus f extra columns on each side, clipped
// at the boundary. Initial weights are uniform so each row sums to 1.
// Requires d >= 1, f <= d/2 and n_high divisible by d.
SparseOperator build_banded(std::size_t n_high, int d, int f);

// Spatial blur-and-decimate operator for vectorized h-by-w images (row-major
// pixel order): one row per output pixel holding the truncated, renormalized
// 2-D Gaussian taps of a kernel-by-kernel neighborhood centered on the sample
// location. Returned in low-by-high orientation; transpose for use as S.
SparseOperator build_gaussian_blur_decimation(std::size_t h, std::size_t w,
                                              int kernel, double sigma,
                                              int stride);

// Spectral response CSV: one row per output band, one column per input band,
// nonnegative entries. Rows are L1-normalized to 1.
Matrix load_spectral_response(const std::filesystem::path& path);

// Dense 0/1 matrix marking the support.
Matrix support_mask(const SparseOperator& op);

// Products against dense matrices; the dense form of the operator is never
// materialized.
Matrix matmul(const SparseOperator& op, const Matrix& m);    // op * M
Matrix matmul_tn(const SparseOperator& op, const Matrix& m); // op^T * M
Matrix matmul(const Matrix& m, const SparseOperator& op);    // M * op
Matrix matmul_nt(const Matrix& m, const SparseOperator& op); // M * op^T

}  // namespace mrfuse
