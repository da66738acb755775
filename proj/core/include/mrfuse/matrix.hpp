#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "mrfuse/errors.hpp"

namespace mrfuse {

// Global flooring constant used inside solver denominators and inside
// logarithms / negative powers of the divergence.
inline constexpr double kFloor = 1e-16;

// Dense row-major matrix of 64-bit reals, the carrier for observations,
// factors and intermediate products. Entries are nonnegative for every value
// produced by the library; validate() enforces this at external boundaries.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }
  double& operator()(std::size_t i, std::size_t j) {
    return data_[i * cols_ + j];
  }

  const double* data() const { return data_.data(); }
  double* data() { return data_.data(); }
  const std::vector<double>& values() const { return data_; }
  std::vector<double>& values() { return data_; }

  bool same_shape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }
  std::string shape_str() const;

  // Throws NumericError if any entry is negative, NaN or infinite.
  void validate(const std::string& context) const;
  // Throws NumericError naming `context` if any entry is NaN or infinite.
  void ensure_finite(const std::string& context) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Elementwise product. Throws ShapeError naming both shapes on mismatch.
Matrix hadamard(const Matrix& a, const Matrix& b);

// Elementwise power with the convention 0^0 = 1. Throws NumericError when
// alpha < 0 meets a zero entry; the solver avoids this by flooring first.
Matrix elementwise_power(const Matrix& a, double alpha);

// C(i,j) = num(i,j) / max(den(i,j), eps).
Matrix safe_divide(const Matrix& num, const Matrix& den, double eps);

double frobenius_norm(const Matrix& a);

// Dense products. matmul_tn(a, b) = a^T b, matmul_nt(a, b) = a b^T.
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix matmul_tn(const Matrix& a, const Matrix& b);
Matrix matmul_nt(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& a);

// a + c * b, elementwise.
Matrix add_scaled(const Matrix& a, double c, const Matrix& b);

// Elementwise max(a(i,j), floor).
Matrix cwise_max(const Matrix& a, double floor);

double sum(const Matrix& a);
double max_abs(const Matrix& a);
double max_abs_diff(const Matrix& a, const Matrix& b);

std::string shape_str(std::size_t rows, std::size_t cols);

}  // namespace mrfuse
