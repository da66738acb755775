#include "mrfuse/matrix.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mrfuse {

namespace {

using EigenRowMajor =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const EigenRowMajor>;
using MutMap = Eigen::Map<EigenRowMajor>;

ConstMap as_eigen(const Matrix& m) {
  return ConstMap(m.data(), static_cast<Eigen::Index>(m.rows()),
                  static_cast<Eigen::Index>(m.cols()));
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(op) + ": shape mismatch " + a.shape_str() +
                     " vs " + b.shape_str());
  }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (rows_ * cols_ != data_.size()) {
    throw ShapeError("Matrix: " + shape_str() + " needs " +
                     std::to_string(rows_ * cols_) + " entries, got " +
                     std::to_string(data_.size()));
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

std::string Matrix::shape_str() const { return mrfuse::shape_str(rows_, cols_); }

void Matrix::validate(const std::string& context) const {
  for (std::size_t i = 0; i < data_.size(); ++i) {
    const double v = data_[i];
    if (!std::isfinite(v) || v < 0.0) {
      std::ostringstream msg;
      msg << context << ": entry (" << i / std::max<std::size_t>(cols_, 1)
          << "," << (cols_ ? i % cols_ : 0) << ") = " << v
          << " violates the nonnegative finite invariant";
      throw NumericError(msg.str());
    }
  }
}

void Matrix::ensure_finite(const std::string& context) const {
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i])) {
      std::ostringstream msg;
      msg << context << ": non-finite entry at ("
          << i / std::max<std::size_t>(cols_, 1) << ","
          << (cols_ ? i % cols_ : 0) << ")";
      throw NumericError(msg.str());
    }
  }
}

std::string shape_str(std::size_t rows, std::size_t cols) {
  return std::to_string(rows) + "x" + std::to_string(cols);
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "hadamard");
  Matrix c(a.rows(), a.cols());
  const double* pa = a.data();
  const double* pb = b.data();
  double* pc = c.data();
  for (std::size_t i = 0; i < a.size(); ++i) pc[i] = pa[i] * pb[i];
  return c;
}

Matrix elementwise_power(const Matrix& a, double alpha) {
  Matrix c(a.rows(), a.cols());
  const double* pa = a.data();
  double* pc = c.data();
  const std::size_t n = a.size();
  // Exponents produced by the multiplicative updates for the usual beta grid
  // {0, 1/2, 1, 3/2, 2, 3} all hit one of the fast cases below.
  if (alpha == 1.0) {
    std::copy(pa, pa + n, pc);
  } else if (alpha == 0.0) {
    std::fill(pc, pc + n, 1.0);  // includes 0^0 = 1
  } else if (alpha == 2.0) {
    for (std::size_t i = 0; i < n; ++i) pc[i] = pa[i] * pa[i];
  } else if (alpha == 0.5) {
    for (std::size_t i = 0; i < n; ++i) pc[i] = std::sqrt(pa[i]);
  } else if (alpha > 0.0) {
    for (std::size_t i = 0; i < n; ++i) pc[i] = std::pow(pa[i], alpha);
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      const double v = pa[i];
      if (v == 0.0) {
        throw NumericError("elementwise_power: zero entry with exponent " +
                           std::to_string(alpha));
      }
      if (alpha == -1.0) {
        pc[i] = 1.0 / v;
      } else if (alpha == -2.0) {
        pc[i] = 1.0 / (v * v);
      } else if (alpha == -0.5) {
        pc[i] = 1.0 / std::sqrt(v);
      } else if (alpha == -1.5) {
        pc[i] = 1.0 / (v * std::sqrt(v));
      } else {
        pc[i] = std::pow(v, alpha);
      }
    }
  }
  return c;
}

Matrix safe_divide(const Matrix& num, const Matrix& den, double eps) {
  require_same_shape(num, den, "safe_divide");
  if (!(eps > 0.0)) {
    throw ParamError("safe_divide: eps must be positive, got " +
                     std::to_string(eps));
  }
  Matrix c(num.rows(), num.cols());
  const double* pn = num.data();
  const double* pd = den.data();
  double* pc = c.data();
  for (std::size_t i = 0; i < num.size(); ++i) {
    pc[i] = pn[i] / std::max(pd[i], eps);
  }
  return c;
}

double frobenius_norm(const Matrix& a) {
  double s = 0.0;
  const double* p = a.data();
  for (std::size_t i = 0; i < a.size(); ++i) s += p[i] * p[i];
  return std::sqrt(s);
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: " + a.shape_str() + " * " + b.shape_str());
  }
  Matrix c(a.rows(), b.cols());
  MutMap(c.data(), static_cast<Eigen::Index>(c.rows()),
         static_cast<Eigen::Index>(c.cols())).noalias() =
      as_eigen(a) * as_eigen(b);
  return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    throw ShapeError("matmul_tn: " + a.shape_str() + "^T * " + b.shape_str());
  }
  Matrix c(a.cols(), b.cols());
  MutMap(c.data(), static_cast<Eigen::Index>(c.rows()),
         static_cast<Eigen::Index>(c.cols())).noalias() =
      as_eigen(a).transpose() * as_eigen(b);
  return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    throw ShapeError("matmul_nt: " + a.shape_str() + " * " + b.shape_str() +
                     "^T");
  }
  Matrix c(a.rows(), b.rows());
  MutMap(c.data(), static_cast<Eigen::Index>(c.rows()),
         static_cast<Eigen::Index>(c.cols())).noalias() =
      as_eigen(a) * as_eigen(b).transpose();
  return c;
}

Matrix transpose(const Matrix& a) {
  Matrix c(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) c(j, i) = a(i, j);
  return c;
}

Matrix add_scaled(const Matrix& a, double c, const Matrix& b) {
  require_same_shape(a, b, "add_scaled");
  Matrix out(a.rows(), a.cols());
  const double* pa = a.data();
  const double* pb = b.data();
  double* po = out.data();
  for (std::size_t i = 0; i < a.size(); ++i) po[i] = pa[i] + c * pb[i];
  return out;
}

Matrix cwise_max(const Matrix& a, double floor) {
  Matrix out(a.rows(), a.cols());
  const double* pa = a.data();
  double* po = out.data();
  for (std::size_t i = 0; i < a.size(); ++i) po[i] = std::max(pa[i], floor);
  return out;
}

double sum(const Matrix& a) {
  double s = 0.0;
  const double* p = a.data();
  for (std::size_t i = 0; i < a.size(); ++i) s += p[i];
  return s;
}

double max_abs(const Matrix& a) {
  double m = 0.0;
  const double* p = a.data();
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(p[i]));
  return m;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  const double* pa = a.data();
  const double* pb = b.data();
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::fabs(pa[i] - pb[i]));
  return m;
}

}  // namespace mrfuse
