#include "mrfuse/operators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "mrfuse/io.hpp"

namespace mrfuse {

SparseOperator::SparseOperator(std::size_t rows, std::size_t cols,
                               std::vector<std::size_t> row_ptr,
                               std::vector<std::size_t> col_idx,
                               std::vector<double> weights, int d, int f)
    : rows_(rows),
      cols_(cols),
      row_ptr_(std::move(row_ptr)),
      col_idx_(std::move(col_idx)),
      weights_(std::move(weights)),
      d_(d),
      f_(f) {
  if (row_ptr_.size() != rows_ + 1 || col_idx_.size() != weights_.size() ||
      row_ptr_.back() != col_idx_.size()) {
    throw ShapeError("SparseOperator: inconsistent CSR arrays for " +
                     shape_str());
  }
  for (std::size_t c : col_idx_) {
    if (c >= cols_) {
      throw ShapeError("SparseOperator: column index " + std::to_string(c) +
                       " out of range for " + shape_str());
    }
  }
  for (double w : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw NumericError("SparseOperator: weights must be nonnegative finite");
    }
  }
}

SparseOperator SparseOperator::identity(std::size_t n) {
  std::vector<std::size_t> ptr(n + 1);
  std::vector<std::size_t> idx(n);
  std::iota(ptr.begin(), ptr.end(), 0);
  std::iota(idx.begin(), idx.end(), 0);
  return SparseOperator(n, n, std::move(ptr), std::move(idx),
                        std::vector<double>(n, 1.0), 1, 0);
}

SparseOperator SparseOperator::from_dense(const Matrix& m) {
  m.validate("SparseOperator::from_dense");
  std::vector<std::size_t> ptr{0};
  std::vector<std::size_t> idx;
  std::vector<double> w;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (m(i, j) > 0.0) {
        idx.push_back(j);
        w.push_back(m(i, j));
      }
    }
    ptr.push_back(idx.size());
  }
  return SparseOperator(m.rows(), m.cols(), std::move(ptr), std::move(idx),
                        std::move(w));
}

SparseOperator SparseOperator::transposed() const {
  std::vector<std::size_t> counts(cols_ + 1, 0);
  for (std::size_t c : col_idx_) ++counts[c + 1];
  std::partial_sum(counts.begin(), counts.end(), counts.begin());
  std::vector<std::size_t> idx(nnz());
  std::vector<double> w(nnz());
  std::vector<std::size_t> cursor(counts.begin(), counts.end() - 1);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      const std::size_t pos = cursor[col_idx_[k]]++;
      idx[pos] = r;
      w[pos] = weights_[k];
    }
  }
  return SparseOperator(cols_, rows_, std::move(counts), std::move(idx),
                        std::move(w), d_, f_);
}

Matrix SparseOperator::to_dense() const {
  Matrix m(rows_, cols_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      m(r, col_idx_[k]) = weights_[k];
    }
  }
  return m;
}

void SparseOperator::normalize_rows() {
  for (std::size_t r = 0; r < rows_; ++r) {
    double s = 0.0;
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
      s += weights_[k];
    if (s > 0.0) {
      for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
        weights_[k] /= s;
    }
  }
}

SparseOperator build_banded(std::size_t n_high, int d, int f) {
  if (d < 1) throw ParamError("build_banded: d must be >= 1");
  if (f < 0 || 2 * f > d) {
    throw ParamError("build_banded: overlap f = " + std::to_string(f) +
                     " must satisfy 0 <= f <= d/2 with d = " +
                     std::to_string(d));
  }
  if (n_high == 0 || n_high % static_cast<std::size_t>(d) != 0) {
    throw ParamError("build_banded: n_high = " + std::to_string(n_high) +
                     " is not divisible by d = " + std::to_string(d) +
                     "; truncate the input first");
  }
  const std::size_t n_low = n_high / static_cast<std::size_t>(d);
  std::vector<std::size_t> ptr{0};
  std::vector<std::size_t> idx;
  std::vector<double> w;
  for (std::size_t r = 0; r < n_low; ++r) {
    const std::ptrdiff_t core_lo = static_cast<std::ptrdiff_t>(r) * d;
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, core_lo - f);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(
        static_cast<std::ptrdiff_t>(n_high), core_lo + d + f);
    const double weight = 1.0 / static_cast<double>(hi - lo);
    for (std::ptrdiff_t c = lo; c < hi; ++c) {
      idx.push_back(static_cast<std::size_t>(c));
      w.push_back(weight);
    }
    ptr.push_back(idx.size());
  }
  return SparseOperator(n_low, n_high, std::move(ptr), std::move(idx),
                        std::move(w), d, f);
}

SparseOperator build_gaussian_blur_decimation(std::size_t h, std::size_t w,
                                              int kernel, double sigma,
                                              int stride) {
  if (kernel < 1 || kernel % 2 == 0) {
    throw ParamError("build_gaussian_blur_decimation: kernel must be odd, got " +
                     std::to_string(kernel));
  }
  if (stride < 1) throw ParamError("build_gaussian_blur_decimation: stride >= 1");
  if (h % static_cast<std::size_t>(stride) != 0 ||
      w % static_cast<std::size_t>(stride) != 0) {
    throw ParamError("build_gaussian_blur_decimation: image " +
                     shape_str(h, w) + " is not divisible by stride " +
                     std::to_string(stride));
  }
  const std::size_t oh = h / static_cast<std::size_t>(stride);
  const std::size_t ow = w / static_cast<std::size_t>(stride);
  const int half = kernel / 2;
  const double inv2s2 = sigma > 0.0 ? 1.0 / (2.0 * sigma * sigma) : 0.0;

  std::vector<std::size_t> ptr{0};
  std::vector<std::size_t> idx;
  std::vector<double> wts;
  for (std::size_t bi = 0; bi < oh; ++bi) {
    for (std::size_t bj = 0; bj < ow; ++bj) {
      const std::ptrdiff_t ci = static_cast<std::ptrdiff_t>(bi) * stride;
      const std::ptrdiff_t cj = static_cast<std::ptrdiff_t>(bj) * stride;
      const std::size_t start = idx.size();
      double total = 0.0;
      for (int di = -half; di <= half; ++di) {
        const std::ptrdiff_t pi = ci + di;
        if (pi < 0 || pi >= static_cast<std::ptrdiff_t>(h)) continue;
        for (int dj = -half; dj <= half; ++dj) {
          const std::ptrdiff_t pj = cj + dj;
          if (pj < 0 || pj >= static_cast<std::ptrdiff_t>(w)) continue;
          const double g =
              kernel == 1 ? 1.0
                          : std::exp(-(static_cast<double>(di) * di +
                                       static_cast<double>(dj) * dj) *
                                     inv2s2);
          idx.push_back(static_cast<std::size_t>(pi) * w +
                        static_cast<std::size_t>(pj));
          wts.push_back(g);
          total += g;
        }
      }
      // Boundary kernels are renormalized to keep each row a partition of 1.
      for (std::size_t k = start; k < idx.size(); ++k) wts[k] /= total;
      ptr.push_back(idx.size());
    }
  }
  return SparseOperator(oh * ow, h * w, std::move(ptr), std::move(idx),
                        std::move(wts), stride, 0);
}

Matrix load_spectral_response(const std::filesystem::path& path) {
  Matrix r = load_csv(path);  // rejects negative and ragged input
  if (r.rows() == 0 || r.cols() == 0) {
    throw IoError("load_spectral_response: empty response in " + path.string());
  }
  for (std::size_t i = 0; i < r.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < r.cols(); ++j) s += r(i, j);
    if (s <= 0.0) {
      throw NumericError("load_spectral_response: band " + std::to_string(i) +
                         " has zero total response");
    }
    for (std::size_t j = 0; j < r.cols(); ++j) r(i, j) /= s;
  }
  return r;
}

Matrix support_mask(const SparseOperator& op) {
  Matrix m(op.rows(), op.cols());
  for (std::size_t r = 0; r < op.rows(); ++r) {
    for (std::size_t k = op.row_begin(r); k < op.row_end(r); ++k) {
      m(r, op.col_index(k)) = 1.0;
    }
  }
  return m;
}

Matrix matmul(const SparseOperator& op, const Matrix& m) {
  if (op.cols() != m.rows()) {
    throw ShapeError("matmul: operator " + op.shape_str() + " * " +
                     m.shape_str());
  }
  Matrix out(op.rows(), m.cols());
  for (std::size_t r = 0; r < op.rows(); ++r) {
    double* dst = out.data() + r * out.cols();
    for (std::size_t k = op.row_begin(r); k < op.row_end(r); ++k) {
      const double wgt = op.weight(k);
      const double* src = m.data() + op.col_index(k) * m.cols();
      for (std::size_t j = 0; j < m.cols(); ++j) dst[j] += wgt * src[j];
    }
  }
  return out;
}

Matrix matmul_tn(const SparseOperator& op, const Matrix& m) {
  if (op.rows() != m.rows()) {
    throw ShapeError("matmul_tn: operator " + op.shape_str() + "^T * " +
                     m.shape_str());
  }
  Matrix out(op.cols(), m.cols());
  for (std::size_t r = 0; r < op.rows(); ++r) {
    const double* src = m.data() + r * m.cols();
    for (std::size_t k = op.row_begin(r); k < op.row_end(r); ++k) {
      const double wgt = op.weight(k);
      double* dst = out.data() + op.col_index(k) * out.cols();
      for (std::size_t j = 0; j < m.cols(); ++j) dst[j] += wgt * src[j];
    }
  }
  return out;
}

Matrix matmul(const Matrix& m, const SparseOperator& op) {
  if (m.cols() != op.rows()) {
    throw ShapeError("matmul: " + m.shape_str() + " * operator " +
                     op.shape_str());
  }
  Matrix out(m.rows(), op.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double* src = m.data() + i * m.cols();
    double* dst = out.data() + i * out.cols();
    for (std::size_t r = 0; r < op.rows(); ++r) {
      const double v = src[r];
      if (v == 0.0) continue;
      for (std::size_t k = op.row_begin(r); k < op.row_end(r); ++k) {
        dst[op.col_index(k)] += v * op.weight(k);
      }
    }
  }
  return out;
}

Matrix matmul_nt(const Matrix& m, const SparseOperator& op) {
  if (m.cols() != op.cols()) {
    throw ShapeError("matmul_nt: " + m.shape_str() + " * operator " +
                     op.shape_str() + "^T");
  }
  Matrix out(m.rows(), op.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double* src = m.data() + i * m.cols();
    double* dst = out.data() + i * out.cols();
    for (std::size_t r = 0; r < op.rows(); ++r) {
      double acc = 0.0;
      for (std::size_t k = op.row_begin(r); k < op.row_end(r); ++k) {
        acc += op.weight(k) * src[op.col_index(k)];
      }
      dst[r] = acc;
    }
  }
  return out;
}

}  // namespace mrfuse
