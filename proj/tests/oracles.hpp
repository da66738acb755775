// Independent test oracles: scalar-loop reimplementations of the quantities
// the library computes in matrix form, kept deliberately naive so they share
// no code path with the implementation under test.
#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "mrfuse/betadiv.hpp"
#include "mrfuse/matrix.hpp"
#include "mrfuse/operators.hpp"

namespace oracle {

inline double d_beta_scalar(double x, double y, double beta) {
  if (beta == 1.0) return (x > 0 ? x * std::log(x / y) - x + y : y);
  if (beta == 0.0) {
    const double xs = std::max(x, 1e-16);
    return xs / y - std::log(xs / y) - 1.0;
  }
  return (std::pow(x, beta) + (beta - 1.0) * std::pow(y, beta) -
          beta * x * std::pow(y, beta - 1.0)) /
         (beta * (beta - 1.0));
}

inline double divergence_scalar(const mrfuse::Matrix& a,
                                const mrfuse::Matrix& b, double beta) {
  double total = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      total += d_beta_scalar(a(i, j), std::max(b(i, j), 1e-16), beta);
  return total;
}

inline mrfuse::Matrix matmul_scalar(const mrfuse::Matrix& a,
                                    const mrfuse::Matrix& b) {
  mrfuse::Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k)
      for (std::size_t j = 0; j < b.cols(); ++j)
        c(i, j) += a(i, k) * b(k, j);
  return c;
}

// Entries of the KL-case closed-form H update evaluated one coefficient at a
// time with dense P = RW and dense S:
//   h_kz <- h_kz * (sum_f p_fk x_fz/xh_fz + l sum_f sum_n w_fk s_zn y_fn/yh_fn)
//                / (sum_f p_fk            + l sum_f sum_n w_fk s_zn)
inline mrfuse::Matrix kl_update_h_scalar(const mrfuse::Matrix& x,
                                         const mrfuse::Matrix& y,
                                         const mrfuse::Matrix& r_dense,
                                         const mrfuse::Matrix& s_dense,
                                         const mrfuse::Matrix& w,
                                         const mrfuse::Matrix& h,
                                         double lambda) {
  const mrfuse::Matrix p = matmul_scalar(r_dense, w);
  const mrfuse::Matrix xh = matmul_scalar(p, h);
  const mrfuse::Matrix yh =
      matmul_scalar(matmul_scalar(w, h), s_dense);
  mrfuse::Matrix out = h;
  for (std::size_t k = 0; k < h.rows(); ++k) {
    for (std::size_t z = 0; z < h.cols(); ++z) {
      double num = 0.0;
      double den = 0.0;
      for (std::size_t f = 0; f < x.rows(); ++f) {
        num += p(f, k) * x(f, z) / std::max(xh(f, z), 1e-16);
        den += p(f, k);
      }
      for (std::size_t f = 0; f < y.rows(); ++f) {
        for (std::size_t n = 0; n < y.cols(); ++n) {
          num += lambda * w(f, k) * s_dense(z, n) * y(f, n) /
                 std::max(yh(f, n), 1e-16);
          den += lambda * w(f, k) * s_dense(z, n);
        }
      }
      out(k, z) = h(k, z) * num / std::max(den, 1e-16);
    }
  }
  return out;
}

// General-beta scalar S update on the full dense support:
//   s_ij <- s_ij * ([H^T(W^T((WHS)^(b-2) . Y))]_ij / [H^T(W^T(WHS)^(b-1))]_ij)^gamma
inline mrfuse::Matrix mu_update_s_scalar(const mrfuse::Matrix& y,
                                         const mrfuse::Matrix& s_dense,
                                         const mrfuse::Matrix& w,
                                         const mrfuse::Matrix& h, double beta,
                                         double gamma) {
  const mrfuse::Matrix yh =
      matmul_scalar(matmul_scalar(w, h), s_dense);
  mrfuse::Matrix out = s_dense;
  for (std::size_t i = 0; i < s_dense.rows(); ++i) {
    for (std::size_t j = 0; j < s_dense.cols(); ++j) {
      double num = 0.0;
      double den = 0.0;
      for (std::size_t k = 0; k < h.rows(); ++k) {
        double inner_num = 0.0;
        double inner_den = 0.0;
        for (std::size_t f = 0; f < y.rows(); ++f) {
          const double v = std::max(yh(f, j), 1e-16);
          inner_num += w(f, k) * std::pow(v, beta - 2.0) * y(f, j);
          inner_den += w(f, k) * std::pow(v, beta - 1.0);
        }
        num += h(k, i) * inner_num;
        den += h(k, i) * inner_den;
      }
      out(i, j) =
          s_dense(i, j) * std::pow(num / std::max(den, 1e-16), gamma);
    }
  }
  return out;
}

// Central finite-difference gradient of the coupled objective in H.
template <typename ObjectiveFn>
inline mrfuse::Matrix fd_gradient(const mrfuse::Matrix& h, ObjectiveFn f,
                                  double step) {
  mrfuse::Matrix g(h.rows(), h.cols());
  mrfuse::Matrix probe = h;
  for (std::size_t i = 0; i < h.rows(); ++i) {
    for (std::size_t j = 0; j < h.cols(); ++j) {
      const double saved = probe(i, j);
      probe(i, j) = saved + step;
      const double up = f(probe);
      probe(i, j) = saved - step;
      const double down = f(probe);
      probe(i, j) = saved;
      g(i, j) = (up - down) / (2.0 * step);
    }
  }
  return g;
}

// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, descending.
inline std::vector<double> symmetric_eigenvalues(mrfuse::Matrix a) {
  const std::size_t n = a.rows();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::fabs(a(p, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t i = 0; i < n; ++i) {
          const double aip = a(i, p);
          const double aiq = a(i, q);
          a(i, p) = c * aip - s * aiq;
          a(i, q) = s * aip + c * aiq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double api = a(p, i);
          const double aqi = a(q, i);
          a(p, i) = c * api - s * aqi;
          a(q, i) = s * api + c * aqi;
        }
      }
    }
  }
  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = a(i, i);
  std::sort(ev.rbegin(), ev.rend());
  return ev;
}

// Singular values of m, descending, by one-sided Jacobi (columns are
// orthogonalized in place), which keeps full relative accuracy on the small
// values unlike a Gram-matrix eigensolve.
inline std::vector<double> singular_values(const mrfuse::Matrix& m) {
  mrfuse::Matrix a = m.rows() >= m.cols() ? m : mrfuse::transpose(m);
  const std::size_t rows = a.rows();
  const std::size_t n = a.cols();
  for (int sweep = 0; sweep < 60; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double app = 0.0, aqq = 0.0, apq = 0.0;
        for (std::size_t i = 0; i < rows; ++i) {
          app += a(i, p) * a(i, p);
          aqq += a(i, q) * a(i, q);
          apq += a(i, p) * a(i, q);
        }
        if (std::fabs(apq) <= 1e-15 * std::sqrt(app * aqq) || apq == 0.0) {
          continue;
        }
        rotated = true;
        const double zeta = (aqq - app) / (2.0 * apq);
        const double t = (zeta >= 0 ? 1.0 : -1.0) /
                         (std::fabs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < rows; ++i) {
          const double vp = a(i, p);
          const double vq = a(i, q);
          a(i, p) = c * vp - s * vq;
          a(i, q) = s * vp + c * vq;
        }
      }
    }
    if (!rotated) break;
  }
  std::vector<double> sv(n);
  for (std::size_t j = 0; j < n; ++j) {
    double norm = 0.0;
    for (std::size_t i = 0; i < rows; ++i) norm += a(i, j) * a(i, j);
    sv[j] = std::sqrt(norm);
  }
  std::sort(sv.rbegin(), sv.rend());
  return sv;
}

}  // namespace oracle
