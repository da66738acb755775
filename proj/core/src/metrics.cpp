#include "mrfuse/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "mrfuse/io.hpp"

namespace mrfuse {

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(op) + ": shape mismatch " + a.shape_str() +
                     " vs " + b.shape_str());
  }
}

std::vector<double> l1_normalized_row(const Matrix& m, std::size_t r) {
  std::vector<double> row(m.cols());
  double mass = 0.0;
  for (std::size_t j = 0; j < m.cols(); ++j) mass += std::fabs(m(r, j));
  for (std::size_t j = 0; j < m.cols(); ++j) {
    row[j] = mass > 0.0 ? m(r, j) / mass : 0.0;
  }
  return row;
}

double clamp_db(double v) { return std::clamp(v, -kDbCap, kDbCap); }

double snr_pair(const std::vector<double>& est, const std::vector<double>& ref,
                bool est_empty) {
  if (est_empty) return -kDbCap;  // zero-mass component, sentinel
  double sig = 0.0;
  double err = 0.0;
  for (std::size_t i = 0; i < est.size(); ++i) {
    sig += est[i] * est[i];
    const double d = est[i] - ref[i];
    err += d * d;
  }
  if (err == 0.0) return kDbCap;
  return clamp_db(10.0 * std::log10(sig / err));
}

Matrix row_match_cost(const Matrix& h, const Matrix& h_ref) {
  const std::size_t k = h.rows();
  Matrix cost(k, k);
  std::vector<std::vector<double>> hn(k), rn(k);
  for (std::size_t i = 0; i < k; ++i) {
    hn[i] = l1_normalized_row(h, i);
    rn[i] = l1_normalized_row(h_ref, i);
  }
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      double c = 0.0;
      for (std::size_t t = 0; t < h.cols(); ++t) {
        const double d = hn[i][t] - rn[j][t];
        c += d * d;
      }
      cost(i, j) = c;
    }
  }
  return cost;
}

}  // namespace

namespace detail {

std::vector<std::size_t> assignment_exhaustive(const Matrix& cost) {
  const std::size_t k = cost.rows();
  std::vector<std::size_t> perm(k), best(k);
  std::iota(perm.begin(), perm.end(), 0);
  best = perm;
  double best_cost = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (std::size_t j = 0; j < k; ++j) total += cost(perm[j], j);
    if (total < best_cost) {
      best_cost = total;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

std::vector<std::size_t> assignment_hungarian(const Matrix& cost) {
  // Potentials formulation, O(k^3); 1-based bookkeeping arrays.
  const std::size_t n = cost.rows();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> match(n + 1, 0);  // match[col] = row
  std::vector<std::size_t> way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = match[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<std::size_t> perm(n);
  for (std::size_t j = 1; j <= n; ++j) perm[j - 1] = match[j] - 1;
  return perm;
}

}  // namespace detail

std::vector<std::size_t> match_components(const Matrix& h, const Matrix& h_ref) {
  if (h.rows() != h_ref.rows() || h.cols() != h_ref.cols()) {
    throw ShapeError("match_components: " + h.shape_str() + " vs " +
                     h_ref.shape_str());
  }
  if (h.rows() == 0) return {};
  const Matrix cost = row_match_cost(h, h_ref);
  return h.rows() <= 8 ? detail::assignment_exhaustive(cost)
                       : detail::assignment_hungarian(cost);
}

std::vector<double> snr_rows(const Matrix& h, const Matrix& h_ref,
                             const std::vector<std::size_t>& perm) {
  if (h.rows() != h_ref.rows() || perm.size() != h.rows()) {
    throw ShapeError("snr_rows: " + h.shape_str() + " vs " +
                     h_ref.shape_str() + " with a permutation of " +
                     std::to_string(perm.size()));
  }
  std::vector<double> out(h.rows());
  for (std::size_t k = 0; k < h.rows(); ++k) {
    double mass = 0.0;
    for (std::size_t j = 0; j < h.cols(); ++j) mass += std::fabs(h(perm[k], j));
    out[k] = snr_pair(l1_normalized_row(h, perm[k]),
                      l1_normalized_row(h_ref, k), mass == 0.0);
  }
  return out;
}

std::vector<double> snr_cols(const Matrix& w, const Matrix& w_ref,
                             const std::vector<std::size_t>& perm) {
  return snr_rows(transpose(w), transpose(w_ref), perm);
}

double rmse(const Matrix& v, const Matrix& v_hat) {
  require_same_shape(v, v_hat, "rmse");
  double s = 0.0;
  const double* pv = v.data();
  const double* ph = v_hat.data();
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double d = pv[i] - ph[i];
    s += d * d;
  }
  return std::sqrt(s / static_cast<double>(v.size()));
}

double psnr(const Matrix& v, const Matrix& v_hat) {
  require_same_shape(v, v_hat, "psnr");
  double total = 0.0;
  for (std::size_t f = 0; f < v.rows(); ++f) {
    double peak = 0.0;
    double mse = 0.0;
    for (std::size_t j = 0; j < v.cols(); ++j) {
      peak = std::max(peak, v(f, j));
      const double d = v(f, j) - v_hat(f, j);
      mse += d * d;
    }
    mse /= static_cast<double>(v.cols());
    total += mse == 0.0 ? kDbCap : clamp_db(10.0 * std::log10(peak * peak / mse));
  }
  return total / static_cast<double>(v.rows());
}

double ergas(const Matrix& v, const Matrix& v_hat, double spatial_ratio) {
  require_same_shape(v, v_hat, "ergas");
  if (!(spatial_ratio > 0.0)) {
    throw ParamError("ergas: spatial_ratio must be positive");
  }
  double acc = 0.0;
  for (std::size_t f = 0; f < v.rows(); ++f) {
    double mean = 0.0;
    double mse = 0.0;
    for (std::size_t j = 0; j < v.cols(); ++j) {
      mean += v(f, j);
      const double d = v(f, j) - v_hat(f, j);
      mse += d * d;
    }
    mean /= static_cast<double>(v.cols());
    mse /= static_cast<double>(v.cols());
    if (mean != 0.0) acc += mse / (mean * mean);
  }
  acc /= static_cast<double>(v.rows());
  return 100.0 / spatial_ratio * std::sqrt(acc);
}

std::vector<double> sam_map(const Matrix& v, const Matrix& v_hat) {
  require_same_shape(v, v_hat, "sam");
  std::vector<double> map(v.cols(), 0.0);
  for (std::size_t j = 0; j < v.cols(); ++j) {
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t f = 0; f < v.rows(); ++f) {
      dot += v(f, j) * v_hat(f, j);
      na += v(f, j) * v(f, j);
      nb += v_hat(f, j) * v_hat(f, j);
    }
    if (na == 0.0 || nb == 0.0) continue;
    const double c = std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
    map[j] = std::acos(c) * 180.0 / M_PI;
  }
  return map;
}

double sam_deg(const Matrix& v, const Matrix& v_hat) {
  double acc = 0.0;
  std::size_t counted = 0;
  for (std::size_t j = 0; j < v.cols(); ++j) {
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t f = 0; f < v.rows(); ++f) {
      na += v(f, j) * v(f, j);
      nb += v_hat(f, j) * v_hat(f, j);
    }
    if (na == 0.0 || nb == 0.0) continue;
    double dot = 0.0;
    for (std::size_t f = 0; f < v.rows(); ++f) dot += v(f, j) * v_hat(f, j);
    acc += std::acos(std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0));
    ++counted;
  }
  return counted == 0 ? 0.0 : acc / static_cast<double>(counted) * 180.0 / M_PI;
}

double uiqi(const Matrix& v, const Matrix& v_hat, std::size_t height,
            std::size_t width, std::size_t window) {
  require_same_shape(v, v_hat, "uiqi");
  if (height * width != v.cols()) {
    throw ShapeError("uiqi: " + std::to_string(v.cols()) +
                     " pixels do not form a " + shape_str(height, width) +
                     " image");
  }
  const std::size_t b = std::min({window, height, width});
  if (b < 2) throw ParamError("uiqi: window side must be at least 2");
  const double area = static_cast<double>(b * b);

  // Summed-area tables per band keep the sliding windows O(1) each.
  const std::size_t sw = width + 1;
  std::vector<double> sx(sw * (height + 1)), sy(sx.size()), sxx(sx.size()),
      syy(sx.size()), sxy(sx.size());
  auto window_sum = [&](const std::vector<double>& t, std::size_t i,
                        std::size_t j) {
    return t[(i + b) * sw + (j + b)] - t[i * sw + (j + b)] -
           t[(i + b) * sw + j] + t[i * sw + j];
  };

  double band_acc = 0.0;
  for (std::size_t f = 0; f < v.rows(); ++f) {
    for (std::size_t i = 0; i < height; ++i) {
      for (std::size_t j = 0; j < width; ++j) {
        const double x = v(f, i * width + j);
        const double y = v_hat(f, i * width + j);
        const std::size_t at = (i + 1) * sw + (j + 1);
        const std::size_t up = i * sw + (j + 1);
        const std::size_t left = (i + 1) * sw + j;
        const std::size_t diag = i * sw + j;
        sx[at] = x + sx[up] + sx[left] - sx[diag];
        sy[at] = y + sy[up] + sy[left] - sy[diag];
        sxx[at] = x * x + sxx[up] + sxx[left] - sxx[diag];
        syy[at] = y * y + syy[up] + syy[left] - syy[diag];
        sxy[at] = x * y + sxy[up] + sxy[left] - sxy[diag];
      }
    }
    double acc = 0.0;
    std::size_t counted = 0;
    for (std::size_t i = 0; i + b <= height; ++i) {
      for (std::size_t j = 0; j + b <= width; ++j) {
        const double mx = window_sum(sx, i, j) / area;
        const double my = window_sum(sy, i, j) / area;
        const double vx = window_sum(sxx, i, j) / area - mx * mx;
        const double vy = window_sum(syy, i, j) / area - my * my;
        const double cov = window_sum(sxy, i, j) / area - mx * my;
        const double den = (vx + vy) * (mx * mx + my * my);
        if (den <= 0.0) continue;
        acc += 4.0 * cov * mx * my / den;
        ++counted;
      }
    }
    if (counted > 0) band_acc += acc / static_cast<double>(counted);
  }
  return band_acc / static_cast<double>(v.rows());
}

std::string MetricsReport::csv_header() {
  return "# mrfuse-metrics-v1\nruntime_s,psnr_db,rmse,ergas,sam_deg,uiqi";
}

std::string MetricsReport::csv_row() const {
  std::ostringstream os;
  os.precision(10);
  os << runtime_s << ',' << psnr_db << ',' << rmse << ',' << ergas << ','
     << sam_deg << ',' << uiqi;
  return os.str();
}

MetricsReport evaluate_fusion(const Matrix& v, const Matrix& v_hat,
                              std::size_t height, std::size_t width,
                              double spatial_ratio, std::size_t uiqi_window) {
  MetricsReport report;
  report.psnr_db = psnr(v, v_hat);
  report.rmse = rmse(v, v_hat);
  report.ergas = ergas(v, v_hat, spatial_ratio);
  report.sam_deg = sam_deg(v, v_hat);
  report.uiqi = uiqi(v, v_hat, height, width, uiqi_window);
  return report;
}

void save_sam_map_pgm(const std::filesystem::path& path,
                      const std::vector<double>& map, std::size_t height,
                      std::size_t width) {
  std::vector<std::uint8_t> gray(map.size());
  for (std::size_t i = 0; i < map.size(); ++i) {
    const double v = std::min(map[i], 45.0) / 45.0;
    gray[i] = static_cast<std::uint8_t>(std::lround(v * 255.0));
  }
  save_pgm(path, gray, height, width,
           "SAM degrees, linear gray map: 0 deg -> 0, >= 45 deg -> 255");
}

}  // namespace mrfuse
