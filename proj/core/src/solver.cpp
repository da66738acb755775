#include "mrfuse/solver.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "mrfuse/io.hpp"

namespace mrfuse {

namespace {

// Shared bracketed sums of the H and W updates:
//   num = R^T((RWH)^(b-2) . X) + lambda ((WHS)^(b-2) . Y) S^T
//   den = R^T (RWH)^(b-1)      + lambda  (WHS)^(b-1)      S^T
// both F x N. The model products are floored before negative powers.
struct InnerSums {
  Matrix num;
  Matrix den;
};

InnerSums inner_sums(const Matrix& x, const Matrix& y, const SparseOperator& r,
                     const SparseOperator& s, const Matrix& w, const Matrix& h,
                     double lambda, const BetaParam& beta, double floor) {
  const double bm2 = beta.beta - 2.0;
  const double bm1 = beta.beta - 1.0;
  const Matrix rw = matmul(r, w);
  const Matrix xhat = cwise_max(matmul(rw, h), floor);
  Matrix num = matmul_tn(r, hadamard(elementwise_power(xhat, bm2), x));
  Matrix den = matmul_tn(r, elementwise_power(xhat, bm1));
  if (lambda > 0.0) {
    const Matrix v = matmul(w, h);
    const Matrix yhat = cwise_max(matmul(v, s), floor);
    num = add_scaled(num, lambda,
                     matmul_nt(hadamard(elementwise_power(yhat, bm2), y), s));
    den = add_scaled(den, lambda, matmul_nt(elementwise_power(yhat, bm1), s));
  }
  return {std::move(num), std::move(den)};
}

Matrix mu_step(const Matrix& current, const Matrix& num, const Matrix& den,
               const BetaParam& beta, double floor) {
  Matrix ratio = safe_divide(num, den, floor);
  if (beta.gamma != 1.0) ratio = elementwise_power(ratio, beta.gamma);
  return hadamard(current, ratio);
}

double ratio_pow(double num, double den, double gamma, double floor) {
  const double r = num / std::max(den, floor);
  return gamma == 1.0 ? r : std::pow(r, gamma);
}

void check_iterate(const Matrix& m, const char* name, const char* loop,
                   std::size_t iteration) {
  m.ensure_finite(std::string(name) + " at " + loop + " iteration " +
                  std::to_string(iteration));
}

// S output columns correspond to canonical operator rows; renormalize each
// to unit mass.
void normalize_s_outputs(SparseOperator& s) {
  std::vector<double> mass(s.cols(), 0.0);
  for (std::size_t r = 0; r < s.rows(); ++r) {
    for (std::size_t k = s.row_begin(r); k < s.row_end(r); ++k) {
      mass[s.col_index(k)] += s.weight(k);
    }
  }
  for (std::size_t r = 0; r < s.rows(); ++r) {
    for (std::size_t k = s.row_begin(r); k < s.row_end(r); ++k) {
      if (mass[s.col_index(k)] > 0.0) s.weight(k) /= mass[s.col_index(k)];
    }
  }
}

// Relative slack for the per-sweep descent guard, plus an absolute term tied
// to the starting objective: once the fit sits many orders below its initial
// value, last-ulp rounding in the normalization step dominates the trace.
void check_descent(double before, double after, double initial,
                   const char* loop, std::size_t iteration) {
  if (after > before + 1e-9 * before + 1e-12 * initial) {
    std::ostringstream msg;
    msg << "objective increased from " << before << " to " << after << " at "
        << loop << " iteration " << iteration;
    throw NumericError(msg.str());
  }
}

}  // namespace

void CoupledProblem::validate() const {
  if (X.rows() != R.rows()) {
    throw ShapeError("CoupledProblem: X has " + std::to_string(X.rows()) +
                     " rows but R is " + R.shape_str());
  }
  if (Y.rows() != R.cols()) {
    throw ShapeError("CoupledProblem: Y has " + std::to_string(Y.rows()) +
                     " rows but R is " + R.shape_str());
  }
  if (X.cols() != S.rows()) {
    throw ShapeError("CoupledProblem: X has " + std::to_string(X.cols()) +
                     " cols but S is " + S.shape_str());
  }
  if (Y.cols() != S.cols()) {
    throw ShapeError("CoupledProblem: Y has " + std::to_string(Y.cols()) +
                     " cols but S is " + S.shape_str());
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ParamError("CoupledProblem: lambda must be finite and >= 0");
  }
  if (rank == 0 || rank > std::min(f_high(), n_high())) {
    throw ParamError("CoupledProblem: rank " + std::to_string(rank) +
                     " outside [1, min(F, N)] = [1, " +
                     std::to_string(std::min(f_high(), n_high())) + "]");
  }
}

void SolverConfig::validate() const {
  if (!(kappa > 0.0) || !(kappa < 1.0)) {
    throw ParamError("SolverConfig: kappa must lie in (0,1), got " +
                     std::to_string(kappa));
  }
  if (!(floor > 0.0)) {
    throw ParamError("SolverConfig: floor must be positive");
  }
}

double objective(const CoupledProblem& p, const FactorEstimate& e) {
  const Matrix xhat = matmul(matmul(e.R, e.W), e.H);
  double value = D_beta(p.X, xhat, p.beta);
  if (p.lambda > 0.0) {
    const Matrix yhat = matmul(matmul(e.W, e.H), e.S);
    value += p.lambda * D_beta(p.Y, yhat, p.beta);
  }
  return value;
}

Matrix update_h(const CoupledProblem& p, const FactorEstimate& e) {
  InnerSums t = inner_sums(p.X, p.Y, e.R, e.S, e.W, e.H, p.lambda, p.beta,
                           kFloor);
  return mu_step(e.H, matmul_tn(e.W, t.num), matmul_tn(e.W, t.den), p.beta,
                 kFloor);
}

Matrix update_w(const CoupledProblem& p, const FactorEstimate& e) {
  InnerSums t = inner_sums(p.X, p.Y, e.R, e.S, e.W, e.H, p.lambda, p.beta,
                           kFloor);
  return mu_step(e.W, matmul_nt(t.num, e.H), matmul_nt(t.den, e.H), p.beta,
                 kFloor);
}

SparseOperator update_s(const CoupledProblem& p, const FactorEstimate& e) {
  const double bm2 = p.beta.beta - 2.0;
  const double bm1 = p.beta.beta - 1.0;
  const Matrix v = matmul(e.W, e.H);
  const Matrix yhat = cwise_max(matmul(v, e.S), kFloor);
  // K x N_l pieces of H^T(W^T(...)); the N x N_l products are then evaluated
  // on the support only.
  const Matrix p1 =
      matmul_tn(e.W, hadamard(elementwise_power(yhat, bm2), p.Y));
  const Matrix p2 = matmul_tn(e.W, elementwise_power(yhat, bm1));
  SparseOperator s = e.S;
  const std::size_t k_rank = e.H.rows();
  for (std::size_t i = 0; i < s.rows(); ++i) {
    for (std::size_t k = s.row_begin(i); k < s.row_end(i); ++k) {
      const std::size_t j = s.col_index(k);
      double num = 0.0;
      double den = 0.0;
      for (std::size_t q = 0; q < k_rank; ++q) {
        num += e.H(q, i) * p1(q, j);
        den += e.H(q, i) * p2(q, j);
      }
      s.weight(k) *= ratio_pow(num, den, p.beta.gamma, kFloor);
    }
  }
  return s;
}

SparseOperator update_r(const CoupledProblem& p, const FactorEstimate& e) {
  const double bm2 = p.beta.beta - 2.0;
  const double bm1 = p.beta.beta - 1.0;
  const Matrix xhat = cwise_max(matmul(matmul(e.R, e.W), e.H), kFloor);
  // F_l x K pieces of ((...)H^T)W^T, evaluated on the support only.
  const Matrix q1 =
      matmul_nt(hadamard(elementwise_power(xhat, bm2), p.X), e.H);
  const Matrix q2 = matmul_nt(elementwise_power(xhat, bm1), e.H);
  SparseOperator r = e.R;
  const std::size_t k_rank = e.W.cols();
  for (std::size_t i = 0; i < r.rows(); ++i) {
    for (std::size_t k = r.row_begin(i); k < r.row_end(i); ++k) {
      const std::size_t c = r.col_index(k);
      double num = 0.0;
      double den = 0.0;
      for (std::size_t q = 0; q < k_rank; ++q) {
        num += q1(i, q) * e.W(c, q);
        den += q2(i, q) * e.W(c, q);
      }
      r.weight(k) *= ratio_pow(num, den, p.beta.gamma, kFloor);
    }
  }
  return r;
}

std::size_t normalize_factors(Matrix& w, Matrix& h, Rng& rng, double floor) {
  if (w.cols() != h.rows()) {
    throw ShapeError("normalize_factors: W " + w.shape_str() + " vs H " +
                     h.shape_str());
  }
  std::size_t reseeded = 0;
  for (std::size_t k = 0; k < w.cols(); ++k) {
    double mass = 0.0;
    for (std::size_t i = 0; i < w.rows(); ++i) mass += w(i, k);
    if (mass < floor) {
      // A dead column cannot be revived by multiplicative updates.
      mass = 0.0;
      for (std::size_t i = 0; i < w.rows(); ++i) {
        w(i, k) = rng.next_double();
        mass += w(i, k);
      }
      for (std::size_t i = 0; i < w.rows(); ++i) w(i, k) /= mass;
      ++reseeded;
      continue;
    }
    for (std::size_t i = 0; i < w.rows(); ++i) w(i, k) /= mass;
    for (std::size_t j = 0; j < h.cols(); ++j) h(k, j) *= mass;
  }
  return reseeded;
}

Matrix random_uniform(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(rows, cols);
  double* p = m.data();
  for (std::size_t i = 0; i < m.size(); ++i) p[i] = rng.next_double();
  return m;
}

FactorEstimate solve(const CoupledProblem& p, const SolverConfig& cfg,
                     const FactorEstimate* init) {
  p.validate();
  cfg.validate();
  Rng rng(cfg.seed);

  FactorEstimate e;
  if (init) {
    if (init->W.rows() != p.f_high() || init->W.cols() != p.rank ||
        init->H.rows() != p.rank || init->H.cols() != p.n_high()) {
      throw ShapeError("solve: init W " + init->W.shape_str() + ", H " +
                       init->H.shape_str() + " do not match problem " +
                       shape_str(p.f_high(), p.n_high()) + " rank " +
                       std::to_string(p.rank));
    }
    e.W = init->W;
    e.H = init->H;
    e.W.ensure_finite("solve: init W (iteration 0)");
    e.H.ensure_finite("solve: init H (iteration 0)");
  } else {
    e.W = random_uniform(p.f_high(), p.rank, rng);
    e.H = random_uniform(p.rank, p.n_high(), rng);
  }
  e.R = p.R;
  e.S = p.S;

  double level = objective(p, e);
  e.objective_trace.push_back(level);

  for (std::size_t it = 0; it < cfg.max_iter_l1; ++it) {
    e.H = update_h(p, e);
    check_iterate(e.H, "H", "loop-1", it);
    e.W = update_w(p, e);
    check_iterate(e.W, "W", "loop-1", it);
    const double next = objective(p, e);
    check_descent(level, next, e.objective_trace.front(), "loop-1", it);
    e.reseeded_columns += normalize_factors(e.W, e.H, rng, cfg.floor);
    e.objective_trace.push_back(next);
    ++e.iterations_l1;
    const bool stop = std::fabs(level - next) <= cfg.kappa * level;
    level = next;
    if (stop) break;
  }

  for (std::size_t it = 0; it < cfg.max_iter_l2; ++it) {
    e.H = update_h(p, e);
    check_iterate(e.H, "H", "loop-2", it);
    e.W = update_w(p, e);
    check_iterate(e.W, "W", "loop-2", it);
    e.S = update_s(p, e);
    e.R = update_r(p, e);
    const double next = objective(p, e);
    check_descent(level, next, e.objective_trace.front(), "loop-2", it);
    e.reseeded_columns += normalize_factors(e.W, e.H, rng, cfg.floor);
    e.objective_trace.push_back(next);
    ++e.iterations_l2;
    const bool stop = std::fabs(level - next) <= cfg.kappa * level;
    level = next;
    if (cfg.renormalize_operators) {
      SparseOperator r = e.R;
      r.normalize_rows();
      e.R = std::move(r);
      normalize_s_outputs(e.S);
      level = objective(p, e);  // rescaling moved the objective; re-baseline
    }
    if (stop) break;
  }
  return e;
}

Matrix reconstruct(const FactorEstimate& e) { return matmul(e.W, e.H); }

Matrix baseline_update_h(const Matrix& m, const Matrix& w, const Matrix& h,
                         const BetaParam& beta, double floor) {
  const double bm2 = beta.beta - 2.0;
  const double bm1 = beta.beta - 1.0;
  const Matrix mhat = cwise_max(matmul(w, h), floor);
  const Matrix num = matmul_tn(w, hadamard(elementwise_power(mhat, bm2), m));
  const Matrix den = matmul_tn(w, elementwise_power(mhat, bm1));
  return mu_step(h, num, den, beta, floor);
}

Matrix baseline_update_w(const Matrix& m, const Matrix& w, const Matrix& h,
                         const BetaParam& beta, double floor) {
  const double bm2 = beta.beta - 2.0;
  const double bm1 = beta.beta - 1.0;
  const Matrix mhat = cwise_max(matmul(w, h), floor);
  const Matrix num = matmul_nt(hadamard(elementwise_power(mhat, bm2), m), h);
  const Matrix den = matmul_nt(elementwise_power(mhat, bm1), h);
  return mu_step(w, num, den, beta, floor);
}

BaselineResult baseline_beta_nmf(const Matrix& m, std::size_t rank,
                                 const BetaParam& beta,
                                 const SolverConfig& cfg) {
  cfg.validate();
  if (rank == 0 || rank > std::min(m.rows(), m.cols())) {
    throw ParamError("baseline_beta_nmf: rank " + std::to_string(rank) +
                     " outside [1, min" + m.shape_str() + "]");
  }
  Rng rng(cfg.seed);
  BaselineResult r;
  r.W = random_uniform(m.rows(), rank, rng);
  r.H = random_uniform(rank, m.cols(), rng);

  double level = D_beta(m, matmul(r.W, r.H), beta);
  r.objective_trace.push_back(level);
  for (std::size_t it = 0; it < cfg.max_iter_l1; ++it) {
    r.H = baseline_update_h(m, r.W, r.H, beta, cfg.floor);
    r.W = baseline_update_w(m, r.W, r.H, beta, cfg.floor);
    r.H.ensure_finite("baseline H at iteration " + std::to_string(it));
    r.W.ensure_finite("baseline W at iteration " + std::to_string(it));
    const double next = D_beta(m, matmul(r.W, r.H), beta);
    check_descent(level, next, r.objective_trace.front(), "baseline", it);
    r.reseeded_columns += normalize_factors(r.W, r.H, rng, cfg.floor);
    r.objective_trace.push_back(next);
    ++r.iterations;
    const bool stop = std::fabs(level - next) <= cfg.kappa * level;
    level = next;
    if (stop) break;
  }
  return r;
}

void save_checkpoint(const std::filesystem::path& dir, const FactorEstimate& e,
                     double beta, double lambda, double kappa) {
  std::filesystem::create_directories(dir);
  save_nmat(dir / "W.nmat", e.W);
  save_nmat(dir / "H.nmat", e.H);
  save_nmat(dir / "R.nmat", e.R.to_dense());
  save_nmat(dir / "S.nmat", e.S.to_dense());
  nlohmann::json manifest;
  manifest["beta"] = beta;
  manifest["lambda"] = lambda;
  manifest["kappa"] = kappa;
  manifest["iterations_l1"] = e.iterations_l1;
  manifest["iterations_l2"] = e.iterations_l2;
  manifest["reseeded_columns"] = e.reseeded_columns;
  manifest["objective_trace"] = e.objective_trace;
  atomic_write(dir / "manifest.json", manifest.dump(2) + "\n");
}

Checkpoint load_checkpoint(const std::filesystem::path& dir) {
  Checkpoint c;
  c.estimate.W = load_nmat(dir / "W.nmat");
  c.estimate.H = load_nmat(dir / "H.nmat");
  c.estimate.R = SparseOperator::from_dense(load_nmat(dir / "R.nmat"));
  c.estimate.S = SparseOperator::from_dense(load_nmat(dir / "S.nmat"));
  std::ifstream is(dir / "manifest.json");
  if (!is) {
    throw IoError("load_checkpoint: missing manifest in " + dir.string());
  }
  nlohmann::json manifest;
  try {
    is >> manifest;
  } catch (const nlohmann::json::exception& ex) {
    throw IoError("load_checkpoint: bad manifest in " + dir.string() + ": " +
                  ex.what());
  }
  c.beta = manifest.value("beta", 2.0);
  c.lambda = manifest.value("lambda", 1.0);
  c.kappa = manifest.value("kappa", 1e-4);
  c.estimate.iterations_l1 = manifest.value("iterations_l1", 0);
  c.estimate.iterations_l2 = manifest.value("iterations_l2", 0);
  c.estimate.reseeded_columns = manifest.value("reseeded_columns", 0);
  if (manifest.contains("objective_trace")) {
    c.estimate.objective_trace =
        manifest["objective_trace"].get<std::vector<double>>();
  }
  return c;
}

}  // namespace mrfuse
