#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "mrfuse/betadiv.hpp"
#include "mrfuse/matrix.hpp"
#include "mrfuse/operators.hpp"
#include "mrfuse/rng.hpp"

namespace mrfuse {

// One coupled instance: X is low-resolution in the first dimension
// (F_l x N), Y in the second (F x N_l). R (F_l x F) degrades the first
// dimension, S (N x N_l) the second, so that X ~ R W H and Y ~ W H S.
struct CoupledProblem {
  Matrix X;
  Matrix Y;
  SparseOperator R;  // F_l x F
  SparseOperator S;  // N x N_l
  double lambda = 1.0;
  BetaParam beta{2.0};
  std::size_t rank = 1;

  std::size_t f_high() const { return R.cols(); }
  std::size_t n_high() const { return S.rows(); }

  // Throws on an inconsistent shape chain, lambda < 0 or rank out of range.
  void validate() const;
};

struct SolverConfig {
  std::size_t max_iter_l1 = 500;
  std::size_t max_iter_l2 = 0;
  double kappa = 1e-4;  // relative-change stopping threshold, in (0,1)
  std::uint64_t seed = 0;
  double floor = kFloor;
  // When set, rows of R and output columns of S are rescaled to unit L1
  // after each loop-2 sweep. This rescaling is not objective-neutral, so the
  // descent guard re-baselines after it.
  bool renormalize_operators = false;

  void validate() const;
};

struct FactorEstimate {
  Matrix W;  // F x K
  Matrix H;  // K x N
  SparseOperator R;
  SparseOperator S;
  std::vector<double> objective_trace;
  std::size_t iterations_l1 = 0;
  std::size_t iterations_l2 = 0;
  std::size_t reseeded_columns = 0;
};

// L = D_beta(X || R W H) + lambda * D_beta(Y || W H S), with the model
// products floored inside the divergence. Uses the estimate's operators.
double objective(const CoupledProblem& p, const FactorEstimate& e);

// One multiplicative update of each block, the remaining blocks fixed at the
// estimate's values. Each update never increases the objective.
Matrix update_h(const CoupledProblem& p, const FactorEstimate& e);
Matrix update_w(const CoupledProblem& p, const FactorEstimate& e);
// Operator updates touch only the stored support; masked-out entries remain
// exactly zero.
SparseOperator update_s(const CoupledProblem& p, const FactorEstimate& e);
SparseOperator update_r(const CoupledProblem& p, const FactorEstimate& e);

// Rescales W to unit column L1 norms and H inversely so that W H is
// unchanged. Columns with mass below `floor` are reseeded from the RNG;
// returns how many were.
std::size_t normalize_factors(Matrix& w, Matrix& h, Rng& rng,
                              double floor = kFloor);

// Two-phase optimization: loop 1 alternates H and W with the operators kept
// fixed; loop 2 additionally learns S and R on their support. Both loops stop
// when |L_i - L_{i+1}| <= kappa * L_i or at their iteration cap, with the
// last loop-1 objective carried into loop 2. init, when given, supplies W and
// H; otherwise they are drawn uniform-(0,1] from the seeded generator.
FactorEstimate solve(const CoupledProblem& p, const SolverConfig& cfg,
                     const FactorEstimate* init = nullptr);

// V = W H.
Matrix reconstruct(const FactorEstimate& e);

struct BaselineResult {
  Matrix W;
  Matrix H;
  std::vector<double> objective_trace;
  std::size_t iterations = 0;
  std::size_t reseeded_columns = 0;
};

// Classical single-matrix beta-NMF multiplicative updates (the lambda = 0,
// R = I specialization), with the same stopping rule. Uses max_iter_l1 as the
// iteration budget.
BaselineResult baseline_beta_nmf(const Matrix& m, std::size_t rank,
                                 const BetaParam& beta,
                                 const SolverConfig& cfg);

// Single classical MU steps, exposed for cross-checks against the coupled
// updates.
Matrix baseline_update_h(const Matrix& m, const Matrix& w, const Matrix& h,
                         const BetaParam& beta, double floor = kFloor);
Matrix baseline_update_w(const Matrix& m, const Matrix& w, const Matrix& h,
                         const BetaParam& beta, double floor = kFloor);

// Checkpoint: a directory of NMAT files (W, H, dense R and S) plus a JSON
// manifest with beta, lambda, kappa, iteration counts and the objective
// trace.
void save_checkpoint(const std::filesystem::path& dir, const FactorEstimate& e,
                     double beta, double lambda, double kappa);

struct Checkpoint {
  FactorEstimate estimate;
  double beta = 2.0;
  double lambda = 1.0;
  double kappa = 1e-4;
};
Checkpoint load_checkpoint(const std::filesystem::path& dir);

// Uniform-(0,1] matrix from the seeded generator.
Matrix random_uniform(std::size_t rows, std::size_t cols, Rng& rng);

}  // namespace mrfuse
