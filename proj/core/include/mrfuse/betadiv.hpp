#pragma once

#include "mrfuse/matrix.hpp"

namespace mrfuse {

// Exponent applied to the multiplicative-update ratio: 1/(2-beta) below the
// KL point, 1 on [1,2], 1/(beta-1) above the Euclidean point.
double gamma_exponent(double beta);

// Divergence parameter with its update exponent cached.
struct BetaParam {
  double beta = 2.0;
  double gamma = 1.0;

  BetaParam() = default;
  explicit BetaParam(double b) : beta(b), gamma(gamma_exponent(b)) {}
};

// Scalar beta-divergence d_beta(x || y). Requires y > 0 (callers floor y);
// x = 0 is handled by the branch limit for beta = 1 and by flooring x for
// branches with logarithms or negative powers of x.
double d_beta(double x, double y, const BetaParam& p);

// Entrywise sum of d_beta with the second argument floored at eps.
double D_beta(const Matrix& a, const Matrix& b, const BetaParam& p,
              double eps = kFloor);

}  // namespace mrfuse
