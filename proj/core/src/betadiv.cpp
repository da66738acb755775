#include "mrfuse/betadiv.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mrfuse {

double gamma_exponent(double beta) {
  if (beta < 1.0) return 1.0 / (2.0 - beta);
  if (beta <= 2.0) return 1.0;
  return 1.0 / (beta - 1.0);
}

double d_beta(double x, double y, const BetaParam& p) {
  if (!(y > 0.0)) {
    throw NumericError("d_beta: second argument must be positive, got " +
                       std::to_string(y));
  }
  const double b = p.beta;
  if (b == 1.0) {
    // KL; the x*log(x) term vanishes in the limit x -> 0.
    return x > 0.0 ? x * std::log(x / y) - x + y : y;
  }
  if (b == 0.0) {
    // IS; x floored to keep d(0 || y) finite, consistent with the update
    // kernels.
    const double r = std::max(x, kFloor) / y;
    return r - std::log(r) - 1.0;
  }
  const double xs = b < 0.0 ? std::max(x, kFloor) : x;
  return (std::pow(xs, b) + (b - 1.0) * std::pow(y, b) -
          b * xs * std::pow(y, b - 1.0)) /
         (b * (b - 1.0));
}

double D_beta(const Matrix& a, const Matrix& b, const BetaParam& p,
              double eps) {
  if (!a.same_shape(b)) {
    throw ShapeError("D_beta: shape mismatch " + a.shape_str() + " vs " +
                     b.shape_str());
  }
  const double* pa = a.data();
  const double* pb = b.data();
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    total += d_beta(pa[i], std::max(pb[i], eps), p);
  }
  return total;
}

}  // namespace mrfuse
