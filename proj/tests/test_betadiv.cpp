#include <doctest.h>

#include <cmath>

#include "mrfuse/betadiv.hpp"
#include "mrfuse/rng.hpp"
#include "mrfuse/solver.hpp"
#include "oracles.hpp"

using namespace mrfuse;

TEST_CASE("gamma exponent branches") {
  CHECK(gamma_exponent(1.0) == 1.0);
  CHECK(gamma_exponent(2.0) == 1.0);
  CHECK(gamma_exponent(1.5) == 1.0);
  CHECK(gamma_exponent(0.0) == 0.5);
  CHECK(gamma_exponent(0.5) == doctest::Approx(1.0 / 1.5));
  CHECK(gamma_exponent(3.0) == 0.5);
}

TEST_CASE("scalar divergence values") {
  for (double beta : {0.0, 0.5, 1.0, 1.5, 2.0, 3.0}) {
    const BetaParam p(beta);
    CHECK(d_beta(0.7, 0.7, p) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(d_beta(3.0, 3.0, p) == doctest::Approx(0.0).epsilon(1e-12));
  }
  CHECK(d_beta(3.0, 1.0, BetaParam(2.0)) == doctest::Approx(2.0));
  CHECK(d_beta(2.0, 1.0, BetaParam(1.0)) ==
        doctest::Approx(2.0 * std::log(2.0) - 1.0));
  CHECK(d_beta(2.0, 1.0, BetaParam(0.0)) ==
        doctest::Approx(2.0 - std::log(2.0) - 1.0));
  CHECK_THROWS_AS(d_beta(1.0, 0.0, BetaParam(1.0)), NumericError);
}

TEST_CASE("nonnegativity over a parameter sweep") {
  Rng rng(17);
  for (double beta : {0.0, 0.5, 1.0, 1.5, 2.0, 3.0}) {
    const BetaParam p(beta);
    for (int i = 0; i < 500; ++i) {
      const double x = 4.0 * rng.next_double();
      const double y = 4.0 * rng.next_double();
      const double d = d_beta(x, y, p);
      CHECK(d >= -1e-12);
      if (std::fabs(x - y) > 1e-12 * std::max(x, 1.0)) {
        CHECK(d > 0.0);
      }
    }
  }
}

TEST_CASE("general branch is continuous at the KL and IS points") {
  Rng rng(23);
  for (int i = 0; i < 200; ++i) {
    const double x = 0.1 + 3.0 * rng.next_double();
    const double y = 0.1 + 3.0 * rng.next_double();
    const double kl = d_beta(x, y, BetaParam(1.0));
    const double is = d_beta(x, y, BetaParam(0.0));
    for (double eps : {1e-6, -1e-6}) {
      const double near_kl = d_beta(x, y, BetaParam(1.0 + eps));
      const double near_is = d_beta(x, y, BetaParam(0.0 + eps));
      if (std::fabs(kl) > 1e-12) {
        CHECK(near_kl == doctest::Approx(kl).epsilon(1e-4));
      }
      if (std::fabs(is) > 1e-12) {
        CHECK(near_is == doctest::Approx(is).epsilon(1e-4));
      }
    }
  }
}

TEST_CASE("IS divergence is scale invariant") {
  const BetaParam p(0.0);
  // Powers of two scale exactly in floating point.
  for (double c : {2.0, 4.0, 0.5, 1024.0}) {
    CHECK(d_beta(c * 1.7, c * 0.9, p) == d_beta(1.7, 0.9, p));
  }
  Rng rng(29);
  for (int i = 0; i < 100; ++i) {
    const double x = 0.2 + rng.next_double();
    const double y = 0.2 + rng.next_double();
    const double c = 0.1 + 5.0 * rng.next_double();
    CHECK(d_beta(c * x, c * y, p) ==
          doctest::Approx(d_beta(x, y, p)).epsilon(1e-12));
  }
}

TEST_CASE("matrix divergence") {
  Rng rng(31);
  Matrix a = random_uniform(2, 2, rng);
  CHECK(D_beta(a, a, BetaParam(1.7)) == doctest::Approx(0.0).epsilon(1e-12));

  // Floored all-zero second argument at beta = 2.
  const Matrix x(1, 2, std::vector<double>{1.0, 2.0});
  const Matrix zero(1, 2);
  CHECK(D_beta(x, zero, BetaParam(2.0)) == doctest::Approx(2.5).epsilon(1e-10));

  // Cross-check against the independent scalar loop.
  for (double beta : {0.0, 0.5, 1.0, 1.5, 2.0}) {
    const Matrix u = random_uniform(2, 2, rng);
    const Matrix v = random_uniform(2, 2, rng);
    CHECK(D_beta(u, v, BetaParam(beta)) ==
          doctest::Approx(oracle::divergence_scalar(u, v, beta))
              .epsilon(1e-12));
  }

  CHECK_THROWS_AS(D_beta(a, Matrix(3, 2, 1.0), BetaParam(1.0)), ShapeError);
}
