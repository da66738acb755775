#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "mrfuse/io.hpp"
#include "mrfuse/matrix.hpp"
#include "mrfuse/rng.hpp"
#include "mrfuse/solver.hpp"

using namespace mrfuse;

namespace {

Matrix make(std::size_t r, std::size_t c, std::vector<double> v) {
  return Matrix(r, c, std::move(v));
}

std::filesystem::path temp_dir() {
  auto dir = std::filesystem::temp_directory_path() / "mrfuse_matrix_tests";
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("hadamard elementwise products") {
  const Matrix a = make(2, 2, {1, 2, 3, 4});
  const Matrix ones = make(2, 2, {1, 1, 1, 1});
  CHECK(max_abs_diff(hadamard(a, ones), a) == 0.0);

  const Matrix b = make(2, 2, {2, 0, 1, 3});
  const Matrix c = make(2, 2, {0, 5, 4, 2});
  const Matrix expected = make(2, 2, {0, 0, 4, 6});
  CHECK(max_abs_diff(hadamard(b, c), expected) == 0.0);

  const Matrix zero(2, 2);
  CHECK(max_abs_diff(hadamard(a, zero), zero) == 0.0);

  CHECK_THROWS_AS(hadamard(a, Matrix(2, 3)), ShapeError);
  CHECK_THROWS_WITH_AS(hadamard(a, Matrix(3, 1)),
                       doctest::Contains("2x2"), ShapeError);
}

TEST_CASE("hadamard is commutative and associative bit-for-bit") {
  Rng rng(11);
  const Matrix a = random_uniform(4, 5, rng);
  const Matrix b = random_uniform(4, 5, rng);
  CHECK(max_abs_diff(hadamard(a, b), hadamard(b, a)) == 0.0);

  // Associativity is bit-exact when every product is exactly representable:
  // small integers and powers of two qualify.
  Matrix ia(4, 5), ib(4, 5), ic(4, 5);
  for (std::size_t i = 0; i < ia.size(); ++i) {
    ia.data()[i] = static_cast<double>(i % 7);
    ib.data()[i] = static_cast<double>((i * 3) % 5);
    ic.data()[i] = std::exp2(static_cast<double>(i % 9) - 4.0);
  }
  CHECK(max_abs_diff(hadamard(hadamard(ia, ib), ic),
                     hadamard(ia, hadamard(ib, ic))) == 0.0);
}

TEST_CASE("elementwise_power") {
  const Matrix a = make(1, 2, {4, 9});
  const Matrix root = elementwise_power(a, 0.5);
  CHECK(root(0, 0) == doctest::Approx(2.0));
  CHECK(root(0, 1) == doctest::Approx(3.0));

  CHECK(max_abs_diff(elementwise_power(a, 1.0), a) == 0.0);

  const Matrix z = elementwise_power(make(1, 2, {2, 5}), 0.0);
  CHECK(z(0, 0) == 1.0);
  CHECK(z(0, 1) == 1.0);
  // 0^0 = 1 by convention
  CHECK(elementwise_power(Matrix(1, 1), 0.0)(0, 0) == 1.0);

  CHECK_THROWS_AS(elementwise_power(Matrix(1, 1), -1.0), NumericError);
}

TEST_CASE("power composition property") {
  Rng rng(7);
  Matrix a = random_uniform(6, 6, rng);
  for (const auto [p, q] : {std::pair{0.5, 3.0}, {2.0, -0.5}, {1.5, 0.4}}) {
    const Matrix lhs = elementwise_power(elementwise_power(a, p), q);
    const Matrix rhs = elementwise_power(a, p * q);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(lhs.data()[i] ==
            doctest::Approx(rhs.data()[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("safe_divide") {
  const Matrix n = make(1, 1, {1});
  CHECK(safe_divide(n, make(1, 1, {2}), 1e-16)(0, 0) == 0.5);
  CHECK(safe_divide(n, make(1, 1, {0}), 1e-16)(0, 0) == 1e16);
  const Matrix zero(2, 3);
  CHECK(max_abs_diff(safe_divide(zero, Matrix(2, 3, 0.7), 1e-16), zero) == 0.0);
  CHECK_THROWS_AS(safe_divide(n, Matrix(2, 1, 1.0), 1e-16), ShapeError);
  CHECK_THROWS_AS(safe_divide(n, n, 0.0), ParamError);
}

TEST_CASE("safe_divide is exact when the denominator clears the floor") {
  Rng rng(3);
  const Matrix num = random_uniform(5, 4, rng);
  Matrix den = random_uniform(5, 4, rng);
  const Matrix q = safe_divide(num, den, 1e-16);
  for (std::size_t i = 0; i < num.size(); ++i) {
    CHECK(q.data()[i] == num.data()[i] / den.data()[i]);
  }
}

TEST_CASE("frobenius_norm") {
  CHECK(frobenius_norm(make(1, 2, {3, 4})) == doctest::Approx(5.0));
  CHECK(frobenius_norm(Matrix(3, 3)) == 0.0);
  CHECK(frobenius_norm(Matrix::identity(2)) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("matmul against hand-computed products") {
  const Matrix a = make(2, 3, {1, 2, 3, 4, 5, 6});
  const Matrix b = make(3, 2, {7, 8, 9, 10, 11, 12});
  const Matrix ab = matmul(a, b);
  CHECK(ab(0, 0) == doctest::Approx(58));
  CHECK(ab(1, 1) == doctest::Approx(154));
  CHECK(max_abs_diff(matmul_tn(transpose(a), b), ab) < 1e-14);
  CHECK(max_abs_diff(matmul_nt(a, transpose(b)), ab) < 1e-14);
  CHECK_THROWS_AS(matmul(a, a), ShapeError);
}

TEST_CASE("validate flags bad entries") {
  Matrix m(2, 2, 1.0);
  m.validate("ok");
  m(1, 0) = -0.5;
  CHECK_THROWS_AS(m.validate("neg"), NumericError);
  m(1, 0) = std::nan("");
  CHECK_THROWS_AS(m.ensure_finite("nan"), NumericError);
}

TEST_CASE("nmat round trip") {
  const auto dir = temp_dir();
  Rng rng(5);
  const Matrix m = random_uniform(7, 3, rng);
  save_nmat(dir / "m.nmat", m);
  const Matrix back = load_nmat(dir / "m.nmat");
  CHECK(back.rows() == 7);
  CHECK(back.cols() == 3);
  CHECK(max_abs_diff(m, back) == 0.0);

  CHECK_THROWS_AS(load_nmat(dir / "missing.nmat"), IoError);
}

TEST_CASE("csv round trip and error paths") {
  const auto dir = temp_dir();
  const Matrix m = make(2, 3, {1, 2.5, 3, 0, 4, 5});
  save_csv(dir / "m.csv", m);
  CHECK(max_abs_diff(load_csv(dir / "m.csv"), m) == 0.0);

  atomic_write(dir / "ragged.csv", "1,2\n3\n");
  CHECK_THROWS_AS(load_csv(dir / "ragged.csv"), IoError);
  atomic_write(dir / "neg.csv", "1,-2\n3,4\n");
  CHECK_THROWS_AS(load_csv(dir / "neg.csv"), NumericError);
}

TEST_CASE("rng determinism and moments") {
  Rng a(42), b(42), c(43);
  bool all_equal = true;
  bool any_diff = false;
  for (int i = 0; i < 64; ++i) {
    const double va = a.next_double();
    all_equal = all_equal && va == b.next_double();
    any_diff = any_diff || va != c.next_double();
    CHECK(va > 0.0);
    CHECK(va <= 1.0);
  }
  CHECK(all_equal);
  CHECK(any_diff);

  Rng g(1);
  double mean = 0.0;
  double var = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double v = g.next_gaussian();
    mean += v;
    var += v * v;
  }
  mean /= n;
  var = var / n - mean * mean;
  CHECK(mean == doctest::Approx(0.0).epsilon(0.02));
  CHECK(var == doctest::Approx(1.0).epsilon(0.02));

  Rng p(2);
  double pmean = 0.0;
  for (int i = 0; i < 100000; ++i) pmean += double(p.next_poisson(3.5));
  CHECK(pmean / 100000 == doctest::Approx(3.5).epsilon(0.02));
}
