#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mard/matrix_ops.hpp"
#include "support/test_support.hpp"

using namespace mard;
using namespace mard::testing;

TEST_CASE("kron identity and scalar-block cases") {
  const Matrix i2 = Matrix::Identity(2, 2);
  const Matrix i3 = Matrix::Identity(3, 3);
  CHECK(max_abs_diff(kron(i2, i3), Matrix::Identity(6, 6)) == 0.0);

  Matrix a(2, 2);
  a << 1, 2, 3, 4;
  Matrix b(1, 1);
  b << 5;
  Matrix expected(2, 2);
  expected << 5, 10, 15, 20;
  CHECK(max_abs_diff(kron(a, b), expected) == 0.0);
}

TEST_CASE("kron mixed product rule against dense multiplication") {
  Rng rng(11);
  for (int rep = 0; rep < 50; ++rep) {
    const Matrix a = random_matrix(2, 2, rng);
    const Matrix b = random_matrix(2, 2, rng);
    const Matrix c = random_matrix(2, 2, rng);
    const Matrix d = random_matrix(2, 2, rng);
    CHECK(rel_diff(kron(a, b) * kron(c, d), kron(a * c, b * d)) < 1e-12);
  }
}

TEST_CASE("kron transpose, inverse, bilinearity, associativity") {
  Rng rng(12);
  for (int rep = 0; rep < 50; ++rep) {
    const Matrix a = random_spd(2, rng);
    const Matrix b = random_spd(3, rng);
    CHECK(rel_diff(kron(a, b).transpose(), kron(a.transpose(), b.transpose())) < 1e-12);
    CHECK(rel_diff(kron(a, b).inverse(), kron(a.inverse(), b.inverse())) < 1e-8);

    const Matrix c = random_matrix(2, 2, rng);
    const Matrix d = random_matrix(3, 3, rng);
    CHECK(rel_diff(kron(a, c + d.topLeftCorner(2, 2)),
                   kron(a, c) + kron(a, d.topLeftCorner(2, 2))) < 1e-12);
    CHECK(rel_diff(kron(kron(a, c), d), kron(a, kron(c, d))) < 1e-12);
  }
}

TEST_CASE("kron determinant identity") {
  Rng rng(13);
  for (int rep = 0; rep < 50; ++rep) {
    const Matrix e = random_spd(2, rng);
    const Matrix f = random_spd(2, rng);
    const double lhs = kron(e, f).determinant();
    const double rhs = std::pow(e.determinant(), 2) * std::pow(f.determinant(), 2);
    CHECK(std::abs(lhs - rhs) / std::max(std::abs(rhs), 1e-300) < 1e-10);
  }
}

TEST_CASE("vec stacking order and zero case") {
  Matrix a(2, 2);
  a << 1, 2, 3, 4;
  Vector expected(4);
  expected << 1, 3, 2, 4;
  CHECK((vec(a) - expected).cwiseAbs().maxCoeff() == 0.0);
  CHECK(vec(Matrix::Zero(2, 2)).cwiseAbs().maxCoeff() == 0.0);

  CHECK(max_abs_diff(unvec(vec(a), 2, 2), a) == 0.0);
}

TEST_CASE("vec(ABC) = kron(C^T, A) vec(B)") {
  Rng rng(14);
  for (int rep = 0; rep < 50; ++rep) {
    const Matrix a = random_matrix(3, 2, rng);
    const Matrix b = random_matrix(2, 2, rng);
    const Matrix c = random_matrix(2, 3, rng);
    const Vector lhs = vec(a * b * c);
    const Vector rhs = kron(c.transpose(), a) * vec(b);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("trace identity tr(AB) = vec(A^T)^T vec(B)") {
  Rng rng(15);
  for (int rep = 0; rep < 50; ++rep) {
    const Matrix a = random_matrix(3, 4, rng);
    const Matrix b = random_matrix(4, 3, rng);
    const double lhs = (a * b).trace();
    const double rhs = vec(a.transpose()).dot(vec(b));
    CHECK(std::abs(lhs - rhs) < 1e-12 * std::max(1.0, std::abs(lhs)));
  }
}

TEST_CASE("commutation matrix defining property") {
  CHECK(max_abs_diff(commutation_matrix(1, 1), Matrix::Identity(1, 1)) == 0.0);

  Matrix a(2, 2);
  a << 1, 2, 3, 4;
  Vector expected(4);
  expected << 1, 2, 3, 4;  // vec of the transpose
  CHECK((commutation_matrix(2, 2) * vec(a) - expected).cwiseAbs().maxCoeff() == 0.0);

  Rng rng(16);
  for (int rep = 0; rep < 20; ++rep) {
    const Matrix m = random_matrix(3, 2, rng);
    const Vector lhs = commutation_matrix(3, 2) * vec(m);
    CHECK((lhs - vec(m.transpose())).cwiseAbs().maxCoeff() == 0.0);
  }

  const Matrix g = commutation_matrix(3, 2);
  CHECK(max_abs_diff(g.transpose() * g, Matrix::Identity(6, 6)) == 0.0);
}

TEST_CASE("woodbury_inverse closed cases") {
  const SpdMatrix eye(Matrix::Identity(3, 3));
  const SpdMatrix half = woodbury_inverse(eye, eye);
  CHECK(max_abs_diff(half.mat(), 0.5 * Matrix::Identity(3, 3)) < 1e-14);

  Matrix a_inv(2, 2), c_inv(2, 2);
  a_inv << 1, 0, 0, 0.5;
  c_inv << 1, 0, 0, 1;
  Matrix expected(2, 2);
  expected << 0.5, 0, 0, 1.0 / 3.0;
  CHECK(max_abs_diff(woodbury_inverse(SpdMatrix(a_inv), SpdMatrix(c_inv)).mat(), expected) <
        1e-14);
}

TEST_CASE("woodbury_inverse vs dense inversion oracle") {
  Rng rng(17);
  for (int rep = 0; rep < 50; ++rep) {
    const Matrix a = random_spd(4, rng);
    const Matrix c = random_spd(4, rng);
    const SpdMatrix result =
        woodbury_inverse(SpdMatrix(a.inverse()), SpdMatrix(c.inverse()));
    const Matrix dense = (a + c).inverse();
    CHECK(rel_diff(result.mat(), dense) < 1e-8);
    // result * (A + C) = I to 1e-8 relative.
    CHECK(rel_diff(result.mat() * (a + c), Matrix::Identity(4, 4)) < 1e-8);
  }
}

TEST_CASE("SpdMatrix invariants") {
  Matrix asym(2, 2);
  asym << 1, 0.5, 0.1, 1;
  CHECK_THROWS_AS(SpdMatrix{asym}, ParameterError);

  Matrix indef(2, 2);
  indef << 1, 2, 2, 1;
  CHECK_THROWS_AS(SpdMatrix{indef}, SingularityError);

  Matrix rect = Matrix::Identity(2, 3);
  CHECK_THROWS_AS(SpdMatrix{rect}, ParameterError);

  Matrix nonfinite = Matrix::Identity(2, 2);
  nonfinite(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(SpdMatrix{nonfinite}, ParameterError);

  CHECK_THROWS_AS(woodbury_inverse(SpdMatrix(Matrix::Identity(2, 2)),
                                   SpdMatrix(Matrix::Identity(3, 3))),
                  ParameterError);
}
