#include <random>

#include "doctest.h"
#include "support/oracles.hpp"
#include "svshrink/errors.hpp"
#include "svshrink/spectral.hpp"

using namespace svshrink;

namespace {

void check_invariants(const SvdFactors& f, const Matrix& Y, double tol = 1e-10) {
  const FactorErrors e = factor_errors(f, Y);
  CHECK(e.descending);
  CHECK(e.left_orthonormality <= tol);
  CHECK(e.right_orthonormality <= tol);
  CHECK(e.reconstruction <= tol);
  CHECK(f.U.rows() == Y.rows());
  CHECK(f.V.rows() == Y.cols());
  CHECK(f.S.size() == std::min(Y.rows(), Y.cols()));
  CHECK(f.S.minCoeff() >= 0.0);
}

}  // namespace

TEST_CASE("matrix shape validates dimensions") {
  const MatrixShape s(3, 5);
  CHECK(s.min_dim() == 3);
  CHECK(s.max_dim() == 5);
  CHECK(s.abs_diff() == 2);
  CHECK(s.size() == 15.0);
  CHECK_THROWS_AS(MatrixShape(0, 4), DimensionError);
  CHECK_THROWS_AS(MatrixShape(4, 0), DimensionError);
}

TEST_CASE("denoise problem requires positive sigma and finite data") {
  const Matrix Y = Matrix::Ones(2, 3);
  CHECK_NOTHROW(DenoiseProblem(Y, 1.0));
  CHECK_THROWS_AS(DenoiseProblem(Y, 0.0), ContractError);
  CHECK_THROWS_AS(DenoiseProblem(Y, -1.0), ContractError);
  Matrix bad = Y;
  bad(1, 2) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(DenoiseProblem(bad, 1.0), ContractError);
  bad(1, 2) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(DenoiseProblem(bad, 1.0), ContractError);
}

TEST_CASE("diagonal input factors to identity vectors") {
  Matrix Y = Matrix::Zero(2, 2);
  Y(0, 0) = 3.0;
  Y(1, 1) = 1.0;
  const SvdFactors f = svd(Y);
  CHECK(f.S[0] == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(f.S[1] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK((f.U - Matrix::Identity(2, 2)).norm() <= 1e-14);
  CHECK((f.V - Matrix::Identity(2, 2)).norm() <= 1e-14);
}

TEST_CASE("zero matrix gives zero spectrum with orthonormal factors") {
  const Matrix Y = Matrix::Zero(3, 2);
  const SvdFactors f = svd(Y);
  CHECK(f.S.size() == 2);
  CHECK(f.S.norm() == 0.0);
  check_invariants(f, Y);
}

TEST_CASE("random 50x50 reconstructs by direct multiplication") {
  std::mt19937_64 gen(11);
  const Matrix Y = oracle::gaussian_matrix(50, 50, gen);
  const SvdFactors f = svd(Y);
  const Matrix rebuilt = f.U * f.S.asDiagonal() * f.V.transpose();
  CHECK((rebuilt - Y).norm() / Y.norm() <= 1e-10);
  check_invariants(f, Y);
}

TEST_CASE("factor invariants hold over 1000 random shapes") {
  std::mt19937_64 gen(2024);
  std::uniform_int_distribution<int> dim(1, 200);
  for (int t = 0; t < 1000; ++t) {
    const Matrix Y = oracle::gaussian_matrix(dim(gen), dim(gen), gen);
    const SvdFactors f = svd(Y);
    const FactorErrors e = factor_errors(f, Y);
    REQUIRE(e.descending);
    REQUIRE(e.left_orthonormality <= 1e-10);
    REQUIRE(e.right_orthonormality <= 1e-10);
    REQUIRE(e.reconstruction <= 1e-10);
  }
}

TEST_CASE("svd is bitwise deterministic") {
  std::mt19937_64 gen(5);
  const Matrix Y = oracle::gaussian_matrix(37, 23, gen);
  const SvdFactors a = svd(Y);
  const SvdFactors b = svd(Y);
  CHECK(a.U == b.U);
  CHECK(a.S == b.S);
  CHECK(a.V == b.V);
}

TEST_CASE("sign convention: largest-magnitude entry of each left vector is non-negative") {
  std::mt19937_64 gen(9);
  for (int t = 0; t < 20; ++t) {
    const Matrix Y = oracle::gaussian_matrix(12, 8, gen);
    const SvdFactors f = svd(Y);
    for (Index k = 0; k < f.U.cols(); ++k) {
      Index arg = 0;
      for (Index r = 1; r < f.U.rows(); ++r) {
        if (std::abs(f.U(r, k)) > std::abs(f.U(arg, k))) arg = r;
      }
      CHECK(f.U(arg, k) >= 0.0);
    }
    // Flipping the input sign flips V only.
    const SvdFactors g = svd(-Y);
    CHECK((g.U - f.U).norm() <= 1e-10);
    CHECK((g.V + f.V).norm() <= 1e-10);
  }
}

TEST_CASE("sign convention breaks ties toward the lowest row") {
  Matrix Y(2, 1);
  Y << -1.0, 1.0;
  const SvdFactors f = svd(Y);
  CHECK(f.U(0, 0) > 0.0);
  CHECK(f.U(1, 0) < 0.0);
  CHECK(f.V(0, 0) < 0.0);
}

TEST_CASE("svd rejects non-finite input instead of returning NaN") {
  Matrix Y = Matrix::Ones(3, 3);
  Y(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(svd(Y), ContractError);
  CHECK_THROWS_AS(singular_values(Y), ContractError);
}

TEST_CASE("singular_values agrees with the full factorization") {
  std::mt19937_64 gen(4);
  const Matrix Y = oracle::gaussian_matrix(30, 17, gen);
  CHECK((singular_values(Y) - svd(Y).S).norm() <= 1e-12 * svd(Y).S[0]);
}

TEST_CASE("reconstruct") {
  std::mt19937_64 gen(17);
  const Matrix Y = oracle::gaussian_matrix(9, 6, gen);
  const SvdFactors f = svd(Y);

  SUBCASE("unchanged spectrum returns the input") {
    CHECK((reconstruct(f, f.S) - Y).norm() / Y.norm() <= 1e-10);
  }
  SUBCASE("zero spectrum returns zero") {
    CHECK(reconstruct(f, Vector::Zero(6)).norm() == 0.0);
  }
  SUBCASE("truncated spectrum equals EYM truncation") {
    for (Index r = 0; r <= 6; ++r) {
      Vector s = f.S;
      s.tail(6 - r).setZero();
      CHECK((reconstruct(f, s) - eym_truncate(Y, r)).norm() <= 1e-12 * Y.norm());
    }
  }
  SUBCASE("contract errors") {
    CHECK_THROWS_AS(reconstruct(f, Vector::Zero(5)), DimensionError);
    Vector neg = f.S;
    neg[2] = -1.0;
    CHECK_THROWS_AS(reconstruct(f, neg), ContractError);
    Vector inf = f.S;
    inf[0] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(reconstruct(f, inf), ContractError);
  }
}

TEST_CASE("eym truncation") {
  std::mt19937_64 gen(21);
  const Matrix Y = oracle::gaussian_matrix(5, 4, gen);
  const Vector y = svd(Y).S;

  CHECK((eym_truncate(Y, 4) - Y).norm() <= 1e-10 * Y.norm());
  CHECK(eym_truncate(Y, 0).norm() == 0.0);
  CHECK_THROWS_AS(eym_truncate(Y, 5), RangeError);
  CHECK_THROWS_AS(eym_truncate(Y, -1), RangeError);

  for (Index r = 0; r <= 4; ++r) {
    const Matrix T = eym_truncate(Y, r);
    CHECK(std::abs((Y - T).norm() - oracle::tail_energy(y, r)) <= 1e-8);
    const Vector s = singular_values(T);
    for (Index i = r; i < s.size(); ++i) CHECK(s[i] <= 1e-10 * y[0]);
  }
}

TEST_CASE("eym error equals tail energy on random inputs") {
  std::mt19937_64 gen(33);
  std::uniform_int_distribution<int> dim(1, 60);
  for (int t = 0; t < 100; ++t) {
    const Matrix Y = oracle::gaussian_matrix(dim(gen), dim(gen), gen);
    const Index L = std::min(Y.rows(), Y.cols());
    const Index r = std::uniform_int_distribution<Index>(0, L)(gen);
    const SvdFactors f = svd(Y);
    REQUIRE(std::abs((Y - eym_truncate(f, r)).norm() - oracle::tail_energy(f.S, r)) <= 1e-8);
  }
}
