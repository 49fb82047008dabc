#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "scmd/linalg.hpp"
#include "scmd/rng.hpp"

using namespace scmd;

namespace {

Matrix random_matrix(int rows, int cols, Rng& rng) {
  Matrix m(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) m(i, j) = rng.normal();
  }
  return m;
}

}  // namespace

TEST_CASE("restrict_rows selects rows in ascending order") {
  Matrix basis(3, 1);
  basis << 1, 0, 0;
  const std::vector<int> rows{0, 2};
  const Matrix r = restrict_rows(basis, rows);
  REQUIRE(r.rows() == 2);
  CHECK(r(0, 0) == 1.0);
  CHECK(r(1, 0) == 0.0);
}

TEST_CASE("restrict_rows with all rows is the identity case") {
  Rng rng(7);
  const Matrix m = random_matrix(5, 2, rng);
  std::vector<int> all{0, 1, 2, 3, 4};
  CHECK((restrict_rows(m, all) - m).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("restrict_rows matches an index-by-index copy") {
  Rng rng(11);
  const SubspaceBasis basis = orthonormalize(random_matrix(5, 2, rng));
  const std::vector<int> rows{1, 3, 4};
  const Matrix r = restrict_rows(basis.basis, rows);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    for (int c = 0; c < 2; ++c) {
      CHECK(r(static_cast<int>(k), c) == basis.basis(rows[k], c));
    }
  }
}

TEST_CASE("restrict_rows rejects an empty selection") {
  Matrix m(3, 1);
  m.setOnes();
  CHECK_THROWS_WITH_AS(restrict_rows(m, {}), "no observed entries", std::invalid_argument);
}

TEST_CASE("partial_least_squares on a point inside the subspace") {
  Matrix b(3, 1);
  b << 1, 0, 0;
  Vector x(3);
  x << 2, 0, 0;
  const auto res = partial_least_squares(b, x);
  CHECK(res.coeffs(0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(res.residual_sq == doctest::Approx(0.0).epsilon(1e-12));
  CHECK_FALSE(res.rank_deficient);
}

TEST_CASE("partial_least_squares on an orthogonal point") {
  Matrix b(3, 1);
  b << 1, 0, 0;
  Vector x(3);
  x << 0, 3, 0;
  const auto res = partial_least_squares(b, x);
  CHECK(res.coeffs(0) == doctest::Approx(0.0));
  CHECK(res.residual_sq == doctest::Approx(9.0));
}

TEST_CASE("partial_least_squares matches an independent QR solve") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix b = random_matrix(6, 2, rng);
    const Vector x = random_matrix(6, 1, rng).col(0);
    const auto res = partial_least_squares(b, x);
    // independent route: column-pivoted Householder QR
    const Vector qr = b.colPivHouseholderQr().solve(x);
    CHECK((res.coeffs - qr).norm() < 1e-8);
    CHECK(res.residual_sq == doctest::Approx((x - b * qr).squaredNorm()).epsilon(1e-8));
  }
}

TEST_CASE("partial_least_squares flags rank deficiency and falls back") {
  // fewer rows than columns: the normal equations are singular
  Matrix b(1, 2);
  b << 1, 1;
  Vector x(1);
  x << 4;
  const auto res = partial_least_squares(b, x);
  CHECK(res.rank_deficient);
  CHECK(res.residual_sq == doctest::Approx(0.0).epsilon(1e-12));
  // minimum-norm solution splits the weight
  CHECK(res.coeffs(0) == doctest::Approx(2.0));
  CHECK(res.coeffs(1) == doctest::Approx(2.0));
}

TEST_CASE("orthonormalize keeps identity columns") {
  Matrix m = Matrix::Identity(4, 2);
  const SubspaceBasis b = orthonormalize(m);
  CHECK((b.basis.transpose() * b.basis - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
  // span check
  CHECK((b.basis * (b.basis.transpose() * m) - m).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("orthonormalize removes scaling") {
  Matrix m(3, 1);
  m << 2, 0, 0;
  const SubspaceBasis b = orthonormalize(m);
  CHECK(std::abs(std::abs(b.basis(0, 0)) - 1.0) < 1e-12);
}

TEST_CASE("orthonormalize preserves the span (cross-projection oracle)") {
  Rng rng(17);
  const Matrix m = random_matrix(8, 3, rng);
  const SubspaceBasis b = orthonormalize(m);
  // project input onto result and back: residual below 1e-8
  const Matrix proj = b.basis * (b.basis.transpose() * m);
  CHECK((proj - m).norm() < 1e-8);
  const Matrix gram = b.basis.transpose() * b.basis;
  CHECK((gram - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("orthonormalize rejects degenerate input") {
  Matrix m(4, 2);
  m.col(0) << 1, 1, 0, 0;
  m.col(1) << 2, 2, 0, 0;  // collinear
  CHECK_THROWS_WITH_AS(orthonormalize(m), "degenerate candidate", std::invalid_argument);
}

TEST_CASE("thin_svd of a diagonal matrix") {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = 3;
  m(1, 1) = 1;
  const ThinSvd svd = thin_svd(m);
  CHECK(svd.s(0) == doctest::Approx(3.0));
  CHECK(svd.s(1) == doctest::Approx(1.0));
}

TEST_CASE("thin_svd of a rank-one outer product") {
  Vector u(3), v(2);
  u << 1, 2, 2;
  v << 3, 4;
  const Matrix m = u * v.transpose();
  const ThinSvd svd = thin_svd(m);
  CHECK(svd.s(0) == doctest::Approx(u.norm() * v.norm()));
  CHECK(svd.s(1) == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("thin_svd reconstructs the input") {
  Rng rng(23);
  const Matrix m = random_matrix(5, 4, rng);
  const ThinSvd svd = thin_svd(m);
  const Matrix back = svd.U * svd.s.asDiagonal() * svd.Vt;
  CHECK((back - m).cwiseAbs().maxCoeff() < 1e-8);
  for (int i = 1; i < svd.s.size(); ++i) CHECK(svd.s(i - 1) >= svd.s(i));
}

TEST_CASE("residual is invariant under orthonormal change of basis") {
  Rng rng(31);
  const SubspaceBasis b = orthonormalize(random_matrix(7, 3, rng));
  // rotate within the subspace by a random orthogonal Q
  const Matrix q = Eigen::HouseholderQR<Matrix>(random_matrix(3, 3, rng))
                       .householderQ();
  const Matrix rotated = b.basis * q;
  const Vector x = random_matrix(7, 1, rng).col(0);
  const double r1 = partial_least_squares(b.basis, x).residual_sq;
  const double r2 = partial_least_squares(rotated, x).residual_sq;
  CHECK(r1 == doctest::Approx(r2).epsilon(1e-8));
}

TEST_CASE("fully observed residual equals norm minus projection") {
  Rng rng(37);
  const SubspaceBasis b = orthonormalize(random_matrix(6, 2, rng));
  const Vector x = random_matrix(6, 1, rng).col(0);
  const auto res = partial_least_squares(b.basis, x);
  const double expect = x.squaredNorm() - (b.basis.transpose() * x).squaredNorm();
  CHECK(res.residual_sq == doctest::Approx(expect).epsilon(1e-10));
  CHECK(res.residual_sq >= 0.0);
}

TEST_CASE("largest principal angle between identical spans is zero") {
  Rng rng(41);
  const SubspaceBasis a = orthonormalize(random_matrix(6, 2, rng));
  CHECK(largest_principal_angle(a, a) < 1e-7);
}
