#include "scmd/linalg.hpp"

#include <Eigen/SVD>
#include <algorithm>

namespace scmd {

SubspaceBasis SubspaceBasis::from_orthonormal(Matrix m) {
  if (m.cols() < 1 || m.cols() >= m.rows()) {
    throw std::invalid_argument("subspace basis requires 1 <= r < d");
  }
  const Matrix gram = m.transpose() * m;
  const double err =
      (gram - Matrix::Identity(m.cols(), m.cols())).cwiseAbs().maxCoeff();
  if (err > tol::kOrthonormal) {
    throw std::invalid_argument("basis columns not orthonormal");
  }
  return SubspaceBasis{std::move(m)};
}

Matrix restrict_rows(const Matrix& m, std::span<const int> rows) {
  if (rows.empty()) {
    throw std::invalid_argument("no observed entries");
  }
  Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    out.row(static_cast<Eigen::Index>(k)) = m.row(rows[k]);
  }
  return out;
}

LeastSquaresResult partial_least_squares(const Matrix& basis_restricted,
                                         const Vector& x_restricted) {
  const Matrix& B = basis_restricted;
  const Eigen::Index r = B.cols();
  LeastSquaresResult res;

  const Matrix gram = B.transpose() * B;  // r x r
  const Vector rhs = B.transpose() * x_restricted;

  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
  const Vector& ev = eig.eigenvalues();  // ascending
  const double ev_max = std::max(ev(r - 1), 0.0);
  const double cutoff = ev_max * tol::kRankCutoff;

  res.rank_deficient = ev(0) <= cutoff || ev_max <= 0.0;
  Vector inv_ev(r);
  for (Eigen::Index i = 0; i < r; ++i) {
    inv_ev(i) = ev(i) > cutoff ? 1.0 / ev(i) : 0.0;  // truncated pinv
  }
  res.coeffs = eig.eigenvectors() *
               (inv_ev.asDiagonal() * (eig.eigenvectors().transpose() * rhs));
  const double rsq = (x_restricted - B * res.coeffs).squaredNorm();
  res.residual_sq = std::max(rsq, 0.0);
  return res;
}

SubspaceBasis orthonormalize(const Matrix& m) {
  ThinSvd svd = thin_svd(m);
  const Eigen::Index r = m.cols();
  const double cutoff = svd.s(0) * tol::kRankCutoff;
  for (Eigen::Index i = 0; i < r; ++i) {
    if (!(svd.s(i) > cutoff)) {
      throw std::invalid_argument("degenerate candidate");
    }
  }
  return SubspaceBasis{svd.U.leftCols(r)};
}

ThinSvd thin_svd(const Matrix& m) {
  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return ThinSvd{svd.matrixU(), svd.singularValues(),
                 svd.matrixV().transpose()};
}

double largest_principal_angle(const SubspaceBasis& a, const SubspaceBasis& b) {
  const Matrix cross = a.basis.transpose() * b.basis;
  Eigen::BDCSVD<Matrix> svd(cross);
  const Eigen::Index k = std::min(cross.rows(), cross.cols());
  // cos(theta_max) = smallest singular value of A^T B over min dimension
  const double c = std::clamp(svd.singularValues()(k - 1), -1.0, 1.0);
  return std::acos(c);
}

}  // namespace scmd
