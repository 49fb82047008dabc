#pragma once

#include <Eigen/Dense>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "scmd/tolerances.hpp"

namespace scmd {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Orthonormal basis of an r-dimensional subspace of R^d, 1 <= r < d.
// Columns are orthonormal to tol::kOrthonormal; construct via
// SubspaceBasis::from_orthonormal or orthonormalize().
struct SubspaceBasis {
  Matrix basis;  // d x r

  int ambient_dim() const { return static_cast<int>(basis.rows()); }
  int dim() const { return static_cast<int>(basis.cols()); }

  // Validates the orthonormality invariant; throws std::invalid_argument.
  static SubspaceBasis from_orthonormal(Matrix m);
};

// Rows of `m` selected by ascending `rows`; throws on an empty selection
// ("no observed entries").
Matrix restrict_rows(const Matrix& m, std::span<const int> rows);

struct LeastSquaresResult {
  Vector coeffs;
  double residual_sq = 0.0;
  // True when B^T B was rank deficient (cond > tol::kIllConditioned, which
  // happens whenever fewer rows than columns are observed) and the
  // truncated-pseudoinverse minimum-norm solution was used instead.
  bool rank_deficient = false;
};

// coeffs = argmin_v ||x - B v||^2 via the normal equations of the
// projection operator B (B^T B)^{-1} B^T; residual_sq = ||x - B coeffs||^2.
LeastSquaresResult partial_least_squares(const Matrix& basis_restricted,
                                         const Vector& x_restricted);

// Orthonormal basis with the same column span; throws std::invalid_argument
// ("degenerate candidate") if the input is numerically rank deficient.
SubspaceBasis orthonormalize(const Matrix& m);

struct ThinSvd {
  Matrix U;   // m x k
  Vector s;   // k, non-increasing, >= 0
  Matrix Vt;  // k x n
};

// Thin SVD, k = min(m, n).
ThinSvd thin_svd(const Matrix& m);

// Largest principal angle between two subspaces of the same ambient space
// (bases need not have equal dimension; angle is between the spans).
double largest_principal_angle(const SubspaceBasis& a, const SubspaceBasis& b);

}  // namespace scmd
