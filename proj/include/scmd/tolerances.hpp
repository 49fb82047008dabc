#pragma once

// Central numeric tolerances. Keep every magic epsilon here so the test
// suite and the solver agree on one set of constants.
namespace scmd::tol {

// Orthonormality of subspace bases: ||U^T U - I||_max.
inline constexpr double kOrthonormal = 1e-8;

// Relative rank cutoff: singular values below s_max * kRankCutoff are
// treated as zero (eigenvalues of B^T B below lambda_max * kRankCutoff).
inline constexpr double kRankCutoff = 1e-12;

// Condition number of B^T B above which the least-squares solve switches
// to the truncated pseudoinverse path.
inline constexpr double kIllConditioned = 1e12;

// LP feasibility / optimality.
inline constexpr double kLpFeas = 1e-9;
inline constexpr double kLpDualFeas = 1e-9;
inline constexpr double kLpDualityGap = 1e-6;

// Benders cut management.
inline constexpr double kPhiViolation = 1e-6;   // relative, scaled by 1+|Phi|
inline constexpr double kCutDuplicate = 1e-9;

// Pricing.
inline constexpr double kGradZero = 1e-14;      // ||grad||^2 below this: converged
inline constexpr double kSameSubspaceAngle = 1e-3;

}  // namespace scmd::tol
