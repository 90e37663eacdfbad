#pragma once

#include <Eigen/Dense>

namespace interx {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

namespace linalg {

/// Relative pivot threshold below which a design is treated as rank deficient.
inline constexpr double kRankTolerance = 1e-10;

struct LeastSquaresFit {
  Vector coefficients;
  Vector residuals;
  /// Squared ratio of the largest to the smallest QR pivot (condition of the Gram matrix).
  double gram_condition = 1.0;
};

/// Least squares through column-pivoted Householder QR.
/// Throws RankDeficient when the smallest pivot falls below kRankTolerance times the largest.
/// A design with zero columns yields empty coefficients and residuals equal to the response.
LeastSquaresFit solve_ols(const Matrix& design, const Vector& response);

/// M = I - A (A'A)^{-1} A', built from the thin Q factor of A.
Matrix residual_maker(const Matrix& a);

/// det(A'A), computed as the squared product of the QR pivots. May return 0.
double gram_det(const Matrix& a);

/// Smallest eigenvalue of D^{-1/2} S D^{-1/2} where D = diag(S). Scale free; returns 0 when a
/// diagonal entry is not positive and 1 for an empty matrix.
double normalized_min_eigenvalue(const Matrix& symmetric);

}  // namespace linalg
}  // namespace interx
