#include "interx/linalg.hpp"

#include <cmath>
#include <limits>

#include "interx/error.hpp"

namespace interx::linalg {

namespace {

using Qr = Eigen::ColPivHouseholderQR<Matrix>;

// Returns the Gram condition estimate, throwing if the pivots signal rank deficiency.
double checked_condition(const Qr& qr, Eigen::Index k) {
  const auto& r = qr.matrixR();
  double largest = 0.0;
  double smallest = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < k; ++j) {
    const double p = std::abs(r(j, j));
    largest = std::max(largest, p);
    smallest = std::min(smallest, p);
  }
  if (!(largest > 0.0) || smallest < kRankTolerance * largest) {
    const double cond = smallest > 0.0 ? (largest / smallest) * (largest / smallest)
                                       : std::numeric_limits<double>::infinity();
    throw RankDeficient(cond);
  }
  const double ratio = largest / smallest;
  return ratio * ratio;
}

}  // namespace

LeastSquaresFit solve_ols(const Matrix& design, const Vector& response) {
  if (design.rows() != response.size()) {
    throw LengthMismatch("solve_ols: design has " + std::to_string(design.rows()) +
                         " rows but response has " + std::to_string(response.size()));
  }
  LeastSquaresFit fit;
  const Eigen::Index k = design.cols();
  if (k == 0) {
    fit.coefficients = Vector(0);
    fit.residuals = response;
    return fit;
  }
  if (design.rows() < k) throw RankDeficient(std::numeric_limits<double>::infinity());

  const Qr qr(design);
  fit.gram_condition = checked_condition(qr, k);
  fit.coefficients = qr.solve(response);
  fit.residuals = response - design * fit.coefficients;
  return fit;
}

Matrix residual_maker(const Matrix& a) {
  const Eigen::Index t = a.rows();
  const Eigen::Index k = a.cols();
  if (k == 0) return Matrix::Identity(t, t);
  if (t < k) throw RankDeficient(std::numeric_limits<double>::infinity());

  const Qr qr(a);
  checked_condition(qr, k);
  const Matrix q = qr.householderQ() * Matrix::Identity(t, k);
  Matrix m = Matrix::Identity(t, t) - q * q.transpose();
  // Symmetrize exactly so downstream quadratic forms are symmetric to the bit.
  return 0.5 * (m + m.transpose());
}

double gram_det(const Matrix& a) {
  const Eigen::Index k = a.cols();
  if (k == 0) return 1.0;
  if (a.rows() < k) return 0.0;
  const Qr qr(a);
  double det = 1.0;
  for (Eigen::Index j = 0; j < k; ++j) {
    const double p = qr.matrixR()(j, j);
    det *= p * p;
  }
  return det;
}

double normalized_min_eigenvalue(const Matrix& symmetric) {
  const Eigen::Index k = symmetric.rows();
  if (k == 0) return 1.0;
  Vector scale(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    const double d = symmetric(j, j);
    if (!(d > 0.0) || !std::isfinite(d)) return 0.0;
    scale(j) = 1.0 / std::sqrt(d);
  }
  const Matrix normalized = scale.asDiagonal() * symmetric * scale.asDiagonal();
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(normalized, Eigen::EigenvaluesOnly);
  return std::max(0.0, eig.eigenvalues().minCoeff());
}

}  // namespace interx::linalg
