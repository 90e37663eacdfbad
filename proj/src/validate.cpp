#include "interx/error.hpp"
#include "interx/panel.hpp"

namespace interx {

namespace {

double hadamard_ratio(const Matrix& a, double det) {
  if (a.cols() == 0) return 1.0;
  double diag = 1.0;
  for (Eigen::Index k = 0; k < a.cols(); ++k) diag *= a.col(k).squaredNorm();
  return diag > 0.0 ? det / diag : 0.0;
}

PooledCheck pooled(std::string name, const Matrix& sum, std::size_t count, double h_min) {
  PooledCheck check{std::move(name)};
  if (count < 2) return check;
  check.margin = linalg::normalized_min_eigenvalue(sum / static_cast<double>(count));
  check.ok = check.margin >= h_min;
  return check;
}

}  // namespace

std::vector<std::size_t> ValidationReport::retained_units() const {
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < units.size(); ++i) {
    if (units[i].rank_x_ok) keep.push_back(i);
  }
  return keep;
}

ValidationReport validate(const PanelDataset& ds, double h_min) {
  if (!(h_min > 0.0)) throw InvalidArgument("h_min must be positive");
  ds.check();
  const auto& d = ds.dims;
  ValidationReport report;
  report.h_min = h_min;
  report.units.reserve(d.n);

  const auto p = static_cast<Eigen::Index>(d.psi_cols());
  const auto pt = static_cast<Eigen::Index>(d.psi_tilde_cols());
  const auto kh = static_cast<Eigen::Index>(d.kh);
  Matrix psi_sum = Matrix::Zero(p, p);
  Matrix psi_tilde_sum = Matrix::Zero(pt, pt);
  Matrix h_sum = Matrix::Zero(kh, kh);
  std::size_t retained = 0;

  for (std::size_t i = 0; i < d.n; ++i) {
    const Matrix& x = ds.x[i];
    const Matrix x_minus1 = x.rightCols(x.cols() - 1);
    UnitCheck u;
    u.unit = ds.unit_labels[i];
    u.det_x = linalg::gram_det(x);
    u.det_x_ratio = hadamard_ratio(x, u.det_x);
    u.det_x_minus1 = linalg::gram_det(x_minus1);
    u.det_x_minus1_ratio = hadamard_ratio(x_minus1, u.det_x_minus1);
    u.rank_x_ok = u.det_x_ratio >= h_min;
    u.rank_x_minus1_ok = u.det_x_minus1_ratio >= h_min;
    if (!u.rank_x_ok) report.failing_rank_x.push_back(u.unit);
    if (!u.rank_x_minus1_ok) report.failing_rank_x_minus1.push_back(u.unit);

    if (u.rank_x_ok) {
      try {
        const Matrix psi = build_psi(ds, i);
        const Matrix psi_tilde = build_psi_tilde(ds, i, psi);
        const Matrix m = linalg::residual_maker(x);
        const Matrix m1 = linalg::residual_maker(x_minus1);
        psi_sum.noalias() += psi.transpose() * m * psi;
        psi_tilde_sum.noalias() += psi_tilde.transpose() * m1 * psi_tilde;
        const auto hi = ds.h.row(static_cast<Eigen::Index>(i));
        h_sum.noalias() += hi.transpose() * hi;
        ++retained;
      } catch (const RankDeficient&) {
        u.rank_x_ok = false;
        report.failing_rank_x.push_back(u.unit);
      }
    }
    report.units.push_back(std::move(u));
  }

  report.psi = pooled("pooled_rank_psi", psi_sum, retained, h_min);
  report.psi_tilde = pooled("pooled_rank_psi_tilde", psi_tilde_sum, retained, h_min);
  report.h = pooled("rank_h", h_sum, retained, h_min);
  return report;
}

}  // namespace interx
