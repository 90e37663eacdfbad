#include "interx/error.hpp"
#include "interx/panel.hpp"

namespace interx {

Matrix build_psi(const PanelDataset& ds, std::size_t unit) {
  const auto& d = ds.dims;
  const auto t = static_cast<Eigen::Index>(d.periods);
  const auto kx = static_cast<Eigen::Index>(d.kx);
  const auto kg = static_cast<Eigen::Index>(d.kg);
  Matrix psi(t, static_cast<Eigen::Index>(d.psi_cols()));
  const Matrix& x = ds.x[unit];
  const Matrix& g = ds.g[unit];
  // Row-wise Kronecker product X_it (x) G_it: column k*kg + j holds X_itk * G_itj.
  for (Eigen::Index k = 0; k < kx; ++k) {
    psi.middleCols(k * kg, kg) = g.array().colwise() * x.col(k).array();
  }
  psi.rightCols(static_cast<Eigen::Index>(d.kz)) = ds.z[unit];
  return psi;
}

Matrix build_psi_tilde(const PanelDataset& ds, std::size_t unit, const Matrix& psi) {
  const auto t = static_cast<Eigen::Index>(ds.dims.periods);
  const auto kh = static_cast<Eigen::Index>(ds.dims.kh);
  Matrix out(t, kh + psi.cols());
  out.leftCols(kh) = ds.x[unit].col(0) * ds.h.row(static_cast<Eigen::Index>(unit));
  out.rightCols(psi.cols()) = psi;
  return out;
}

namespace {

std::vector<std::string> psi_labels(const PanelDataset& ds) {
  std::vector<std::string> labels;
  for (const auto& x : ds.names.x) {
    for (const auto& g : ds.names.g) labels.push_back("phi[" + x + "*" + g + "]");
  }
  for (const auto& z : ds.names.z) labels.push_back("gamma[" + z + "]");
  return labels;
}

}  // namespace

DerivedRegressors build_regressors(const PanelDataset& ds) {
  ds.check();
  const std::size_t n = ds.dims.n;
  DerivedRegressors dr;
  dr.psi.reserve(n);
  dr.psi_tilde.reserve(n);
  dr.m.reserve(n);
  dr.m_minus1.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Matrix psi = build_psi(ds, i);
    dr.psi_tilde.push_back(build_psi_tilde(ds, i, psi));
    dr.psi.push_back(std::move(psi));
    const Matrix& x = ds.x[i];
    try {
      dr.m.push_back(linalg::residual_maker(x));
      dr.m_minus1.push_back(linalg::residual_maker(x.rightCols(x.cols() - 1)));
    } catch (const RankDeficient& e) {
      throw RankDeficient(e.condition(), ds.unit_labels[i], "X_i is rank deficient");
    }
  }
  dr.psi_labels = psi_labels(ds);
  for (const auto& h : ds.names.h) dr.psi_tilde_labels.push_back("kappa[" + h + "]");
  dr.psi_tilde_labels.insert(dr.psi_tilde_labels.end(), dr.psi_labels.begin(),
                             dr.psi_labels.end());
  return dr;
}

}  // namespace interx
