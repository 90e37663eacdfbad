#include "interx/estimators.hpp"

#include <cmath>

#include "interx/error.hpp"

namespace interx {

WeightMode parse_weight_mode(std::string_view text) {
  if (text == "none") return WeightMode::none;
  if (text == "inv_se") return WeightMode::inv_se;
  if (text == "inv_var") return WeightMode::inv_var;
  throw InvalidArgument("unknown weight mode '" + std::string(text) + "'");
}

std::string_view to_string(WeightMode mode) {
  switch (mode) {
    case WeightMode::none: return "none";
    case WeightMode::inv_se: return "inv_se";
    case WeightMode::inv_var: return "inv_var";
  }
  return "none";
}

namespace {

TransformedSystem stack(const PanelDataset& ds, const std::vector<Matrix>& makers,
                        const std::vector<Matrix>& blocks) {
  const std::size_t n = ds.dims.n;
  const auto t = static_cast<Eigen::Index>(ds.dims.periods);
  const Eigen::Index cols = n == 0 ? 0 : blocks.front().cols();
  TransformedSystem sys;
  sys.design.resize(static_cast<Eigen::Index>(n) * t, cols);
  sys.response.resize(static_cast<Eigen::Index>(n) * t);
  sys.cluster.reserve(n * ds.dims.periods);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r0 = static_cast<Eigen::Index>(i) * t;
    sys.design.middleRows(r0, t).noalias() = makers[i] * blocks[i];
    sys.response.segment(r0, t).noalias() = makers[i] * ds.y_unit(i);
    sys.cluster.insert(sys.cluster.end(), ds.dims.periods, i);
  }
  return sys;
}

}  // namespace

TransformedSystem cite_system(const PanelDataset& ds, const DerivedRegressors& dr) {
  return stack(ds, dr.m, dr.psi);
}

TransformedSystem ite_system(const PanelDataset& ds, const DerivedRegressors& dr) {
  return stack(ds, dr.m_minus1, dr.psi_tilde);
}

Vector cite_theta(const PanelDataset& ds, const DerivedRegressors& dr) {
  const TransformedSystem sys = cite_system(ds, dr);
  try {
    return linalg::solve_ols(sys.design, sys.response).coefficients;
  } catch (const RankDeficient& e) {
    throw RankDeficient(e.condition(), std::nullopt, "sum of Psi_i'M_i Psi_i is singular");
  }
}

Matrix cite_delta(const PanelDataset& ds, const DerivedRegressors& dr, const Vector& theta) {
  const auto& d = ds.dims;
  if (static_cast<std::size_t>(theta.size()) != d.psi_cols()) {
    throw LengthMismatch("cite_delta: theta has wrong length");
  }
  Matrix delta(static_cast<Eigen::Index>(d.n), static_cast<Eigen::Index>(d.kx));
  for (std::size_t i = 0; i < d.n; ++i) {
    const Vector partial = ds.y_unit(i) - dr.psi[i] * theta;
    try {
      delta.row(static_cast<Eigen::Index>(i)) =
          linalg::solve_ols(ds.x[i], partial).coefficients.transpose();
    } catch (const RankDeficient& e) {
      throw RankDeficient(e.condition(), ds.unit_labels[i], "X_i is rank deficient");
    }
  }
  return delta;
}

Vector cite_kappa(const Vector& delta_column, const Matrix& h,
                  const std::optional<Vector>& first_stage_se, WeightMode mode) {
  if (delta_column.size() != h.rows()) {
    throw LengthMismatch("cite_kappa: delta and H have different unit counts");
  }
  if (h.cols() == 0) return Vector(0);
  if (mode == WeightMode::none) {
    try {
      return linalg::solve_ols(h, delta_column).coefficients;
    } catch (const RankDeficient& e) {
      throw RankDeficient(e.condition(), std::nullopt, "sum of H_i'H_i is singular");
    }
  }
  if (!first_stage_se) {
    throw MissingWeights("weight mode " + std::string(to_string(mode)) +
                         " requires first-stage standard errors");
  }
  const Vector& se = *first_stage_se;
  if (se.size() != h.rows()) throw LengthMismatch("cite_kappa: weights have wrong length");
  Vector root_w(se.size());
  for (Eigen::Index i = 0; i < se.size(); ++i) {
    if (!(se(i) > 0.0) || !std::isfinite(se(i))) {
      throw InvalidArgument("first-stage standard errors must be positive and finite");
    }
    // sqrt(w_i) with w_i = 1/se_i or 1/se_i^2.
    root_w(i) = mode == WeightMode::inv_se ? 1.0 / std::sqrt(se(i)) : 1.0 / se(i);
  }
  try {
    return linalg::solve_ols(root_w.asDiagonal() * h, root_w.cwiseProduct(delta_column))
        .coefficients;
  } catch (const RankDeficient& e) {
    throw RankDeficient(e.condition(), std::nullopt, "weighted H'H is singular");
  }
}

CiteResult cite(const PanelDataset& ds, const DerivedRegressors& dr,
                const std::optional<Vector>& first_stage_se, WeightMode mode,
                std::size_t kappa_column) {
  if (kappa_column >= ds.dims.kx) throw InvalidArgument("kappa column out of range");
  CiteResult out;
  out.theta = cite_theta(ds, dr);
  out.theta_labels = dr.psi_labels;
  out.delta = cite_delta(ds, dr, out.theta);
  out.kappa_column = kappa_column;
  out.weight_mode = mode;
  out.kappa = cite_kappa(out.delta.col(static_cast<Eigen::Index>(kappa_column)), ds.h,
                         first_stage_se, mode);
  for (const auto& h : ds.names.h) out.kappa_labels.push_back("kappa[" + h + "]");
  return out;
}

IteResult ite(const PanelDataset& ds, const DerivedRegressors& dr) {
  const TransformedSystem sys = ite_system(ds, dr);
  IteResult out;
  try {
    out.theta_tilde = linalg::solve_ols(sys.design, sys.response).coefficients;
  } catch (const RankDeficient& e) {
    throw RankDeficient(e.condition(), std::nullopt,
                        "sum of PsiTilde_i'M_{i,-1} PsiTilde_i is singular");
  }
  out.labels = dr.psi_tilde_labels;
  out.kh = ds.dims.kh;
  out.kphi = ds.dims.kx * ds.dims.kg;
  return out;
}

PanelDataset within_transform(const PanelDataset& ds, std::size_t constant_column) {
  ds.check();
  const auto& d = ds.dims;
  if (d.kx < 2 || constant_column >= d.kx) {
    throw NoConstantColumn("within transform needs K_x >= 2 and a valid constant column index");
  }
  const auto c = static_cast<Eigen::Index>(constant_column);
  for (std::size_t i = 0; i < d.n; ++i) {
    const auto col = ds.x[i].col(c);
    if (col(0) == 0.0 || (col.array() != col(0)).any()) {
      throw NoConstantColumn("column " + ds.names.x[constant_column] +
                             " is not a nonzero constant in unit " + ds.unit_labels[i]);
    }
  }
  PanelDataset out = ds;
  out.dims.kx -= 1;
  out.names.x.erase(out.names.x.begin() + static_cast<std::ptrdiff_t>(constant_column));
  const auto kx = static_cast<Eigen::Index>(d.kx);
  for (std::size_t i = 0; i < d.n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    out.y.row(ii).array() -= ds.y.row(ii).mean();
    Matrix kept(ds.x[i].rows(), kx - 1);
    kept << ds.x[i].leftCols(c), ds.x[i].rightCols(kx - c - 1);
    out.x[i] = kept.rowwise() - kept.colwise().mean();
  }
  return out;
}

MeanEffectSummary mean_effect(std::span<const double> coeffs, std::span<const double> means,
                              double constant) {
  if (coeffs.size() != means.size()) {
    throw LengthMismatch("mean_effect: " + std::to_string(coeffs.size()) + " coefficients but " +
                         std::to_string(means.size()) + " means");
  }
  MeanEffectSummary s;
  s.interaction_coefficients.assign(coeffs.begin(), coeffs.end());
  s.interaction_means.assign(means.begin(), means.end());
  s.constant = constant;
  s.mean_effect = constant;
  for (std::size_t j = 0; j < coeffs.size(); ++j) s.mean_effect += coeffs[j] * means[j];
  return s;
}

}  // namespace interx
