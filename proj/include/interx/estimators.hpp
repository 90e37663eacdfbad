#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "interx/linalg.hpp"
#include "interx/panel.hpp"

namespace interx {

/// Second-stage weighting of the CITE kappa regression.
enum class WeightMode {
  none,     // unweighted OLS
  inv_se,   // w_i = 1 / se_i
  inv_var,  // w_i = 1 / se_i^2
};

WeightMode parse_weight_mode(std::string_view text);
std::string_view to_string(WeightMode mode);

struct CiteResult {
  /// (phi_1, ..., phi_Kx, gamma), ordered as the columns of Psi.
  Vector theta;
  std::vector<std::string> theta_labels;
  /// Unit slopes, one row per retained unit.
  Matrix delta;
  /// Second-stage projection of delta[:, kappa_column] on H. Empty when K_h = 0.
  Vector kappa;
  std::vector<std::string> kappa_labels;
  std::size_t kappa_column = 0;
  WeightMode weight_mode = WeightMode::none;
};

struct IteResult {
  /// (kappa, phi, gamma), ordered as the columns of PsiTilde.
  Vector theta_tilde;
  std::vector<std::string> labels;
  std::size_t kh = 0;
  std::size_t kphi = 0;

  Vector kappa() const { return theta_tilde.head(static_cast<Eigen::Index>(kh)); }
  Vector phi() const { return theta_tilde.segment(static_cast<Eigen::Index>(kh), static_cast<Eigen::Index>(kphi)); }
  Vector gamma() const {
    return theta_tilde.tail(theta_tilde.size() - static_cast<Eigen::Index>(kh + kphi));
  }
  /// (phi, gamma), comparable with CiteResult::theta.
  Vector theta() const { return theta_tilde.tail(theta_tilde.size() - static_cast<Eigen::Index>(kh)); }
};

/// Stacked, unit-by-unit transformed regression: rows of M_i Psi_i against M_i Y_i.
struct TransformedSystem {
  Matrix design;
  Vector response;
  std::vector<std::size_t> cluster;  // unit index of each row
};

TransformedSystem cite_system(const PanelDataset& ds, const DerivedRegressors& dr);
TransformedSystem ite_system(const PanelDataset& ds, const DerivedRegressors& dr);

/// (sum Psi_i' M_i Psi_i)^{-1} sum Psi_i' M_i Y_i.
Vector cite_theta(const PanelDataset& ds, const DerivedRegressors& dr);

/// delta_i = (X_i'X_i)^{-1} X_i'(Y_i - Psi_i theta), one row per unit.
Matrix cite_delta(const PanelDataset& ds, const DerivedRegressors& dr, const Vector& theta);

/// Projection of one column of unit slopes on H, optionally weighted by first-stage standard
/// errors. Throws MissingWeights when a weighted mode has no standard errors.
Vector cite_kappa(const Vector& delta_column, const Matrix& h,
                  const std::optional<Vector>& first_stage_se, WeightMode mode);

/// Runs the three CITE steps on an already validated dataset.
CiteResult cite(const PanelDataset& ds, const DerivedRegressors& dr,
                const std::optional<Vector>& first_stage_se = std::nullopt,
                WeightMode mode = WeightMode::none, std::size_t kappa_column = 0);

/// (sum PsiTilde_i' M_{i,-1} PsiTilde_i)^{-1} sum PsiTilde_i' M_{i,-1} Y_i.
IteResult ite(const PanelDataset& ds, const DerivedRegressors& dr);

/// Subtracts unit time means from Y and from every non-constant X column, and drops the constant
/// column from X. G, Z and H pass through unchanged. Throws NoConstantColumn when
/// `constant_column` is not constant within every unit.
PanelDataset within_transform(const PanelDataset& ds, std::size_t constant_column = 1);

struct MeanEffectSummary {
  std::vector<double> interaction_coefficients;
  std::vector<double> interaction_means;
  double constant = 0.0;
  double mean_effect = 0.0;
};

/// constant + sum_j coeffs_j * means_j.
MeanEffectSummary mean_effect(std::span<const double> coeffs, std::span<const double> means,
                              double constant);

}  // namespace interx
