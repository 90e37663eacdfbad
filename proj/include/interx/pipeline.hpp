#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "interx/estimators.hpp"
#include "interx/inference.hpp"
#include "interx/panel.hpp"

namespace interx {

/// A dataset reduced to the units that pass the unit-level rank check, with its regressors.
struct PreparedPanel {
  PanelDataset data;
  DerivedRegressors regressors;
  ValidationReport validation;
  std::vector<std::string> dropped;
};

/// Validates, drops units whose X_i is rank deficient, and builds the regressor blocks.
PreparedPanel prepare(const PanelDataset& ds, double h_min = kDefaultHMin);

/// CITE point estimates on a prepared panel. Weighted modes compute first-stage SEs first.
/// Throws RankDeficient when the pooled Psi or H checks failed.
CiteResult fit_cite(const PreparedPanel& panel, WeightMode mode = WeightMode::none);

/// ITE point estimates. Throws RankDeficient when the pooled PsiTilde check failed.
IteResult fit_ite(const PreparedPanel& panel);

struct EstimateOptions {
  bool run_cite = true;
  bool run_ite = true;
  WeightMode weight_mode = WeightMode::none;
  double h_min = kDefaultHMin;
  std::size_t bootstrap_replications = 0;  // 0 disables the bootstrap
  std::uint64_t seed = 1;
  std::size_t workers = 1;
};

struct EstimatorReport {
  std::string estimator;
  std::vector<std::string> labels;
  Vector estimate;
  Vector se;
  std::vector<std::string> se_method;
};

struct EstimateResult {
  Dims dims;
  WeightMode weight_mode = WeightMode::none;
  std::vector<EstimatorReport> estimators;
  std::vector<std::string> units_dropped;
  ValidationReport validation;
  std::optional<CiteResult> cite;
  std::optional<IteResult> ite;
  /// Per H column, true when CITE and ITE kappa estimates have opposite signs.
  std::vector<bool> sign_disagreement;

  bool any_sign_disagreement() const;
};

/// Full estimation: validation, unit dropping, the selected estimators and their SEs.
/// CITE theta and ITE use unit-clustered SEs; CITE kappa uses HC1 on the second stage, or the
/// bootstrap when requested.
EstimateResult estimate(const PanelDataset& ds, const EstimateOptions& options);

}  // namespace interx
