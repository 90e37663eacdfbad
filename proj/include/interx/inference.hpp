#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "interx/estimators.hpp"
#include "interx/linalg.hpp"
#include "interx/panel.hpp"

namespace interx {

struct SeResult {
  std::vector<std::string> labels;
  Vector estimate;
  Vector se;
  Matrix variance;
  std::string method;  // cluster_robust | hc_robust | bootstrap
  std::size_t clusters = 0;
};

/// Per-unit standard error of the kappa-column slope: sqrt(s_i^2 [(X_i'X_i)^{-1}]_{cc}) with
/// s_i^2 = RSS_i / (T - K_x). Throws ZeroDegreesOfFreedom when T = K_x.
Vector first_stage_se(const PanelDataset& ds, const DerivedRegressors& dr, const CiteResult& cite);

/// Finite-cluster correction G/(G-1) * (N-1)/(N-k).
double cluster_correction(std::size_t clusters, std::size_t rows, std::size_t params);

/// Sandwich variance (X'X)^{-1} (sum_g s_g s_g') (X'X)^{-1} scaled by cluster_correction, with
/// s_g the sum of x_r e_r over the rows of cluster g. Throws TooFewClusters below two clusters.
SeResult cluster_robust_se(const Matrix& design, const Vector& residuals,
                           std::span<const std::size_t> cluster_ids);

/// Heteroskedasticity-robust variance with the N/(N-k) small-sample factor (HC1), i.e. the
/// cluster-robust variance with every row its own cluster.
SeResult hc_robust_se(const Matrix& design, const Vector& residuals);

struct BootstrapOptions {
  std::size_t replications = 200;
  std::uint64_t seed = 1;
  WeightMode weight_mode = WeightMode::none;
  double h_min = kDefaultHMin;
  std::size_t workers = 1;
};

/// Unit-level nonparametric bootstrap of the whole CITE pipeline. Reports the empirical
/// covariance of (kappa, theta) across draws. Each replication is seeded by (seed, replication,
/// attempt), so results do not depend on the worker count. Failed draws are redrawn; more than
/// ten times `replications` attempts raises DegenerateResample.
SeResult bootstrap_cite(const PanelDataset& ds, const BootstrapOptions& options);

}  // namespace interx
