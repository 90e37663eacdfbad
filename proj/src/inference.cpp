#include "interx/inference.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "interx/error.hpp"
#include "interx/parallel.hpp"
#include "interx/pipeline.hpp"
#include "interx/rng.hpp"

namespace interx {

Vector first_stage_se(const PanelDataset& ds, const DerivedRegressors& dr, const CiteResult& cite) {
  const auto& d = ds.dims;
  const auto c = static_cast<Eigen::Index>(cite.kappa_column);
  Vector se(static_cast<Eigen::Index>(d.n));
  for (std::size_t i = 0; i < d.n; ++i) {
    if (d.periods <= d.kx) throw ZeroDegreesOfFreedom(ds.unit_labels[i]);
    const Matrix& x = ds.x[i];
    const Vector resid = ds.y_unit(i) - dr.psi[i] * cite.theta -
                         x * cite.delta.row(static_cast<Eigen::Index>(i)).transpose();
    const double s2 = resid.squaredNorm() / static_cast<double>(d.periods - d.kx);
    const Vector e = Vector::Unit(x.cols(), c);
    const double xtx_inv_cc = e.dot((x.transpose() * x).ldlt().solve(e));
    se(static_cast<Eigen::Index>(i)) = std::sqrt(s2 * xtx_inv_cc);
  }
  return se;
}

double cluster_correction(std::size_t clusters, std::size_t rows, std::size_t params) {
  if (clusters < 2) throw TooFewClusters("need at least 2 clusters, got " + std::to_string(clusters));
  if (rows <= params) throw InvalidArgument("cluster correction needs more rows than parameters");
  const double g = static_cast<double>(clusters);
  return g / (g - 1.0) * static_cast<double>(rows - 1) / static_cast<double>(rows - params);
}

SeResult cluster_robust_se(const Matrix& design, const Vector& residuals,
                           std::span<const std::size_t> cluster_ids) {
  const auto rows = design.rows();
  const auto k = design.cols();
  if (residuals.size() != rows || static_cast<Eigen::Index>(cluster_ids.size()) != rows) {
    throw LengthMismatch("cluster_robust_se: design, residuals and clusters disagree in length");
  }
  std::map<std::size_t, Vector> scores;
  for (Eigen::Index r = 0; r < rows; ++r) {
    auto [it, inserted] = scores.try_emplace(cluster_ids[static_cast<std::size_t>(r)]);
    if (inserted) it->second = Vector::Zero(k);
    it->second.noalias() += design.row(r).transpose() * residuals(r);
  }
  SeResult out;
  out.method = "cluster_robust";
  out.clusters = scores.size();
  const double factor = cluster_correction(out.clusters, static_cast<std::size_t>(rows),
                                           static_cast<std::size_t>(k));
  Matrix meat = Matrix::Zero(k, k);
  for (const auto& [_, s] : scores) meat.noalias() += s * s.transpose();
  const Matrix bread = (design.transpose() * design).ldlt().solve(Matrix::Identity(k, k));
  Matrix v = factor * bread * meat * bread;
  out.variance = 0.5 * (v + v.transpose());
  out.se = out.variance.diagonal().cwiseMax(0.0).cwiseSqrt();
  return out;
}

SeResult hc_robust_se(const Matrix& design, const Vector& residuals) {
  std::vector<std::size_t> ids(static_cast<std::size_t>(design.rows()));
  for (std::size_t r = 0; r < ids.size(); ++r) ids[r] = r;
  SeResult out = cluster_robust_se(design, residuals, ids);
  out.method = "hc_robust";
  return out;
}

SeResult bootstrap_cite(const PanelDataset& ds, const BootstrapOptions& options) {
  if (options.replications < 50) {
    throw InvalidArgument("bootstrap needs at least 50 replications");
  }
  const CiteResult point = fit_cite(prepare(ds, options.h_min), options.weight_mode);
  const auto kk = point.kappa.size();
  const auto kt = point.theta.size();
  const std::size_t reps = options.replications;
  const std::size_t cap = 10 * reps;
  const std::size_t n = ds.dims.n;

  Matrix draws(static_cast<Eigen::Index>(reps), kk + kt);
  std::vector<std::size_t> attempts(reps, 0);
  parallel_for(reps, options.workers, [&](std::size_t r) {
    std::vector<std::size_t> units(n);
    for (std::size_t a = 0; a < cap; ++a) {
      ++attempts[r];
      Rng rng(derive_seed({options.seed, r, a}));
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      for (auto& u : units) u = pick(rng);
      try {
        const CiteResult fit = fit_cite(prepare(ds.subset(units), options.h_min),
                                        options.weight_mode);
        draws.row(static_cast<Eigen::Index>(r)) << fit.kappa.transpose(), fit.theta.transpose();
        return;
      } catch (const Error&) {
        // redraw
      }
    }
  });
  std::size_t total = 0;
  for (const std::size_t a : attempts) total += a;
  if (total > cap) {
    throw DegenerateResample("bootstrap needed " + std::to_string(total) +
                             " draws, more than the cap of " + std::to_string(cap));
  }

  SeResult out;
  out.method = "bootstrap";
  out.clusters = n;
  out.labels = point.kappa_labels;
  out.labels.insert(out.labels.end(), point.theta_labels.begin(), point.theta_labels.end());
  out.estimate.resize(kk + kt);
  out.estimate << point.kappa, point.theta;
  const Matrix centered = draws.rowwise() - draws.colwise().mean();
  out.variance = centered.transpose() * centered / static_cast<double>(reps - 1);
  out.se = out.variance.diagonal().cwiseMax(0.0).cwiseSqrt();
  return out;
}

}  // namespace interx
