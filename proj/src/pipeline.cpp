#include "interx/pipeline.hpp"

#include <cmath>

#include "interx/error.hpp"

namespace interx {

namespace {

void require(const PooledCheck& check) {
  if (!check.ok) {
    throw RankDeficient(check.margin > 0.0 ? 1.0 / check.margin : INFINITY, std::nullopt,
                        check.name + " failed (normalized margin " + std::to_string(check.margin) +
                            ")");
  }
}

}  // namespace

PreparedPanel prepare(const PanelDataset& ds, double h_min) {
  PreparedPanel out;
  out.validation = validate(ds, h_min);
  const auto keep = out.validation.retained_units();
  if (keep.size() < 2) throw RankDeficient(INFINITY, std::nullopt, "fewer than 2 usable units");
  for (const auto& u : out.validation.units) {
    if (!u.rank_x_ok) out.dropped.push_back(u.unit);
  }
  out.data = keep.size() == ds.dims.n ? ds : ds.subset(keep);
  out.regressors = build_regressors(out.data);
  return out;
}

CiteResult fit_cite(const PreparedPanel& panel, WeightMode mode) {
  require(panel.validation.psi);
  if (panel.data.dims.kh > 0) require(panel.validation.h);
  if (mode == WeightMode::none) return cite(panel.data, panel.regressors);
  CiteResult unweighted = cite(panel.data, panel.regressors);
  const Vector se = first_stage_se(panel.data, panel.regressors, unweighted);
  unweighted.kappa = cite_kappa(unweighted.delta.col(0), panel.data.h, se, mode);
  unweighted.weight_mode = mode;
  return unweighted;
}

IteResult fit_ite(const PreparedPanel& panel) {
  require(panel.validation.psi_tilde);
  return ite(panel.data, panel.regressors);
}

bool EstimateResult::any_sign_disagreement() const {
  for (const bool b : sign_disagreement) {
    if (b) return true;
  }
  return false;
}

EstimateResult estimate(const PanelDataset& ds, const EstimateOptions& options) {
  const PreparedPanel panel = prepare(ds, options.h_min);
  const PanelDataset& data = panel.data;
  const DerivedRegressors& dr = panel.regressors;

  EstimateResult out;
  out.dims = data.dims;
  out.weight_mode = options.weight_mode;
  out.units_dropped = panel.dropped;
  out.validation = panel.validation;

  if (options.run_cite) {
    const CiteResult fit = fit_cite(panel, options.weight_mode);
    EstimatorReport rep;
    rep.estimator = "CITE";
    rep.labels = fit.kappa_labels;
    rep.labels.insert(rep.labels.end(), fit.theta_labels.begin(), fit.theta_labels.end());
    const auto kk = fit.kappa.size();
    const auto kt = fit.theta.size();
    rep.estimate.resize(kk + kt);
    rep.estimate << fit.kappa, fit.theta;
    rep.se = Vector::Constant(kk + kt, NAN);

    if (kt > 0) {
      const TransformedSystem sys = cite_system(data, dr);
      const SeResult theta_se =
          cluster_robust_se(sys.design, sys.response - sys.design * fit.theta, sys.cluster);
      rep.se.tail(kt) = theta_se.se;
    }
    if (kk > 0) {
      const Vector delta1 = fit.delta.col(0);
      Vector root_w = Vector::Ones(delta1.size());
      if (options.weight_mode != WeightMode::none) {
        const Vector se = first_stage_se(data, dr, fit);
        if (options.weight_mode == WeightMode::inv_se) {
          root_w = se.cwiseSqrt().cwiseInverse();
        } else {
          root_w = se.cwiseInverse();
        }
      }
      const Matrix wh = root_w.asDiagonal() * data.h;
      const Vector wresid = root_w.cwiseProduct(delta1 - data.h * fit.kappa);
      rep.se.head(kk) = hc_robust_se(wh, wresid).se;
    }
    rep.se_method.assign(static_cast<std::size_t>(kk), "hc_robust");
    rep.se_method.insert(rep.se_method.end(), static_cast<std::size_t>(kt), "cluster_robust");

    if (options.bootstrap_replications > 0) {
      BootstrapOptions bo;
      bo.replications = options.bootstrap_replications;
      bo.seed = options.seed;
      bo.weight_mode = options.weight_mode;
      bo.h_min = options.h_min;
      bo.workers = options.workers;
      const SeResult boot = bootstrap_cite(data, bo);
      rep.se = boot.se;
      rep.se_method.assign(rep.se_method.size(), "bootstrap");
    }
    out.estimators.push_back(std::move(rep));
    out.cite = fit;
  }

  if (options.run_ite) {
    const IteResult fit = fit_ite(panel);
    EstimatorReport rep;
    rep.estimator = "ITE";
    rep.labels = fit.labels;
    rep.estimate = fit.theta_tilde;
    const TransformedSystem sys = ite_system(data, dr);
    if (fit.theta_tilde.size() > 0) {
      rep.se = cluster_robust_se(sys.design, sys.response - sys.design * fit.theta_tilde,
                                 sys.cluster)
                   .se;
    }
    rep.se_method.assign(static_cast<std::size_t>(fit.theta_tilde.size()), "cluster_robust");
    out.estimators.push_back(std::move(rep));
    out.ite = fit;
  }

  if (out.cite && out.ite) {
    const Vector ck = out.cite->kappa;
    const Vector ik = out.ite->kappa();
    for (Eigen::Index j = 0; j < ck.size(); ++j) {
      out.sign_disagreement.push_back(std::signbit(ck(j)) != std::signbit(ik(j)));
    }
  }
  return out;
}

}  // namespace interx
