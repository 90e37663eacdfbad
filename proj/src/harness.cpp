#include "interx/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "interx/error.hpp"
#include "interx/parallel.hpp"
#include "interx/pipeline.hpp"
#include "interx/rng.hpp"

namespace interx {

using nlohmann::json;

void ExperimentConfig::check() const {
  dgp.check();
  if (replications < 2) throw ConfigInvalid("replications", "must be at least 2");
  if (sample_sizes.empty()) throw ConfigInvalid("sample_sizes", "must not be empty");
  for (std::size_t s = 0; s < sample_sizes.size(); ++s) {
    if (sample_sizes[s] < 2) throw ConfigInvalid("sample_sizes", "every n must be at least 2");
    if (s > 0 && sample_sizes[s] <= sample_sizes[s - 1]) {
      throw ConfigInvalid("sample_sizes", "must be strictly increasing");
    }
  }
  if (weight_modes.empty()) throw ConfigInvalid("weight_modes", "must not be empty");
  if (oracle_draws < 2) throw ConfigInvalid("oracle_draws", "must be at least 2");
  if (!(max_failure_rate >= 0.0 && max_failure_rate < 1.0)) {
    throw ConfigInvalid("max_failure_rate", "must lie in [0, 1)");
  }
  if (!(tolerance_mcse > 0.0)) throw ConfigInvalid("tolerance_mcse", "must be positive");
}

ExperimentConfig experiment_from_json(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ConfigInvalid("<root>", "must be an object");
  static const std::vector<std::string> known{
      "name",         "dgp",       "dgp_file",       "sample_sizes", "replications",
      "estimators",   "weight_modes", "seed",        "h_min",        "oracle_draws",
      "max_failure_rate", "tolerance_mcse", "contracts"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ConfigInvalid(key, "unknown field");
    }
  }
  ExperimentConfig cfg;
  try {
    cfg.name = j.value("name", cfg.name);
    if (j.contains("dgp") == j.contains("dgp_file")) {
      throw ConfigInvalid("dgp", "exactly one of dgp and dgp_file is required");
    }
    if (j.contains("dgp")) {
      cfg.dgp = dgp_from_json(j.at("dgp"));
    } else {
      cfg.dgp = load_dgp_config(base_dir / j.at("dgp_file").get<std::string>());
    }
    cfg.sample_sizes = j.value("sample_sizes", cfg.sample_sizes);
    cfg.replications = j.value("replications", cfg.replications);
    if (j.contains("estimators")) {
      cfg.run_cite = cfg.run_ite = false;
      for (const auto& e : j.at("estimators").get<std::vector<std::string>>()) {
        if (e == "CITE") {
          cfg.run_cite = true;
        } else if (e == "ITE") {
          cfg.run_ite = true;
        } else {
          throw ConfigInvalid("estimators", "unknown estimator '" + e + "'");
        }
      }
    }
    if (j.contains("weight_modes")) {
      cfg.weight_modes.clear();
      for (const auto& m : j.at("weight_modes").get<std::vector<std::string>>()) {
        cfg.weight_modes.push_back(parse_weight_mode(m));
      }
    }
    cfg.seed = j.value("seed", cfg.seed);
    cfg.h_min = j.value("h_min", cfg.h_min);
    cfg.oracle_draws = j.value("oracle_draws", cfg.oracle_draws);
    cfg.max_failure_rate = j.value("max_failure_rate", cfg.max_failure_rate);
    cfg.tolerance_mcse = j.value("tolerance_mcse", cfg.tolerance_mcse);
    if (j.contains("contracts")) {
      const auto& c = j.at("contracts");
      for (const auto& [key, _] : c.items()) {
        if (key != "min_target_gap_mcse" && key != "ite_min_bias_mcse") {
          throw ConfigInvalid("contracts." + key, "unknown field");
        }
      }
      if (c.contains("min_target_gap_mcse")) cfg.min_target_gap_mcse = c.at("min_target_gap_mcse").get<double>();
      if (c.contains("ite_min_bias_mcse")) cfg.ite_min_bias_mcse = c.at("ite_min_bias_mcse").get<double>();
    }
  } catch (const json::exception& e) {
    throw ConfigInvalid("<experiment>", e.what());
  } catch (const InvalidArgument& e) {
    throw ConfigInvalid("weight_modes", e.what());
  }
  cfg.check();
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigInvalid(path.string(), "cannot open file");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigInvalid(path.string(), e.what());
  }
  return experiment_from_json(j, path.parent_path());
}

bool MonteCarloReport::contracts_passed() const {
  return std::all_of(contracts.begin(), contracts.end(), [](const ContractCheck& c) { return c.passed; });
}

const CellStats* MonteCarloReport::find(const std::string& estimator, std::size_t n,
                                        const std::string& parameter) const {
  for (const auto& c : cells) {
    if (c.estimator == estimator && c.n == n && c.parameter == parameter) return &c;
  }
  return nullptr;
}

namespace {

struct Target {
  double truth = 0.0;
  std::optional<double> value;
  double se = 0.0;
};

struct EstimatorSpec {
  std::string name;
  bool is_cite = false;
  WeightMode mode = WeightMode::none;
  std::vector<std::string> labels;
  std::vector<Target> targets;
};

bool kappa_is_projection(Scenario s) {
  return s == Scenario::baseline || s == Scenario::correlated_random_effects ||
         s == Scenario::correlated_x_delta;
}

bool ite_consistent(const DgpConfig& d) {
  return d.x_eps_loading == 0.0 &&
         (d.scenario == Scenario::baseline || d.scenario == Scenario::correlated_random_effects);
}

std::vector<EstimatorSpec> estimator_specs(const ExperimentConfig& cfg, const PlimTargets& plim) {
  const DgpConfig& d = cfg.dgp;
  std::vector<std::string> kappa_labels = plim.labels;
  std::vector<std::string> theta_labels;
  std::vector<double> theta_truth;
  for (std::size_t k = 0; k < d.kx; ++k) {
    for (std::size_t m = 0; m < d.kg; ++m) {
      theta_labels.push_back("phi[x" + std::to_string(k + 1) + "*g" + std::to_string(m + 1) + "]");
      theta_truth.push_back(d.phi(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(m)));
    }
  }
  for (std::size_t m = 0; m < d.kz; ++m) {
    theta_labels.push_back("gamma[z" + std::to_string(m + 1) + "]");
    theta_truth.push_back(d.gamma[m]);
  }
  const auto exposed = d.exposed_columns();

  std::vector<EstimatorSpec> specs;
  if (cfg.run_cite) {
    for (const WeightMode mode : cfg.weight_modes) {
      EstimatorSpec s;
      s.name = mode == WeightMode::none ? "CITE" : "CITE/" + std::string(to_string(mode));
      s.is_cite = true;
      s.mode = mode;
      for (std::size_t j = 0; j < exposed.size(); ++j) {
        Target t{d.kappa[exposed[j]], std::nullopt, 0.0};
        if (kappa_is_projection(d.scenario)) {
          t.value = t.truth;
        } else {
          t.value = plim.kappa_tilde(static_cast<Eigen::Index>(j));
          t.se = plim.kappa_tilde_se(static_cast<Eigen::Index>(j));
        }
        s.targets.push_back(t);
      }
      for (const double v : theta_truth) s.targets.push_back(Target{v, v, 0.0});
      s.labels = kappa_labels;
      s.labels.insert(s.labels.end(), theta_labels.begin(), theta_labels.end());
      specs.push_back(std::move(s));
    }
  }
  if (cfg.run_ite) {
    EstimatorSpec s;
    s.name = "ITE";
    const bool consistent = ite_consistent(d);
    for (std::size_t j = 0; j < exposed.size(); ++j) {
      Target t{d.kappa[exposed[j]], std::nullopt, 0.0};
      if (consistent) {
        t.value = t.truth;
      } else if (j == 0 && plim.ite_plim_kappa1) {
        t.value = plim.ite_plim_kappa1->value;
        t.se = plim.ite_plim_kappa1->se;
      }
      s.targets.push_back(t);
    }
    for (const double v : theta_truth) {
      Target t{v, std::nullopt, 0.0};
      if (consistent) t.value = v;
      s.targets.push_back(t);
    }
    s.labels = kappa_labels;
    s.labels.insert(s.labels.end(), theta_labels.begin(), theta_labels.end());
    specs.push_back(std::move(s));
  }
  return specs;
}

struct ReplicationResult {
  bool ok = false;
  std::string error;
  std::vector<Vector> estimates;  // one per estimator spec
};

ReplicationResult run_replication(const ExperimentConfig& cfg, const std::vector<EstimatorSpec>& specs,
                                  std::size_t n, std::size_t r) {
  ReplicationResult out;
  DgpConfig d = cfg.dgp;
  d.n = n;
  d.seed = derive_seed({cfg.seed, hash_name(to_string(d.scenario)), n, r});
  try {
    const SimulatedTruth truth = simulate(d);
    const PreparedPanel panel = prepare(truth.data, cfg.h_min);
    for (const auto& spec : specs) {
      if (spec.is_cite) {
        const CiteResult fit = fit_cite(panel, spec.mode);
        Vector v(fit.kappa.size() + fit.theta.size());
        v << fit.kappa, fit.theta;
        out.estimates.push_back(std::move(v));
      } else {
        out.estimates.push_back(fit_ite(panel).theta_tilde);
      }
    }
    out.ok = true;
  } catch (const Error& e) {
    out.error = "replication " + std::to_string(r) + ": " + e.what();
    out.estimates.clear();
  }
  return out;
}

std::string fmt(double v, int precision = 6) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(precision);
  os << v;
  return os.str();
}

}  // namespace

MonteCarloReport run_experiment(const ExperimentConfig& cfg, std::size_t workers) {
  cfg.check();
  MonteCarloReport report;
  report.name = cfg.name;
  report.scenario = cfg.dgp.scenario;
  report.replications = cfg.replications;
  report.sample_sizes = cfg.sample_sizes;
  report.plim = plim_targets(cfg.dgp, cfg.oracle_draws, derive_seed({cfg.seed, hash_name("plim")}),
                             workers);
  if (report.plim.ite_plim_kappa1 && report.plim.kappa_tilde.size() > 0) {
    report.plim_sign_conflict =
        std::signbit(report.plim.kappa_tilde(0)) != std::signbit(report.plim.ite_plim_kappa1->value);
  }
  const auto specs = estimator_specs(cfg, report.plim);
  for (const auto& s : specs) report.estimators.push_back(s.name);

  const std::size_t reps = cfg.replications;
  for (const std::size_t n : cfg.sample_sizes) {
    std::vector<ReplicationResult> results(reps);
    parallel_for(reps, workers, [&](std::size_t r) { results[r] = run_replication(cfg, specs, n, r); });

    SizeSummary size;
    size.n = n;
    for (const auto& res : results) {
      if (!res.ok) {
        ++size.failures;
        if (size.failure_messages.size() < 5) size.failure_messages.push_back(res.error);
      }
    }
    if (static_cast<double>(size.failures) > cfg.max_failure_rate * static_cast<double>(reps)) {
      std::string msg = "experiment '" + cfg.name + "' at n=" + std::to_string(n) + ": " +
                        std::to_string(size.failures) + " of " + std::to_string(reps) +
                        " replications failed";
      for (const auto& m : size.failure_messages) msg += "\n  " + m;
      throw ExperimentAborted(msg);
    }
    const std::size_t used = reps - size.failures;

    for (std::size_t e = 0; e < specs.size(); ++e) {
      const auto& spec = specs[e];
      for (std::size_t p = 0; p < spec.labels.size(); ++p) {
        double sum = 0.0;
        for (const auto& res : results) {
          if (res.ok) sum += res.estimates[e](static_cast<Eigen::Index>(p));
        }
        const double mean = sum / static_cast<double>(used);
        double ss = 0.0;
        for (const auto& res : results) {
          if (!res.ok) continue;
          const double dev = res.estimates[e](static_cast<Eigen::Index>(p)) - mean;
          ss += dev * dev;
        }
        CellStats c;
        c.estimator = spec.name;
        c.n = n;
        c.parameter = spec.labels[p];
        c.truth = spec.targets[p].truth;
        c.target = spec.targets[p].value;
        c.target_se = spec.targets[p].se;
        c.mean = mean;
        c.bias = mean - c.truth;
        if (c.target) c.bias_target = mean - *c.target;
        c.sd = used > 1 ? std::sqrt(ss / static_cast<double>(used - 1)) : 0.0;
        c.rmse = std::sqrt(c.bias * c.bias + c.sd * c.sd);
        c.mc_se = c.sd / std::sqrt(static_cast<double>(used));
        c.replications = used;
        report.cells.push_back(std::move(c));
      }
    }

    // Sign agreement of kappa_1 between the first CITE variant and ITE.
    const auto cite_it = std::find_if(specs.begin(), specs.end(), [](const auto& s) { return s.is_cite; });
    const auto ite_it = std::find_if(specs.begin(), specs.end(), [](const auto& s) { return !s.is_cite; });
    if (cite_it != specs.end() && ite_it != specs.end() && !report.plim.labels.empty() && used > 0) {
      const auto ci = static_cast<std::size_t>(cite_it - specs.begin());
      const auto ii = static_cast<std::size_t>(ite_it - specs.begin());
      std::size_t agree = 0;
      for (const auto& res : results) {
        if (res.ok && std::signbit(res.estimates[ci](0)) == std::signbit(res.estimates[ii](0))) ++agree;
      }
      size.sign_agreement_rate = static_cast<double>(agree) / static_cast<double>(used);
    }
    report.sizes.push_back(std::move(size));
  }

  // Contracts at the largest sample size.
  const std::size_t n_max = cfg.sample_sizes.back();
  const std::string scen(to_string(cfg.dgp.scenario));
  for (const auto& c : report.cells) {
    if (c.n != n_max || !c.bias_target) continue;
    const double se = std::sqrt(c.mc_se * c.mc_se + c.target_se * c.target_se);
    const double ratio = se > 0.0 ? std::abs(*c.bias_target) / se : (*c.bias_target == 0.0 ? 0.0 : INFINITY);
    ContractCheck check;
    check.name = scen + "/" + c.estimator + "/" + c.parameter + " converges to target";
    check.passed = ratio < cfg.tolerance_mcse;
    check.detail = "|mean - target| / MC-SE = " + fmt(ratio, 3) + " at n=" + std::to_string(n_max) +
                   " (limit " + fmt(cfg.tolerance_mcse, 1) + ")";
    report.contracts.push_back(std::move(check));
  }
  const std::string kappa1 = report.plim.labels.empty() ? "" : report.plim.labels.front();
  const CellStats* ite_k1 = kappa1.empty() ? nullptr : report.find("ITE", n_max, kappa1);
  if (cfg.min_target_gap_mcse) {
    ContractCheck check;
    check.name = scen + "/ITE and CITE targets differ";
    if (ite_k1 && report.plim.ite_plim_kappa1 && report.plim.kappa_tilde.size() > 0) {
      const double gap = std::abs(report.plim.ite_plim_kappa1->value - report.plim.kappa_tilde(0));
      const double ratio = gap / ite_k1->mc_se;
      check.passed = ratio > *cfg.min_target_gap_mcse;
      check.detail = "|ITE limit - kappa_tilde_1| / MC-SE = " + fmt(ratio, 2) + " (need > " +
                     fmt(*cfg.min_target_gap_mcse, 1) + ")";
    } else {
      check.detail = "no ITE limit available for this design";
    }
    report.contracts.push_back(std::move(check));
  }
  if (cfg.ite_min_bias_mcse) {
    ContractCheck check;
    check.name = scen + "/ITE kappa_1 biased";
    if (ite_k1) {
      const double ratio = std::abs(ite_k1->bias) / ite_k1->mc_se;
      check.passed = ratio > *cfg.ite_min_bias_mcse;
      check.detail = "|mean - kappa_1| / MC-SE = " + fmt(ratio, 2) + " (need > " +
                     fmt(*cfg.ite_min_bias_mcse, 1) + ")";
    } else {
      check.detail = "ITE not run or no H column";
    }
    report.contracts.push_back(std::move(check));
  }
  if (report.plim_sign_conflict) {
    ContractCheck check;
    check.name = scen + "/sign disagreement detected";
    const auto& rate = report.sizes.back().sign_agreement_rate;
    check.passed = rate && *rate < 0.5;
    check.detail = rate ? "sign agreement rate " + fmt(*rate, 3) + " at n=" + std::to_string(n_max)
                        : "sign agreement not computed";
    report.contracts.push_back(std::move(check));
  }
  return report;
}

}  // namespace interx
