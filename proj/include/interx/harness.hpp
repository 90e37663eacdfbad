#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "interx/dgp.hpp"
#include "interx/estimators.hpp"

namespace interx {

struct ExperimentConfig {
  std::string name = "experiment";
  DgpConfig dgp;
  std::vector<std::size_t> sample_sizes;
  std::size_t replications = 100;
  bool run_cite = true;
  bool run_ite = true;
  std::vector<WeightMode> weight_modes{WeightMode::none};
  std::uint64_t seed = 1;
  double h_min = 1e-8;
  std::size_t oracle_draws = 1'000'000;
  double max_failure_rate = 0.01;
  double tolerance_mcse = 3.0;
  // Optional contracts evaluated at the largest sample size.
  std::optional<double> min_target_gap_mcse;  // |kappa_tilde_1 - ITE limit| in ITE MC-SEs
  std::optional<double> ite_min_bias_mcse;    // |mean ITE kappa_1 - kappa_1| in MC-SEs

  void check() const;
};

ExperimentConfig experiment_from_json(const nlohmann::json& j,
                                      const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

struct CellStats {
  std::string estimator;
  std::size_t n = 0;
  std::string parameter;
  double truth = 0.0;
  std::optional<double> target;     // probability limit the estimator should approach
  double target_se = 0.0;           // simulation error of an oracle target
  double mean = 0.0;
  double bias = 0.0;                // mean - truth
  std::optional<double> bias_target;  // mean - target
  double sd = 0.0;
  double rmse = 0.0;                // sqrt(bias^2 + sd^2)
  double mc_se = 0.0;               // sd / sqrt(R)
  std::size_t replications = 0;
};

struct SizeSummary {
  std::size_t n = 0;
  std::size_t failures = 0;
  std::vector<std::string> failure_messages;
  /// Share of replications where CITE and ITE kappa_1 have the same sign.
  std::optional<double> sign_agreement_rate;
};

struct ContractCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct MonteCarloReport {
  std::string name;
  Scenario scenario = Scenario::baseline;
  std::size_t replications = 0;
  std::vector<std::size_t> sample_sizes;
  std::vector<std::string> estimators;
  PlimTargets plim;
  bool plim_sign_conflict = false;
  std::vector<CellStats> cells;
  std::vector<SizeSummary> sizes;
  std::vector<ContractCheck> contracts;

  bool contracts_passed() const;
  const CellStats* find(const std::string& estimator, std::size_t n,
                        const std::string& parameter) const;
};

/// Draws `replications` independent panels per sample size and aggregates the estimates.
/// Replication r at size n is seeded by (seed, scenario, n, r). Results do not depend on
/// `workers`. Throws ExperimentAborted when more than max_failure_rate of replications fail.
MonteCarloReport run_experiment(const ExperimentConfig& cfg, std::size_t workers = 1);

struct ConvergenceTable {
  std::string text;
  nlohmann::json document;
};

ConvergenceTable convergence_table(const MonteCarloReport& report);

nlohmann::json to_json(const MonteCarloReport& report);

}  // namespace interx
