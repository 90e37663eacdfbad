#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "interx/dgp.hpp"
#include "interx/error.hpp"
#include "interx/harness.hpp"
#include "interx/pipeline.hpp"
#include "interx/serialize.hpp"

namespace interx {

namespace {

using nlohmann::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SchemaFlags {
  std::string unit = "unit", time = "time", y = "y";
  std::vector<std::string> x, g, z, h;

  void add(CLI::App* app) {
    app->add_option("--unit", unit, "Unit id column");
    app->add_option("--time", time, "Time column");
    app->add_option("--y", y, "Outcome column");
    app->add_option("--x", x, "X columns, first is the one interacted with H (default: x1, x2, ...)")
        ->delimiter(',')->default_str("auto");
    app->add_option("--g", g, "G columns (default: g1, g2, ...)")->delimiter(',')->default_str("auto");
    app->add_option("--z", z, "Z columns (default: z1, z2, ...)")->delimiter(',')->default_str("auto");
    app->add_option("--h", h, "H columns (default: h1, h2, ...)")->delimiter(',')->default_str("auto");
  }

  CsvSchema schema() const { return {unit, time, y, x, g, z, h}; }
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write '" + path + "'");
  f << text;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::vector<double> parse_list(const std::string& flag, const std::string& text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find(',', start), text.size());
    std::string item = text.substr(start, end - start);
    if (!item.empty() && item.front() == '+') item.erase(0, 1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc() || ptr != item.data() + item.size()) {
      throw UsageError(flag + ": '" + text + "' is not a comma-separated list of numbers");
    }
    out.push_back(v);
    start = end + 1;
  }
  return out;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

int run_cli(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Interaction effects in panels with correlated random coefficients", "interx"};
  app.option_defaults()->always_capture_default();
  app.set_help_flag("--help", "Print this help message and exit");
  app.require_subcommand(1);
  app.set_version_flag("--version", "interx 1.0.0");

  // estimate
  auto* est = app.add_subcommand("estimate", "Estimate interaction effects from a long-format CSV");
  SchemaFlags est_schema;
  std::string est_input, est_estimator = "both", est_weight = "none", est_output, est_format = "text";
  std::size_t est_bootstrap = 0, est_workers = 1;
  std::uint64_t est_seed = 1;
  double est_h_min = kDefaultHMin;
  bool est_intercept = false;
  est->add_option("--input", est_input, "Input CSV")->required();
  est_schema.add(est);
  est->add_option("--estimator", est_estimator, "Estimators to run")
      ->check(CLI::IsMember({"ite", "cite", "both"}));
  est->add_option("--weight-mode", est_weight, "Second-stage CITE weights")
      ->check(CLI::IsMember({"none", "inv_se", "inv_var"}));
  est->add_option("--bootstrap", est_bootstrap, "Unit bootstrap replications for CITE SEs (0 = off)");
  est->add_option("--seed", est_seed, "Bootstrap seed");
  est->add_option("--workers", est_workers, "Worker threads (0 = all cores)");
  est->add_option("--h-min", est_h_min, "Rank threshold on the Hadamard ratio of X_i'X_i");
  est->add_flag("--add-intercept-h", est_intercept, "Append a constant column to H");
  est->add_option("--output", est_output, "Write the JSON result here");
  est->add_option("--format", est_format, "Format on stdout")->check(CLI::IsMember({"text", "json"}));

  // simulate
  auto* sim = app.add_subcommand("simulate", "Draw a panel from a DGP config");
  std::string sim_config, sim_output, sim_truth;
  std::optional<std::uint64_t> sim_seed;
  std::optional<std::size_t> sim_n;
  std::size_t sim_workers = 1;
  sim->add_option("--config", sim_config, "DGP config (JSON)")->required();
  sim->add_option("--output", sim_output, "Output CSV")->required();
  sim->add_option("--truth", sim_truth, "Truth sidecar (default: <output>.truth.json)");
  sim->add_option("--seed", sim_seed, "Override the config seed");
  sim->add_option("--n", sim_n, "Override the number of units");
  sim->add_option("--workers", sim_workers, "Worker threads (0 = all cores)");

  // validate
  auto* val = app.add_subcommand("validate", "Check the rank conditions on a long-format CSV");
  SchemaFlags val_schema;
  std::string val_input, val_output, val_format = "text";
  double val_h_min = kDefaultHMin;
  bool val_intercept = false;
  val->add_option("--input", val_input, "Input CSV")->required();
  val_schema.add(val);
  val->add_option("--h-min", val_h_min, "Rank threshold on the Hadamard ratio of X_i'X_i");
  val->add_flag("--add-intercept-h", val_intercept, "Append a constant column to H");
  val->add_option("--output", val_output, "Write the JSON report here");
  val->add_option("--format", val_format, "Format on stdout")->check(CLI::IsMember({"text", "json"}));

  // mc
  auto* mc = app.add_subcommand("mc", "Run a Monte Carlo experiment");
  std::string mc_config, mc_output, mc_table;
  std::optional<std::uint64_t> mc_seed;
  std::optional<std::size_t> mc_reps;
  std::size_t mc_workers = 0;
  mc->add_option("--config", mc_config, "Experiment config (JSON)")->required();
  mc->add_option("--output", mc_output, "Write the JSON report here");
  mc->add_option("--table", mc_table, "Write the text table here");
  mc->add_option("--seed", mc_seed, "Override the experiment seed");
  mc->add_option("--replications", mc_reps, "Override the replication count");
  mc->add_option("--workers", mc_workers, "Worker threads (0 = all cores)");

  // mean-effect
  auto* me = app.add_subcommand("mean-effect", "Constant plus interaction coefficients times means");
  std::string me_coeffs, me_means, me_format = "text";
  double me_constant = 0.0;
  me->add_option("--coeffs", me_coeffs, "Comma-separated interaction coefficients")->required();
  me->add_option("--means", me_means, "Comma-separated means of the interaction variables")->required();
  me->add_option("--constant", me_constant, "Baseline coefficient");
  me->add_option("--format", me_format, "Output format")->check(CLI::IsMember({"text", "json"}));

  std::vector<std::string> args(argv.size() > 1 ? argv.begin() + 1 : argv.end(), argv.end());
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*est) {
      EstimateOptions opts;
      opts.run_cite = est_estimator != "ite";
      opts.run_ite = est_estimator != "cite";
      opts.weight_mode = parse_weight_mode(est_weight);
      opts.h_min = est_h_min;
      opts.bootstrap_replications = est_bootstrap;
      opts.seed = est_seed;
      opts.workers = est_workers;
      if (est_bootstrap > 0 && !opts.run_cite) throw UsageError("--bootstrap: only applies to CITE");
      PanelDataset ds = load_csv(est_input, est_schema.schema());
      if (est_intercept) ds = ds.with_intercept_h();
      const EstimateResult res = estimate(ds, opts);
      const json doc = to_json(res);
      if (!est_output.empty()) write_text(est_output, dump(doc));
      out << (est_format == "json" ? dump(doc) : format_estimates(res));
      if (res.any_sign_disagreement()) {
        const auto& labels = res.cite->kappa_labels;
        for (std::size_t j = 0; j < res.sign_disagreement.size(); ++j) {
          if (res.sign_disagreement[j]) {
            err << "warning: CITE and ITE disagree on the sign of " << labels[j] << "\n";
          }
        }
      }
      return 0;
    }
    if (*sim) {
      DgpConfig cfg = load_dgp_config(sim_config);
      if (sim_seed) cfg.seed = *sim_seed;
      if (sim_n) cfg.n = *sim_n;
      cfg.check();
      const SimulatedTruth truth = simulate(cfg, sim_workers);
      write_csv(truth.data, std::filesystem::path(sim_output));
      const std::string truth_path = sim_truth.empty() ? sim_output + ".truth.json" : sim_truth;
      write_text(truth_path, dump(truth_to_json(truth, cfg)));
      out << "wrote " << truth.data.dims.n << " units x " << truth.data.dims.periods << " periods to "
          << sim_output << " and truth to " << truth_path << "\n";
      return 0;
    }
    if (*val) {
      PanelDataset ds = load_csv(val_input, val_schema.schema());
      if (val_intercept) ds = ds.with_intercept_h();
      const ValidationReport rep = validate(ds, val_h_min);
      const json doc = to_json(rep);
      if (!val_output.empty()) write_text(val_output, dump(doc));
      out << (val_format == "json" ? dump(doc) : format_validation(rep));
      return rep.passed() ? 0 : 1;
    }
    if (*mc) {
      ExperimentConfig cfg = load_experiment_config(mc_config);
      if (mc_seed) cfg.seed = *mc_seed;
      if (mc_reps) cfg.replications = *mc_reps;
      const MonteCarloReport rep = run_experiment(cfg, mc_workers);
      const ConvergenceTable table = convergence_table(rep);
      if (!mc_output.empty()) write_text(mc_output, dump(to_json(rep)));
      if (!mc_table.empty()) write_text(mc_table, table.text);
      out << table.text;
      if (!rep.contracts_passed()) {
        for (const auto& c : rep.contracts) {
          if (!c.passed) err << "contract failed: " << c.name << ": " << c.detail << "\n";
        }
        return 1;
      }
      return 0;
    }
    if (*me) {
      const auto coeffs = parse_list("--coeffs", me_coeffs);
      const auto means = parse_list("--means", me_means);
      if (coeffs.size() != means.size()) {
        throw UsageError("--coeffs and --means: got " + std::to_string(coeffs.size()) + " and " +
                         std::to_string(means.size()) + " values");
      }
      const MeanEffectSummary s = mean_effect(coeffs, means, me_constant);
      if (me_format == "json") {
        out << dump({{"constant", s.constant},
                     {"coefficients", s.interaction_coefficients},
                     {"means", s.interaction_means},
                     {"mean_effect", s.mean_effect}});
      } else {
        out << fixed(s.mean_effect, 6) << "\n";
      }
      return 0;
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace interx
