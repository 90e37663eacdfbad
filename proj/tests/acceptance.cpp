// Acceptance suite. `acceptance` runs every criterion; `acceptance 5` runs one.
// Prints one PASS/FAIL line per criterion and exits nonzero if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>

#include "interx/estimators.hpp"
#include "interx/harness.hpp"
#include "support.hpp"

using namespace interx;

namespace {

// Tolerances, pinned.
constexpr double kFwlTol = 1e-8;
constexpr double kWithinTol = 1e-9;
constexpr double kRemarkTol = 1e-9;
constexpr double kRecoveryTol = 1e-10;
constexpr double kBiasMcse = 3.0;
constexpr double kRmseRatio = 2.0;
constexpr double kRmseRatioSlack = 0.5;  // factor 2 +- 50%
constexpr double kGapMcse = 10.0;
constexpr double kIteBiasMcse = 5.0;
constexpr double kMeanEffectA = 0.462;
constexpr double kMeanEffectATol = 0.0005;
constexpr double kMeanEffectB = 0.506;
constexpr double kMeanEffectBTol = 0.001;
constexpr double kSeconds1 = 10.0;
constexpr double kSecondsMc = 300.0;
constexpr int kInstances = 100;

struct Outcome {
  bool passed = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

Vector demean(const Vector& v) { return v.array() - v.mean(); }

ExperimentConfig experiment(const std::string& file) {
  return load_experiment_config(INTERX_SOURCE_DIR "/configs/" + file);
}

// ---------------------------------------------------------------------------

Outcome fwl_oracle() {
  const auto start = Clock::now();
  double worst = 0.0;
  for (int s = 1; s <= kInstances; ++s) {
    const auto ds = test::random_panel({30, 8, 2, 1, 1, 2}, derive_seed({1, static_cast<std::uint64_t>(s)}));
    const auto dr = build_regressors(ds);
    const Vector theta = cite_theta(ds, dr);
    const Matrix delta = cite_delta(ds, dr, theta);
    const Vector oracle = test::dummy_variable_ols(ds);
    worst = std::max(worst, max_abs(theta - oracle.tail(theta.size())));
    for (Eigen::Index i = 0; i < 30; ++i) {
      worst = std::max(worst, max_abs(delta.row(i).transpose() - oracle.segment(2 * i, 2)));
    }
  }
  const double secs = seconds_since(start);
  return {worst < kFwlTol && secs < kSeconds1,
          "max |diff| = " + num(worst) + " (tol " + num(kFwlTol) + ") over " + std::to_string(kInstances) +
              " datasets in " + num(secs) + " s (limit " + num(kSeconds1) + " s)"};
}

Outcome within_oracle() {
  double worst = 0.0;
  for (int s = 1; s <= kInstances; ++s) {
    const auto ds = test::random_panel({25, 6, 2, 0, 0, 1}, derive_seed({2, static_cast<std::uint64_t>(s)}), true);
    const double kappa = ite(ds, build_regressors(ds)).kappa()(0);
    Matrix a(150, 1);
    Vector b(150);
    for (Eigen::Index i = 0; i < 25; ++i) {
      a.block(i * 6, 0, 6, 1) = demean(ds.x[static_cast<std::size_t>(i)].col(0)) * ds.h(i, 0);
      b.segment(i * 6, 6) = demean(ds.y.row(i).transpose());
    }
    const double oracle = test::normal_equations(a, b)(0);
    worst = std::max(worst, std::abs(kappa - oracle) / std::max(1.0, std::abs(oracle)));
  }
  return {worst < kWithinTol, "max |diff| = " + num(worst) + " (tol " + num(kWithinTol) + ") over " +
                                  std::to_string(kInstances) + " instances"};
}

Outcome special_cases() {
  double worst2 = 0.0, worst4 = 0.0;
  for (int s = 1; s <= kInstances; ++s) {
    // X = ones: CITE theta is the within estimator on (G, Z)
    auto ds = test::random_panel({20, 5, 1, 1, 2, 2}, derive_seed({3, static_cast<std::uint64_t>(s)}));
    for (auto& x : ds.x) x.setOnes();
    const Vector theta = cite_theta(ds, build_regressors(ds));
    Matrix a(100, 3);
    Vector b(100);
    for (Eigen::Index i = 0; i < 20; ++i) {
      const auto u = static_cast<std::size_t>(i);
      for (Eigen::Index t = 0; t < 5; ++t) a.row(i * 5 + t) << ds.g[u].row(t), ds.z[u].row(t);
      for (Eigen::Index c = 0; c < 3; ++c) a.block(i * 5, c, 5, 1) = demean(a.block(i * 5, c, 5, 1));
      b.segment(i * 5, 5) = demean(ds.y.row(i).transpose());
    }
    worst2 = std::max(worst2, max_abs(theta - test::normal_equations(a, b)));

    // X = ones, no G: ITE is pooled OLS of Y on (H, Z)
    auto d4 = test::random_panel({20, 5, 1, 0, 2, 2}, derive_seed({4, static_cast<std::uint64_t>(s)}));
    for (auto& x : d4.x) x.setOnes();
    const Vector tt = ite(d4, build_regressors(d4)).theta_tilde;
    Matrix p(100, 4);
    Vector y(100);
    for (Eigen::Index i = 0; i < 20; ++i) {
      for (Eigen::Index t = 0; t < 5; ++t) {
        p.row(i * 5 + t) << d4.h.row(i), d4.z[static_cast<std::size_t>(i)].row(t);
        y(i * 5 + t) = d4.y(i, t);
      }
    }
    worst4 = std::max(worst4, max_abs(tt - test::normal_equations(p, y)));
  }
  return {worst2 < kRemarkTol && worst4 < kRemarkTol,
          "CITE gamma vs within: " + num(worst2) + ", ITE vs pooled OLS on (H, Z): " + num(worst4) +
              " (tol " + num(kRemarkTol) + ")"};
}

Outcome noiseless_recovery() {
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    DgpConfig cfg = test::noiseless_config();
    cfg.seed = seed;
    const auto truth = simulate(cfg);
    const auto dr = build_regressors(truth.data);
    const auto c = cite(truth.data, dr);
    const auto t = ite(truth.data, dr);
    Vector kappa(2), theta(3);
    kappa << cfg.kappa[0], cfg.kappa[1];
    theta << cfg.phi(0, 0), cfg.phi(1, 0), cfg.gamma[0];
    worst = std::max({worst, max_abs(c.kappa - kappa), max_abs(c.theta - theta), max_abs(t.kappa() - kappa),
                      max_abs(t.theta() - theta)});
  }
  return {worst < kRecoveryTol, "max |estimate - truth| = " + num(worst) + " (tol " + num(kRecoveryTol) + ")"};
}

Outcome cite_consistency() {
  const auto start = Clock::now();
  const auto cfg = experiment("mc_baseline.json");
  const auto rep = run_experiment(cfg, 0);
  const double secs = seconds_since(start);
  const std::size_t n_max = cfg.sample_sizes.back();
  Outcome o;
  std::ostringstream os;
  double worst_bias = 0.0;
  double lo = INFINITY, hi = 0.0;
  for (const auto& c : rep.cells) {
    if (c.estimator != "CITE") continue;
    if (c.n == n_max) worst_bias = std::max(worst_bias, std::abs(c.bias) / c.mc_se);
    for (std::size_t s = 1; s < cfg.sample_sizes.size(); ++s) {
      if (c.n != cfg.sample_sizes[s]) continue;
      const auto* prev = rep.find("CITE", cfg.sample_sizes[s - 1], c.parameter);
      const double ratio = prev->rmse / c.rmse;
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
  }
  const double r_lo = kRmseRatio * (1.0 - kRmseRatioSlack), r_hi = kRmseRatio * (1.0 + kRmseRatioSlack);
  o.passed = worst_bias < kBiasMcse && lo >= r_lo && hi <= r_hi && secs < kSecondsMc;
  os << "max |bias|/MC-SE at n=" << n_max << " = " << num(worst_bias) << " (limit " << num(kBiasMcse)
     << "), RMSE ratio per 4x n in [" << num(lo) << ", " << num(hi) << "] (allowed [" << num(r_lo) << ", "
     << num(r_hi) << "]), R=" << cfg.replications << ", " << num(secs) << " s";
  o.detail = os.str();
  return o;
}

Outcome ite_inconsistency() {
  const auto start = Clock::now();
  const auto cfg = experiment("mc_sign_conflict.json");
  const auto rep = run_experiment(cfg, 0);
  const double secs = seconds_since(start);
  const std::size_t n_max = cfg.sample_sizes.back();
  const auto* ite_c = rep.find("ITE", n_max, "kappa[h1]");
  const auto* cite_c = rep.find("CITE", n_max, "kappa[h1]");
  const auto& ite_plim = *rep.plim.ite_plim_kappa1;
  const double kt = rep.plim.kappa_tilde(0);
  const double ite_z = std::abs(ite_c->mean - ite_plim.value) / std::hypot(ite_c->mc_se, ite_plim.se);
  const double cite_z = std::abs(cite_c->mean - kt) / std::hypot(cite_c->mc_se, rep.plim.kappa_tilde_se(0));
  const double gap = std::abs(ite_plim.value - kt) / ite_c->mc_se;
  const double agree = *rep.sizes.back().sign_agreement_rate;
  const bool opposite = rep.plim_sign_conflict;
  const bool passed = ite_z < kBiasMcse && cite_z < kBiasMcse && gap > kGapMcse && opposite && agree < 0.5 &&
                      secs < kSecondsMc;
  return {passed, "ITE limit " + num(ite_plim.value) + ", mean ITE " + num(ite_c->mean) + " (" + num(ite_z) +
                      " SE); kappa_tilde " + num(kt) + ", mean CITE " + num(cite_c->mean) + " (" + num(cite_z) +
                      " SE); gap " + num(gap) + " MC-SE (need > " + num(kGapMcse) + "); sign agreement " +
                      num(agree) + " with opposite-sign limits; " + num(secs) + " s"};
}

Outcome specification_contrast() {
  const auto xd = run_experiment(experiment("mc_correlated_x_delta.json"), 0);
  const auto cre = run_experiment(experiment("mc_correlated_random_effects.json"), 0);
  const std::size_t n_max = xd.sample_sizes.back();
  const auto* ite_xd = xd.find("ITE", n_max, "kappa[h1]");
  const auto* cite_xd = xd.find("CITE", n_max, "kappa[h1]");
  const auto* ite_cre = cre.find("ITE", cre.sample_sizes.back(), "kappa[h1]");
  const double b1 = std::abs(ite_xd->bias) / ite_xd->mc_se;
  const double b2 = std::abs(cite_xd->bias) / cite_xd->mc_se;
  const double b3 = std::abs(ite_cre->bias) / ite_cre->mc_se;
  return {b1 > kIteBiasMcse && b2 < kBiasMcse && b3 < kBiasMcse,
          "eps correlated with X: ITE bias " + num(ite_xd->bias) + " = " + num(b1) + " MC-SE (need > " +
              num(kIteBiasMcse) + "), CITE " + num(b2) + " MC-SE; correlated random effects: ITE " + num(b3) +
              " MC-SE (limit " + num(kBiasMcse) + ")"};
}

Outcome mean_effect_main() {
  const std::vector<double> c{-1.146, 0.805, -0.0274}, m{0.64, 61.867, 75.774};
  const double v = mean_effect(c, m, -46.5).mean_effect;
  return {std::abs(v - kMeanEffectA) <= kMeanEffectATol,
          "computed " + num(v) + ", expected " + num(kMeanEffectA) + " +- " + num(kMeanEffectATol)};
}

Outcome mean_effect_footnote() {
  const std::vector<double> c{-0.624}, m{0.64};
  const double v = mean_effect(c, m, 0.905).mean_effect;
  return {std::abs(v - kMeanEffectB) <= kMeanEffectBTol,
          "computed " + num(v) + ", expected " + num(kMeanEffectB) + " +- " + num(kMeanEffectBTol)};
}

std::string fingerprint(std::size_t workers) {
  std::ostringstream os;
  os.precision(17);
  for (int s = 1; s <= 5; ++s) {
    const auto ds = test::random_panel({30, 8, 2, 1, 1, 2}, static_cast<std::uint64_t>(s));
    const auto dr = build_regressors(ds);
    const auto c = cite(ds, dr);
    os << c.theta.transpose() << ' ' << c.kappa.transpose() << ' ' << ite(ds, dr).theta_tilde.transpose() << '\n';
  }
  for (const char* f : {"mc_baseline.json", "mc_sign_conflict.json", "mc_correlated_x_delta.json",
                        "mc_correlated_random_effects.json"}) {
    os << to_json(run_experiment(experiment(f), workers)).dump() << '\n';
  }
  return os.str();
}

Outcome determinism() {
  const std::string a = fingerprint(1);
  const std::string b = fingerprint(1);
  const std::string c = fingerprint(4);
  return {a == b && a == c, std::string("repeat run ") + (a == b ? "identical" : "DIFFERS") + ", 4 workers vs 1 " +
                                (a == c ? "identical" : "DIFFERS") + " (" + std::to_string(a.size()) + " bytes)"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::pair<std::string, std::function<Outcome()>>>> criteria{
      {"1", {"FWL oracle equivalence", fwl_oracle}},
      {"2", {"within-transformation oracle", within_oracle}},
      {"3", {"special-case reductions", special_cases}},
      {"4", {"noiseless exact recovery", noiseless_recovery}},
      {"5", {"CITE consistency", cite_consistency}},
      {"6", {"ITE inconsistency and sign conflict", ite_inconsistency}},
      {"7", {"correct-specification contrast", specification_contrast}},
      {"8a", {"mean effect 0.462", mean_effect_main}},
      {"8b", {"mean effect 0.506", mean_effect_footnote}},
      {"9", {"determinism", determinism}},
  };
  const std::string only = argc > 1 ? argv[1] : "";
  bool all_passed = true;
  bool ran = false;
  for (const auto& [id, entry] : criteria) {
    if (!only.empty() && only != id) continue;
    ran = true;
    Outcome o;
    try {
      o = entry.second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    std::printf("[%s] criterion %s %s: %s\n", o.passed ? "PASS" : "FAIL", id.c_str(), entry.first.c_str(),
                o.detail.c_str());
    std::fflush(stdout);
    all_passed = all_passed && o.passed;
  }
  if (!ran) {
    std::fprintf(stderr, "unknown criterion '%s'\n", only.c_str());
    return 2;
  }
  return all_passed ? 0 : 1;
}
