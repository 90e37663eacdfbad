#include <cmath>

#include "dgp_unit.hpp"
#include "interx/dgp.hpp"
#include "interx/error.hpp"
#include "interx/parallel.hpp"

namespace interx {

namespace {

struct OracleUnit {
  Vector h;             // emitted H
  double delta1 = 0.0;
  double h1_sq = 0.0;   // H*_1^2
  double h1_h2 = 0.0;   // H*_1 H*_2
  double x2_h1_sq = 0.0;  // sum_t X_t^2 H*_1^2
  double x2_h1_h2 = 0.0;  // sum_t X_t^2 H*_1 H*_2
};

std::vector<OracleUnit> oracle_sample(const DgpConfig& cfg, std::size_t draws, std::uint64_t seed,
                                      std::size_t workers) {
  cfg.check();
  if (draws < 2) throw InvalidArgument("moment oracle needs at least 2 draws");
  const std::uint64_t stream = derive_seed({seed, hash_name("plim-oracle")});
  std::vector<OracleUnit> out(draws);
  parallel_for(draws, workers, [&](std::size_t i) {
    Rng rng(detail::unit_seed(stream, i));
    const detail::UnitDraw d = detail::draw_unit(cfg, rng);
    OracleUnit& o = out[i];
    o.h = d.h_emitted;
    o.delta1 = d.delta(0);
    if (d.h_full.size() >= 2) {
      const double h1 = d.h_full(0);
      const double h2 = d.h_full(1);
      const double x2 = d.x.col(0).squaredNorm();
      o.h1_sq = h1 * h1;
      o.h1_h2 = h1 * h2;
      o.x2_h1_sq = x2 * h1 * h1;
      o.x2_h1_h2 = x2 * h1 * h2;
    }
  });
  return out;
}

template <typename F>
MomentEstimate mean_of(const std::vector<OracleUnit>& sample, F f) {
  double sum = 0.0;
  for (const auto& o : sample) sum += f(o);
  const double n = static_cast<double>(sample.size());
  const double mean = sum / n;
  double ss = 0.0;
  for (const auto& o : sample) ss += (f(o) - mean) * (f(o) - mean);
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

MomentEstimate ite_plim_from(const DgpConfig& cfg, const std::vector<OracleUnit>& sample) {
  const double k1 = cfg.kappa[0];
  const double k2 = cfg.kappa[1];
  double num = 0.0;
  double den = 0.0;
  for (const auto& o : sample) {
    num += k2 * o.x2_h1_h2;
    den += o.x2_h1_sq;
  }
  const double ratio = num / den;
  double ss = 0.0;
  for (const auto& o : sample) {
    const double r = k2 * o.x2_h1_h2 - ratio * o.x2_h1_sq;
    ss += r * r;
  }
  return {k1 + ratio, std::sqrt(ss) / den};
}

}  // namespace

bool supports_ite_plim(const DgpConfig& cfg) {
  return cfg.kx == 1 && !cfg.fixed_effect && cfg.kg == 0 && cfg.kz == 0 && cfg.kh_full() == 2 &&
         cfg.x_eps_loading == 0.0 &&
         (cfg.scenario == Scenario::omitted_variable || cfg.scenario == Scenario::functional_form);
}

MomentEstimate ite_plim_kappa1(const DgpConfig& cfg, std::size_t draws, std::uint64_t seed,
                               std::size_t workers) {
  if (!supports_ite_plim(cfg)) {
    throw ScenarioUnsupported(
        "ITE limit needs scalar X without fixed effect, no G or Z, two H columns with the second "
        "hidden, and eps independent of X");
  }
  return ite_plim_from(cfg, oracle_sample(cfg, draws, seed, workers));
}

PlimTargets plim_targets(const DgpConfig& cfg, std::size_t draws, std::uint64_t seed,
                         std::size_t workers) {
  const auto sample = oracle_sample(cfg, draws, seed, workers);
  PlimTargets out;
  out.draws = draws;
  for (const std::size_t j : cfg.exposed_columns()) {
    out.labels.push_back("kappa[h" + std::to_string(j + 1) + "]");
  }

  const auto kh = static_cast<Eigen::Index>(cfg.exposed_columns().size());
  if (kh > 0) {
    Matrix a = Matrix::Zero(kh, kh);
    Vector b = Vector::Zero(kh);
    for (const auto& o : sample) {
      a.noalias() += o.h * o.h.transpose();
      b.noalias() += o.h * o.delta1;
    }
    const auto solver = a.ldlt();
    out.kappa_tilde = solver.solve(b);
    Matrix meat = Matrix::Zero(kh, kh);
    for (const auto& o : sample) {
      const double e = o.delta1 - o.h.dot(out.kappa_tilde);
      meat.noalias() += (o.h * e) * (o.h * e).transpose();
    }
    const Matrix a_inv = solver.solve(Matrix::Identity(kh, kh));
    out.kappa_tilde_se = (a_inv * meat * a_inv).diagonal().cwiseMax(0.0).cwiseSqrt();
  }

  out.moments["E[delta1]"] = mean_of(sample, [](const OracleUnit& o) { return o.delta1; });
  if (cfg.kh_full() >= 2) {
    out.moments["E[H1^2]"] = mean_of(sample, [](const OracleUnit& o) { return o.h1_sq; });
    out.moments["E[H1*H2]"] = mean_of(sample, [](const OracleUnit& o) { return o.h1_h2; });
    out.moments["sum_t E[X^2*H1^2]"] = mean_of(sample, [](const OracleUnit& o) { return o.x2_h1_sq; });
    out.moments["sum_t E[X^2*H1*H2]"] = mean_of(sample, [](const OracleUnit& o) { return o.x2_h1_h2; });
  }
  if (supports_ite_plim(cfg)) out.ite_plim_kappa1 = ite_plim_from(cfg, sample);
  return out;
}

}  // namespace interx
