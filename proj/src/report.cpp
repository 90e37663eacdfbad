#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "interx/harness.hpp"
#include "interx/serialize.hpp"

namespace interx {

using nlohmann::json;

namespace {

json vec(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json opt(const std::optional<double>& v) { return v ? number_or_null(*v) : json(nullptr); }

std::string cell(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%10.5f", v);
  return buf;
}

}  // namespace

json to_json(const ValidationReport& r) {
  json units = json::array();
  for (const auto& u : r.units) {
    units.push_back({{"unit", u.unit},
                     {"det_x", u.det_x},
                     {"det_x_ratio", u.det_x_ratio},
                     {"det_x_minus1", u.det_x_minus1},
                     {"det_x_minus1_ratio", u.det_x_minus1_ratio},
                     {"rank_x_ok", u.rank_x_ok},
                     {"rank_x_minus1_ok", u.rank_x_minus1_ok}});
  }
  auto pooled = [](const PooledCheck& c) {
    return json{{"name", c.name}, {"margin", number_or_null(c.margin)}, {"ok", c.ok}};
  };
  return {{"passed", r.passed()},
          {"h_min", r.h_min},
          {"failing_rank_x", r.failing_rank_x},
          {"failing_rank_x_minus1", r.failing_rank_x_minus1},
          {"pooled", json::array({pooled(r.psi), pooled(r.psi_tilde), pooled(r.h)})},
          {"units", units}};
}

json to_json(const SeResult& r) {
  return {{"labels", r.labels},
          {"estimate", vec(r.estimate)},
          {"se", vec(r.se)},
          {"method", r.method},
          {"clusters", r.clusters}};
}

json to_json(const EstimateResult& r) {
  json est = json::array();
  for (const auto& e : r.estimators) {
    json rows = json::array();
    for (std::size_t k = 0; k < e.labels.size(); ++k) {
      const auto i = static_cast<Eigen::Index>(k);
      rows.push_back({{"parameter", e.labels[k]},
                      {"estimate", e.estimate(i)},
                      {"se", number_or_null(e.se(i))},
                      {"se_method", e.se_method[k]}});
    }
    est.push_back({{"estimator", e.estimator}, {"coefficients", rows}});
  }
  json flags = json::array();
  for (const bool b : r.sign_disagreement) flags.push_back(b);
  return {{"dims",
           {{"n", r.dims.n},
            {"periods", r.dims.periods},
            {"kx", r.dims.kx},
            {"kg", r.dims.kg},
            {"kz", r.dims.kz},
            {"kh", r.dims.kh}}},
          {"weight_mode", to_string(r.weight_mode)},
          {"estimators", est},
          {"units_dropped", r.units_dropped},
          {"sign_disagreement", flags},
          {"validation", to_json(r.validation)}};
}

std::string format_estimates(const EstimateResult& r) {
  std::ostringstream os;
  for (const auto& e : r.estimators) {
    os << e.estimator << "\n";
    std::size_t width = 9;
    for (const auto& l : e.labels) width = std::max(width, l.size());
    os << "  " << std::string(width - 9, ' ') << "parameter" << "   estimate         se  method\n";
    for (std::size_t k = 0; k < e.labels.size(); ++k) {
      const auto i = static_cast<Eigen::Index>(k);
      os << "  " << std::string(width - e.labels[k].size(), ' ') << e.labels[k] << ' '
         << cell(e.estimate(i)) << ' ' << cell(e.se(i)) << "  " << e.se_method[k] << "\n";
    }
  }
  if (!r.units_dropped.empty()) {
    os << "dropped " << r.units_dropped.size() << " unit(s) with rank-deficient X:";
    for (const auto& u : r.units_dropped) os << ' ' << u;
    os << "\n";
  }
  return os.str();
}

std::string format_validation(const ValidationReport& r) {
  std::ostringstream os;
  os << "units: " << r.units.size() << ", h_min " << r.h_min << "\n";
  os << "unit_rank_x: " << (r.failing_rank_x.empty() ? "ok" : "FAIL");
  for (const auto& u : r.failing_rank_x) os << ' ' << u;
  os << "\nunit_rank_x_minus1: " << (r.failing_rank_x_minus1.empty() ? "ok" : "FAIL");
  for (const auto& u : r.failing_rank_x_minus1) os << ' ' << u;
  os << "\n";
  for (const PooledCheck* c : {&r.psi, &r.psi_tilde, &r.h}) {
    os << c->name << ": " << (c->ok ? "ok" : "FAIL") << " (margin " << c->margin << ")\n";
  }
  return os.str();
}

ConvergenceTable convergence_table(const MonteCarloReport& report) {
  ConvergenceTable t;
  std::ostringstream os;
  os << "experiment " << report.name << " (" << to_string(report.scenario) << ", R = "
     << report.replications << ")\n";
  os << "estimator      parameter               n      truth     target       mean       bias"
        "         sd       rmse      mc_se\n";
  json rows = json::array();
  for (const auto& c : report.cells) {
    char head[64];
    std::snprintf(head, sizeof head, "%-14s %-18s %6zu", c.estimator.c_str(), c.parameter.c_str(), c.n);
    os << head << ' ' << cell(c.truth) << ' ' << (c.target ? cell(*c.target) : std::string(10, ' ').replace(9, 1, "-"))
       << ' ' << cell(c.mean) << ' ' << cell(c.bias) << ' ' << cell(c.sd) << ' ' << cell(c.rmse) << ' '
       << cell(c.mc_se) << "\n";
    rows.push_back({{"estimator", c.estimator},
                    {"parameter", c.parameter},
                    {"n", c.n},
                    {"truth", c.truth},
                    {"target", opt(c.target)},
                    {"target_se", c.target_se},
                    {"mean", c.mean},
                    {"bias", c.bias},
                    {"bias_target", opt(c.bias_target)},
                    {"sd", c.sd},
                    {"rmse", c.rmse},
                    {"mc_se", c.mc_se},
                    {"replications", c.replications}});
  }
  for (const auto& s : report.sizes) {
    if (s.sign_agreement_rate) {
      os << "n = " << s.n << ": CITE/ITE kappa_1 sign agreement " << *s.sign_agreement_rate << "\n";
    }
    if (s.failures > 0) os << "n = " << s.n << ": " << s.failures << " failed replication(s)\n";
  }
  for (const auto& c : report.contracts) {
    os << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
  }
  t.text = os.str();
  t.document = rows;
  return t;
}

json to_json(const MonteCarloReport& report) {
  json plim{{"labels", report.plim.labels},
            {"kappa_tilde", vec(report.plim.kappa_tilde)},
            {"kappa_tilde_se", vec(report.plim.kappa_tilde_se)},
            {"draws", report.plim.draws},
            {"sign_conflict", report.plim_sign_conflict}};
  if (report.plim.ite_plim_kappa1) {
    plim["ite_kappa1"] = {{"value", report.plim.ite_plim_kappa1->value},
                          {"se", report.plim.ite_plim_kappa1->se}};
  }
  json moments = json::object();
  for (const auto& [k, m] : report.plim.moments) moments[k] = {{"value", m.value}, {"se", m.se}};
  plim["moments"] = moments;

  json sizes = json::array();
  for (const auto& s : report.sizes) {
    sizes.push_back({{"n", s.n},
                     {"failures", s.failures},
                     {"failure_messages", s.failure_messages},
                     {"sign_agreement_rate", opt(s.sign_agreement_rate)}});
  }
  json contracts = json::array();
  for (const auto& c : report.contracts) {
    contracts.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  }
  return {{"name", report.name},
          {"scenario", to_string(report.scenario)},
          {"replications", report.replications},
          {"sample_sizes", report.sample_sizes},
          {"estimators", report.estimators},
          {"plim", plim},
          {"cells", convergence_table(report).document},
          {"sizes", sizes},
          {"contracts", contracts},
          {"contracts_passed", report.contracts_passed()}};
}

}  // namespace interx
