#include "interx/dgp.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "dgp_unit.hpp"
#include "interx/error.hpp"
#include "interx/parallel.hpp"

namespace interx {

using nlohmann::json;

Scenario parse_scenario(std::string_view text) {
  if (text == "baseline") return Scenario::baseline;
  if (text == "omitted_variable") return Scenario::omitted_variable;
  if (text == "functional_form") return Scenario::functional_form;
  if (text == "measurement_error") return Scenario::measurement_error;
  if (text == "correlated_random_effects") return Scenario::correlated_random_effects;
  if (text == "correlated_x_delta") return Scenario::correlated_x_delta;
  throw ConfigInvalid("scenario", "unknown scenario '" + std::string(text) + "'");
}

std::string_view to_string(Scenario scenario) {
  switch (scenario) {
    case Scenario::baseline: return "baseline";
    case Scenario::omitted_variable: return "omitted_variable";
    case Scenario::functional_form: return "functional_form";
    case Scenario::measurement_error: return "measurement_error";
    case Scenario::correlated_random_effects: return "correlated_random_effects";
    case Scenario::correlated_x_delta: return "correlated_x_delta";
  }
  return "baseline";
}

std::vector<std::size_t> DgpConfig::hidden_columns() const {
  if ((scenario == Scenario::omitted_variable || scenario == Scenario::functional_form) &&
      kh_full() >= 1) {
    return {kh_full() - 1};
  }
  return {};
}

std::vector<std::size_t> DgpConfig::exposed_columns() const {
  const auto hidden = hidden_columns();
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < kh_full(); ++j) {
    if (std::find(hidden.begin(), hidden.end(), j) == hidden.end()) out.push_back(j);
  }
  return out;
}

void DgpConfig::check() const {
  auto fail = [](const std::string& field, const std::string& why) { throw ConfigInvalid(field, why); };
  auto nonneg = [&](double v, const char* field) {
    if (!(v >= 0.0) || !std::isfinite(v)) fail(field, "must be a finite nonnegative number");
  };
  if (n < 2) fail("n", "must be at least 2");
  if (periods < 1) fail("periods", "must be at least 1");
  if (kx < 1) fail("x.count", "must be at least 1");
  if (periods < kx) fail("periods", "must be at least x.count");
  if (fixed_effect && kx < 2) fail("x.fixed_effect", "requires x.count >= 2");
  nonneg(x_sd, "x.sd");
  nonneg(g_sd, "g.sd");
  nonneg(z_sd, "z.sd");
  nonneg(h_measurement_sd, "h.measurement_sd");
  nonneg(delta_other_sd, "delta_other.sd");
  nonneg(u_sd, "noise.u_sd");
  nonneg(v_sd, "noise.v_sd");
  nonneg(eps_sd, "noise.eps_sd");
  const std::size_t kh = kh_full();
  if (h_sd.size() != kh) fail("h.sd", "must have the same length as h.mean");
  if (h_factor_loading.size() != kh) fail("h.factor_loading", "must have the same length as h.mean");
  for (std::size_t j = 0; j < kh; ++j) {
    nonneg(h_sd[j], "h.sd");
    if (!(std::abs(h_factor_loading[j]) <= 1.0)) fail("h.factor_loading", "must lie in [-1, 1]");
  }
  if (kappa.size() != kh) fail("kappa", "must have one entry per H column");
  if (static_cast<std::size_t>(phi.rows()) != kx || static_cast<std::size_t>(phi.cols()) != kg) {
    fail("phi", "must be an x.count by g.count array");
  }
  if (gamma.size() != kz) fail("gamma", "must have one entry per Z column");
  switch (scenario) {
    case Scenario::omitted_variable:
    case Scenario::functional_form:
      if (kh < 2) fail("h.mean", "scenario needs at least two H columns, the last one hidden");
      break;
    case Scenario::measurement_error:
      if (kh < 1) fail("h.mean", "scenario needs at least one H column");
      break;
    case Scenario::correlated_random_effects:
      if (x_eps_loading != 0.0) fail("x.eps_loading", "must be 0 under correlated random effects");
      break;
    case Scenario::correlated_x_delta:
      if (x_eps_loading == 0.0) fail("x.eps_loading", "must be nonzero for correlated_x_delta");
      break;
    case Scenario::baseline:
      break;
  }
}

// ---------------------------------------------------------------------------
// JSON

namespace {

class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigInvalid(path_.empty() ? "<root>" : path_, "must be an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigInvalid(field(key), e.what());
    }
  }

  std::optional<Reader> child(const char* key) {
    seen_.insert(key);
    if (!j_.contains(key)) return std::nullopt;
    return Reader(j_.at(key), field(key));
  }

  const json* raw(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  void finish() const {
    for (const auto& [key, _] : j_.items()) {
      if (!seen_.count(key)) throw ConfigInvalid(field(key.c_str()), "unknown field");
    }
  }

  std::string field(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

}  // namespace

DgpConfig dgp_from_json(const json& j) {
  DgpConfig cfg;
  Reader r(j, "");
  r.get("n", cfg.n);
  r.get("periods", cfg.periods);
  std::string scenario = "baseline";
  r.get("scenario", scenario);
  cfg.scenario = parse_scenario(scenario);
  r.get("seed", cfg.seed);
  if (auto x = r.child("x")) {
    x->get("count", cfg.kx);
    x->get("fixed_effect", cfg.fixed_effect);
    x->get("mean", cfg.x_mean);
    x->get("sd", cfg.x_sd);
    x->get("eps_loading", cfg.x_eps_loading);
    x->get("fe_loading", cfg.x_fe_loading);
    x->get("scale_on_last_h", cfg.x_scale_on_last_h);
    x->finish();
  }
  if (auto g = r.child("g")) {
    g->get("count", cfg.kg);
    g->get("mean", cfg.g_mean);
    g->get("sd", cfg.g_sd);
    g->finish();
  }
  if (auto z = r.child("z")) {
    z->get("count", cfg.kz);
    z->get("mean", cfg.z_mean);
    z->get("sd", cfg.z_sd);
    z->get("fe_loading", cfg.z_fe_loading);
    z->finish();
  }
  if (auto h = r.child("h")) {
    h->get("mean", cfg.h_mean);
    cfg.h_sd.assign(cfg.h_mean.size(), 1.0);
    cfg.h_factor_loading.assign(cfg.h_mean.size(), 0.0);
    h->get("sd", cfg.h_sd);
    h->get("factor_loading", cfg.h_factor_loading);
    h->get("measurement_sd", cfg.h_measurement_sd);
    h->finish();
  }
  r.get("kappa", cfg.kappa);
  cfg.phi = Matrix::Zero(static_cast<Eigen::Index>(cfg.kx), static_cast<Eigen::Index>(cfg.kg));
  if (const json* phi = r.raw("phi")) {
    std::vector<std::vector<double>> rows;
    try {
      rows = phi->get<std::vector<std::vector<double>>>();
    } catch (const json::exception& e) {
      throw ConfigInvalid("phi", e.what());
    }
    if (rows.size() != cfg.kx) throw ConfigInvalid("phi", "must have x.count rows");
    for (std::size_t k = 0; k < rows.size(); ++k) {
      if (rows[k].size() != cfg.kg) throw ConfigInvalid("phi", "each row must have g.count entries");
      for (std::size_t m = 0; m < cfg.kg; ++m) {
        cfg.phi(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(m)) = rows[k][m];
      }
    }
  }
  cfg.gamma.assign(cfg.kz, 0.0);
  r.get("gamma", cfg.gamma);
  if (auto d = r.child("delta_other")) {
    d->get("mean", cfg.delta_other_mean);
    d->get("sd", cfg.delta_other_sd);
    d->finish();
  }
  if (auto noise = r.child("noise")) {
    noise->get("u_sd", cfg.u_sd);
    noise->get("v_sd", cfg.v_sd);
    noise->get("eps_sd", cfg.eps_sd);
    noise->finish();
  }
  r.finish();
  cfg.check();
  return cfg;
}

json to_json(const DgpConfig& cfg) {
  json phi = json::array();
  for (Eigen::Index k = 0; k < cfg.phi.rows(); ++k) {
    json row = json::array();
    for (Eigen::Index m = 0; m < cfg.phi.cols(); ++m) row.push_back(cfg.phi(k, m));
    phi.push_back(row);
  }
  return json{
      {"n", cfg.n},
      {"periods", cfg.periods},
      {"scenario", std::string(to_string(cfg.scenario))},
      {"seed", cfg.seed},
      {"x",
       {{"count", cfg.kx},
        {"fixed_effect", cfg.fixed_effect},
        {"mean", cfg.x_mean},
        {"sd", cfg.x_sd},
        {"eps_loading", cfg.x_eps_loading},
        {"fe_loading", cfg.x_fe_loading},
        {"scale_on_last_h", cfg.x_scale_on_last_h}}},
      {"g", {{"count", cfg.kg}, {"mean", cfg.g_mean}, {"sd", cfg.g_sd}}},
      {"z", {{"count", cfg.kz}, {"mean", cfg.z_mean}, {"sd", cfg.z_sd}, {"fe_loading", cfg.z_fe_loading}}},
      {"h",
       {{"mean", cfg.h_mean},
        {"sd", cfg.h_sd},
        {"factor_loading", cfg.h_factor_loading},
        {"measurement_sd", cfg.h_measurement_sd}}},
      {"kappa", cfg.kappa},
      {"phi", phi},
      {"gamma", cfg.gamma},
      {"delta_other", {{"mean", cfg.delta_other_mean}, {"sd", cfg.delta_other_sd}}},
      {"noise", {{"u_sd", cfg.u_sd}, {"v_sd", cfg.v_sd}, {"eps_sd", cfg.eps_sd}}},
  };
}

DgpConfig load_dgp_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigInvalid(path.string(), "cannot open file");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigInvalid(path.string(), e.what());
  }
  return dgp_from_json(j);
}

// ---------------------------------------------------------------------------
// Simulation

namespace detail {

UnitDraw draw_unit(const DgpConfig& cfg, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto t = static_cast<Eigen::Index>(cfg.periods);
  const auto kx = static_cast<Eigen::Index>(cfg.kx);
  const auto kg = static_cast<Eigen::Index>(cfg.kg);
  const auto kz = static_cast<Eigen::Index>(cfg.kz);
  const auto kh = static_cast<Eigen::Index>(cfg.kh_full());

  UnitDraw d;
  const double factor = normal(rng);
  d.h_full.resize(kh);
  for (Eigen::Index j = 0; j < kh; ++j) {
    const double rho = cfg.h_factor_loading[static_cast<std::size_t>(j)];
    const double xi = normal(rng);
    d.h_full(j) = cfg.h_mean[static_cast<std::size_t>(j)] +
                  cfg.h_sd[static_cast<std::size_t>(j)] * (rho * factor + std::sqrt(1.0 - rho * rho) * xi);
  }
  if (cfg.scenario == Scenario::functional_form) d.h_full(kh - 1) = d.h_full(0) * d.h_full(0);
  const double measurement = normal(rng);

  d.eps = cfg.eps_sd * normal(rng);
  d.delta.resize(kx);
  double kappa_part = 0.0;
  for (Eigen::Index j = 0; j < kh; ++j) kappa_part += d.h_full(j) * cfg.kappa[static_cast<std::size_t>(j)];
  d.delta(0) = kappa_part + d.eps;
  double fe_shock = 0.0;
  for (Eigen::Index k = 1; k < kx; ++k) {
    const double eta = normal(rng);
    if (k == 1) fe_shock = eta;
    d.delta(k) = cfg.delta_other_mean + cfg.delta_other_sd * eta;
  }

  const double scale = kh > 0 ? std::exp(cfg.x_scale_on_last_h * d.h_full(kh - 1)) : 1.0;
  d.x.resize(t, kx);
  d.g.resize(t, kg);
  d.z.resize(t, kz);
  d.v.resize(t, kx);
  d.beta.resize(t, kx);
  d.u.resize(t);
  d.y.resize(t);
  for (Eigen::Index s = 0; s < t; ++s) {
    for (Eigen::Index k = 0; k < kx; ++k) {
      const double e = normal(rng);
      if (cfg.fixed_effect && k == 1) {
        d.x(s, k) = 1.0;
      } else {
        d.x(s, k) = cfg.x_mean + cfg.x_sd * scale * e + cfg.x_eps_loading * d.eps +
                    cfg.x_fe_loading * fe_shock;
      }
    }
    for (Eigen::Index m = 0; m < kg; ++m) d.g(s, m) = cfg.g_mean + cfg.g_sd * normal(rng);
    for (Eigen::Index m = 0; m < kz; ++m) {
      d.z(s, m) = cfg.z_mean + cfg.z_sd * normal(rng) + cfg.z_fe_loading * fe_shock;
    }
    for (Eigen::Index k = 0; k < kx; ++k) d.v(s, k) = cfg.v_sd * normal(rng);
    d.u(s) = cfg.u_sd * normal(rng);
  }
  for (Eigen::Index s = 0; s < t; ++s) {
    double y = d.u(s);
    for (Eigen::Index k = 0; k < kx; ++k) {
      double b = d.delta(k) + d.v(s, k);
      for (Eigen::Index m = 0; m < kg; ++m) b += d.g(s, m) * cfg.phi(k, m);
      d.beta(s, k) = b;
      y += d.x(s, k) * b;
    }
    for (Eigen::Index m = 0; m < kz; ++m) y += d.z(s, m) * cfg.gamma[static_cast<std::size_t>(m)];
    d.y(s) = y;
  }

  const auto exposed = cfg.exposed_columns();
  d.h_emitted.resize(static_cast<Eigen::Index>(exposed.size()));
  for (std::size_t j = 0; j < exposed.size(); ++j) {
    d.h_emitted(static_cast<Eigen::Index>(j)) = d.h_full(static_cast<Eigen::Index>(exposed[j]));
  }
  if (cfg.scenario == Scenario::measurement_error) {
    d.h_emitted(0) += cfg.h_measurement_sd * measurement;
  }
  return d;
}

}  // namespace detail

SimulatedTruth simulate(const DgpConfig& cfg, std::size_t workers) {
  cfg.check();
  const auto exposed = cfg.exposed_columns();
  Dims dims{cfg.n, cfg.periods, cfg.kx, cfg.kg, cfg.kz, exposed.size()};
  SimulatedTruth truth;
  truth.data = make_panel(dims);
  truth.data.names.h.clear();
  for (const std::size_t j : exposed) truth.data.names.h.push_back("h" + std::to_string(j + 1));
  truth.h_full_names = default_names("h", cfg.kh_full());
  truth.hidden_columns = cfg.hidden_columns();
  truth.kappa_exposed.resize(static_cast<Eigen::Index>(exposed.size()));
  for (std::size_t j = 0; j < exposed.size(); ++j) {
    truth.kappa_exposed(static_cast<Eigen::Index>(j)) = cfg.kappa[exposed[j]];
  }

  const auto n = static_cast<Eigen::Index>(cfg.n);
  const auto t = static_cast<Eigen::Index>(cfg.periods);
  truth.delta.resize(n, static_cast<Eigen::Index>(cfg.kx));
  truth.beta.resize(cfg.n);
  truth.v.resize(cfg.n);
  truth.u.resize(n, t);
  truth.eps.resize(n);
  truth.h_full.resize(n, static_cast<Eigen::Index>(cfg.kh_full()));

  parallel_for(cfg.n, workers, [&](std::size_t i) {
    Rng rng(detail::unit_seed(cfg.seed, i));
    detail::UnitDraw d = detail::draw_unit(cfg, rng);
    const auto ii = static_cast<Eigen::Index>(i);
    auto& ds = truth.data;
    ds.y.row(ii) = d.y.transpose();
    ds.x[i] = std::move(d.x);
    ds.g[i] = std::move(d.g);
    ds.z[i] = std::move(d.z);
    ds.h.row(ii) = d.h_emitted.transpose();
    truth.delta.row(ii) = d.delta.transpose();
    truth.beta[i] = std::move(d.beta);
    truth.v[i] = std::move(d.v);
    truth.u.row(ii) = d.u.transpose();
    truth.eps(ii) = d.eps;
    truth.h_full.row(ii) = d.h_full.transpose();
  });
  return truth;
}

double reconstruction_error(const SimulatedTruth& truth, const DgpConfig& cfg) {
  const auto& ds = truth.data;
  double worst = 0.0;
  const Vector gamma = Eigen::Map<const Vector>(cfg.gamma.data(), static_cast<Eigen::Index>(cfg.gamma.size()));
  for (std::size_t i = 0; i < ds.dims.n; ++i) {
    const Vector fitted = (ds.x[i].array() * truth.beta[i].array()).rowwise().sum().matrix() +
                          ds.z[i] * gamma + truth.u.row(static_cast<Eigen::Index>(i)).transpose();
    worst = std::max(worst, (ds.y_unit(i) - fitted).cwiseAbs().maxCoeff());
  }
  return worst;
}

json truth_to_json(const SimulatedTruth& truth, const DgpConfig& cfg) {
  auto rows = [](const Matrix& m) {
    json out = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      json row = json::array();
      for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
      out.push_back(std::move(row));
    }
    return out;
  };
  std::vector<std::string> hidden;
  for (const std::size_t j : truth.hidden_columns) hidden.push_back(truth.h_full_names[j]);
  return json{
      {"config", to_json(cfg)},
      {"units", truth.data.unit_labels},
      {"h_full_names", truth.h_full_names},
      {"hidden_h", hidden},
      {"kappa_exposed", std::vector<double>(truth.kappa_exposed.data(),
                                            truth.kappa_exposed.data() + truth.kappa_exposed.size())},
      {"delta", rows(truth.delta)},
      {"eps", std::vector<double>(truth.eps.data(), truth.eps.data() + truth.eps.size())},
      {"h_full", rows(truth.h_full)},
  };
}

}  // namespace interx
