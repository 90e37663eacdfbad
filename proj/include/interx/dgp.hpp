#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "interx/linalg.hpp"
#include "interx/panel.hpp"

namespace interx {

enum class Scenario {
  baseline,                   // every H column observed; eps independent of H
  omitted_variable,           // last H column hidden from the emitted data
  functional_form,            // last H column is the square of the first, hidden
  measurement_error,          // first emitted H column observed with additive noise
  correlated_random_effects,  // eps independent of (X, G, Z, H)
  correlated_x_delta,         // X loads on eps, so unit slopes correlate with unit means of X
};

Scenario parse_scenario(std::string_view text);
std::string_view to_string(Scenario scenario);

/// Simulation design for the outcome, coefficient and heterogeneity equations:
///   Y_it      = sum_k X_itk beta_itk + Z_it gamma + U_it
///   beta_itk  = delta_ik + G_it phi_k + V_itk
///   delta_i1  = H*_i kappa + eps_i
/// All primitive shocks are Gaussian. H* columns share one common factor f_i:
///   H*_ij = mean_j + sd_j (loading_j f_i + sqrt(1 - loading_j^2) xi_ij),
/// so corr(H*_a, H*_b) = loading_a * loading_b when both have positive sd.
struct DgpConfig {
  std::size_t n = 200;
  std::size_t periods = 6;
  Scenario scenario = Scenario::baseline;
  std::uint64_t seed = 1;

  // X_itk = mean + sd * s_i * e_itk + eps_loading * eps_i + fe_loading * eta_i2,
  // with s_i = exp(scale_on_last_h * H*_i,last) and eta_i2 the standardized shock of delta_i2.
  std::size_t kx = 1;
  bool fixed_effect = false;  // X_it2 = 1, so delta_i2 is an additive fixed effect
  double x_mean = 1.0;
  double x_sd = 1.0;
  double x_eps_loading = 0.0;
  double x_fe_loading = 0.0;
  double x_scale_on_last_h = 0.0;

  std::size_t kg = 0;
  double g_mean = 0.0;
  double g_sd = 1.0;

  // Z_it = mean + sd * e_it + fe_loading * eta_i2
  std::size_t kz = 0;
  double z_mean = 0.0;
  double z_sd = 1.0;
  double z_fe_loading = 0.0;

  std::vector<double> h_mean;
  std::vector<double> h_sd;
  std::vector<double> h_factor_loading;
  double h_measurement_sd = 0.0;

  std::vector<double> kappa;  // one per H* column
  Matrix phi;                 // kx x kg
  std::vector<double> gamma;  // kz

  double delta_other_mean = 0.0;  // delta_ik for k >= 2
  double delta_other_sd = 1.0;

  double u_sd = 1.0;
  double v_sd = 0.0;
  double eps_sd = 1.0;

  std::size_t kh_full() const noexcept { return h_mean.size(); }
  /// Columns of H* removed from the emitted dataset.
  std::vector<std::size_t> hidden_columns() const;
  std::vector<std::size_t> exposed_columns() const;

  /// Throws ConfigInvalid naming the offending field.
  void check() const;
};

DgpConfig dgp_from_json(const nlohmann::json& j);
nlohmann::json to_json(const DgpConfig& cfg);
DgpConfig load_dgp_config(const std::filesystem::path& path);

struct SimulatedTruth {
  PanelDataset data;        // emitted dataset, hidden columns removed
  Matrix delta;             // n x kx
  std::vector<Matrix> beta; // n blocks of T x kx
  std::vector<Matrix> v;    // n blocks of T x kx
  Matrix u;                 // n x T
  Vector eps;               // n
  Matrix h_full;            // n x kh_full
  std::vector<std::string> h_full_names;
  std::vector<std::size_t> hidden_columns;
  Vector kappa_exposed;     // true kappa entries of the emitted H columns
};

/// Draws one panel. Unit i uses its own stream derived from (seed, i), so units do not depend
/// on n or on the order in which they are generated.
SimulatedTruth simulate(const DgpConfig& cfg, std::size_t workers = 1);

/// max_it |Y_it - (sum_k X_itk beta_itk + Z_it gamma + U_it)|.
double reconstruction_error(const SimulatedTruth& truth, const DgpConfig& cfg);

nlohmann::json truth_to_json(const SimulatedTruth& truth, const DgpConfig& cfg);

struct MomentEstimate {
  double value = 0.0;
  double se = 0.0;
};

struct PlimTargets {
  /// Population projection coefficient of delta_i1 on the emitted H columns.
  Vector kappa_tilde;
  Vector kappa_tilde_se;
  std::vector<std::string> labels;
  /// Probability limit of the ITE for kappa_1 in the scalar-X, two-column-H design with the
  /// second column left out. Empty for other designs.
  std::optional<MomentEstimate> ite_plim_kappa1;
  std::map<std::string, MomentEstimate> moments;
  std::size_t draws = 0;
};

/// True when ite_plim_kappa1 has a closed form for this design.
bool supports_ite_plim(const DgpConfig& cfg);

/// Moment oracle on fresh draws that are independent of any estimation sample.
PlimTargets plim_targets(const DgpConfig& cfg, std::size_t draws, std::uint64_t seed,
                         std::size_t workers = 1);

/// kappa_1 + (sum_t E[X^2 H1^2])^{-1} sum_t E[X^2 H1 H2] kappa_2 estimated on fresh draws.
/// Throws ScenarioUnsupported outside the design of supports_ite_plim.
MomentEstimate ite_plim_kappa1(const DgpConfig& cfg, std::size_t draws, std::uint64_t seed,
                               std::size_t workers = 1);

}  // namespace interx
