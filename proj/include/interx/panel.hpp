#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "interx/linalg.hpp"

namespace interx {

/// Panel dimensions. `kx` counts regressors whose slopes vary by unit, `kg` time-varying
/// interaction variables, `kz` controls and `kh` time-invariant interaction variables.
struct Dims {
  std::size_t n = 0;
  std::size_t periods = 0;
  std::size_t kx = 0;
  std::size_t kg = 0;
  std::size_t kz = 0;
  std::size_t kh = 0;

  std::size_t psi_cols() const noexcept { return kx * kg + kz; }
  std::size_t psi_tilde_cols() const noexcept { return kh + kx * kg + kz; }

  /// Throws InvalidArgument when the dimensions cannot identify the model.
  void check() const;

  friend bool operator==(const Dims&, const Dims&) = default;
};

struct ColumnNames {
  std::vector<std::string> x;
  std::vector<std::string> g;
  std::vector<std::string> z;
  std::vector<std::string> h;

  friend bool operator==(const ColumnNames&, const ColumnNames&) = default;
};

/// Balanced panel. Per-unit blocks are T x K; H is stored once per unit.
struct PanelDataset {
  Dims dims;
  Matrix y;               // n x T
  std::vector<Matrix> x;  // n blocks of T x kx
  std::vector<Matrix> g;  // n blocks of T x kg
  std::vector<Matrix> z;  // n blocks of T x kz
  Matrix h;               // n x kh
  std::vector<std::string> unit_labels;
  std::vector<std::string> time_labels;
  ColumnNames names;

  /// Verifies shapes against `dims` and that every entry is finite.
  void check() const;

  /// Units in the given order; indices may repeat (bootstrap draws).
  PanelDataset subset(std::span<const std::size_t> units) const;

  /// Copy with a constant column of ones appended to H.
  PanelDataset with_intercept_h(const std::string& name = "h_const") const;

  Vector y_unit(std::size_t i) const { return y.row(static_cast<Eigen::Index>(i)).transpose(); }
};

/// Zero-initialized dataset with default column names x1.., g1.., z1.., h1...
PanelDataset make_panel(const Dims& dims);

std::vector<std::string> default_names(const std::string& prefix, std::size_t count);

// ---------------------------------------------------------------------------
// CSV long format

/// Column mapping for the long CSV format. Empty lists are auto-detected from headers of the
/// form x1, x2, ... (likewise g, z, h), ordered by their numeric suffix.
struct CsvSchema {
  std::string unit = "unit";
  std::string time = "time";
  std::string y = "y";
  std::vector<std::string> x;
  std::vector<std::string> g;
  std::vector<std::string> z;
  std::vector<std::string> h;
};

PanelDataset read_csv(std::istream& in, const CsvSchema& schema = {});
PanelDataset load_csv(const std::filesystem::path& path, const CsvSchema& schema = {});

/// Writes unit,time,y,x..,g..,z..,h.. with 17 significant digits.
void write_csv(const PanelDataset& ds, std::ostream& out);
void write_csv(const PanelDataset& ds, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Assumption checks

inline constexpr double kDefaultHMin = 1e-8;

struct UnitCheck {
  std::string unit;
  double det_x = 0.0;          // det(X_i'X_i)
  double det_x_ratio = 0.0;    // det(X_i'X_i) / prod diag(X_i'X_i), in [0, 1]
  double det_x_minus1 = 1.0;   // det(X_{i,-1}'X_{i,-1}); 1 when kx = 1
  double det_x_minus1_ratio = 1.0;
  bool rank_x_ok = false;
  bool rank_x_minus1_ok = false;
};

/// Scale-free margin of a pooled sample moment matrix: smallest eigenvalue after normalizing
/// its diagonal to one.
struct PooledCheck {
  std::string name;
  double margin = 0.0;
  bool ok = false;
};

struct ValidationReport {
  double h_min = kDefaultHMin;
  std::vector<UnitCheck> units;
  std::vector<std::string> failing_rank_x;
  std::vector<std::string> failing_rank_x_minus1;
  PooledCheck psi{"pooled_rank_psi"};              // (1/n) sum Psi'M Psi
  PooledCheck psi_tilde{"pooled_rank_psi_tilde"};  // (1/n) sum PsiTilde'M_{-1} PsiTilde
  PooledCheck h{"rank_h"};                         // (1/n) sum H'H

  bool units_ok() const noexcept { return failing_rank_x.empty() && failing_rank_x_minus1.empty(); }
  /// Pooled conditions hold on the retained units, so estimation can proceed.
  bool estimable() const noexcept { return psi.ok && psi_tilde.ok && h.ok; }
  /// Every unit and every pooled condition passes.
  bool passed() const noexcept { return units_ok() && estimable(); }
  /// Indices of units whose X_i has full column rank.
  std::vector<std::size_t> retained_units() const;
};

/// Unit-level rank checks use the Hadamard ratio det(A'A) / prod diag(A'A), so `h_min` is
/// relative to the scale of X. Pooled checks are computed over retained units only.
ValidationReport validate(const PanelDataset& ds, double h_min = kDefaultHMin);

// ---------------------------------------------------------------------------
// Derived regressor blocks

struct DerivedRegressors {
  std::vector<Matrix> psi;        // T x (kx*kg + kz): (X_it kron G_it, Z_it)
  std::vector<Matrix> psi_tilde;  // T x (kh + kx*kg + kz): (X_it1 H_i, Psi_it)
  std::vector<Matrix> m;          // residual maker on X_i
  std::vector<Matrix> m_minus1;   // residual maker on X_i without its first column
  std::vector<std::string> psi_labels;
  std::vector<std::string> psi_tilde_labels;
};

Matrix build_psi(const PanelDataset& ds, std::size_t unit);
Matrix build_psi_tilde(const PanelDataset& ds, std::size_t unit, const Matrix& psi);

/// Throws RankDeficient carrying the unit label when a residual maker cannot be formed.
DerivedRegressors build_regressors(const PanelDataset& ds);

}  // namespace interx
