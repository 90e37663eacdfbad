#pragma once

#include <random>

#include "interx/dgp.hpp"
#include "interx/linalg.hpp"
#include "interx/panel.hpp"
#include "interx/rng.hpp"

namespace interx::test {

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  return m;
}

inline Vector random_vector(Eigen::Index n, Rng& rng) { return random_matrix(n, 1, rng).col(0); }

/// Gaussian panel with Y drawn independently of everything else. When `constant_x2` is set the
/// second X column is 1.
inline PanelDataset random_panel(const Dims& dims, std::uint64_t seed, bool constant_x2 = false) {
  Rng rng(seed);
  PanelDataset ds = make_panel(dims);
  const auto t = static_cast<Eigen::Index>(dims.periods);
  for (std::size_t i = 0; i < dims.n; ++i) {
    ds.x[i] = random_matrix(t, static_cast<Eigen::Index>(dims.kx), rng);
    if (constant_x2) ds.x[i].col(1).setOnes();
    ds.g[i] = random_matrix(t, static_cast<Eigen::Index>(dims.kg), rng);
    ds.z[i] = random_matrix(t, static_cast<Eigen::Index>(dims.kz), rng);
  }
  ds.h = random_matrix(static_cast<Eigen::Index>(dims.n), static_cast<Eigen::Index>(dims.kh), rng);
  ds.y = random_matrix(static_cast<Eigen::Index>(dims.n), t, rng);
  return ds;
}

/// Normal equations solved with a full-pivot LU; deliberately not the QR path of the library.
inline Vector normal_equations(const Matrix& a, const Vector& b) {
  return (a.transpose() * a).fullPivLu().solve(a.transpose() * b);
}

/// One pooled OLS of Y on {unit dummies x X columns, Psi columns}. Coefficients are ordered
/// (delta_1 .. delta_n, theta), each delta_i a block of kx.
inline Vector dummy_variable_ols(const PanelDataset& ds) {
  const auto& d = ds.dims;
  const auto t = static_cast<Eigen::Index>(d.periods);
  const auto n = static_cast<Eigen::Index>(d.n);
  const auto kx = static_cast<Eigen::Index>(d.kx);
  const auto kpsi = static_cast<Eigen::Index>(d.psi_cols());
  Matrix design = Matrix::Zero(n * t, n * kx + kpsi);
  Vector y(n * t);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& x = ds.x[static_cast<std::size_t>(i)];
    const auto& g = ds.g[static_cast<std::size_t>(i)];
    const auto& z = ds.z[static_cast<std::size_t>(i)];
    for (Eigen::Index s = 0; s < t; ++s) {
      const Eigen::Index r = i * t + s;
      y(r) = ds.y(i, s);
      for (Eigen::Index k = 0; k < kx; ++k) design(r, i * kx + k) = x(s, k);
      Eigen::Index c = n * kx;
      for (Eigen::Index k = 0; k < kx; ++k)
        for (Eigen::Index m = 0; m < g.cols(); ++m) design(r, c++) = x(s, k) * g(s, m);
      for (Eigen::Index m = 0; m < z.cols(); ++m) design(r, c++) = z(s, m);
    }
  }
  return normal_equations(design, y);
}

/// Zero-noise config with every block present; used by several suites.
inline DgpConfig noiseless_config() {
  DgpConfig c;
  c.n = 40;
  c.periods = 5;
  c.kx = 2;
  c.kg = 1;
  c.kz = 1;
  c.h_mean = {1.0, 0.3};
  c.h_sd = {0.0, 1.0};
  c.h_factor_loading = {0.0, 0.0};
  c.kappa = {0.7, -1.3};
  c.phi = Matrix(2, 1);
  c.phi << 0.4, -0.2;
  c.gamma = {2.5};
  c.delta_other_sd = 1.0;
  c.u_sd = 0.0;
  c.v_sd = 0.0;
  c.eps_sd = 0.0;
  c.seed = 99;
  return c;
}

}  // namespace interx::test
