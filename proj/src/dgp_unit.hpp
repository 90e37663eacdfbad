#pragma once

#include "interx/dgp.hpp"
#include "interx/rng.hpp"

namespace interx::detail {

/// Everything drawn for one unit, before hidden columns are removed.
struct UnitDraw {
  Vector h_full;
  Vector h_emitted;
  double eps = 0.0;
  Vector delta;  // kx
  Matrix x;      // T x kx
  Matrix g;      // T x kg
  Matrix z;      // T x kz
  Matrix v;      // T x kx
  Matrix beta;   // T x kx
  Vector u;      // T
  Vector y;      // T
};

UnitDraw draw_unit(const DgpConfig& cfg, Rng& rng);

inline std::uint64_t unit_seed(std::uint64_t seed, std::size_t unit) {
  return derive_seed({seed, static_cast<std::uint64_t>(unit)});
}

}  // namespace interx::detail
