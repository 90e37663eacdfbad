#include <cmath>

#include "interx/error.hpp"
#include "interx/panel.hpp"

namespace interx {

void Dims::check() const {
  if (n < 2) throw InvalidArgument("panel needs at least 2 units, got " + std::to_string(n));
  if (periods < 1) throw InvalidArgument("panel needs at least 1 period");
  if (kx < 1) throw InvalidArgument("panel needs at least one x column");
  if (periods < kx) {
    throw InvalidArgument("T = " + std::to_string(periods) + " is smaller than K_x = " +
                          std::to_string(kx) + "; unit regressions are not identified");
  }
  if (periods * n <= psi_cols()) {
    throw InvalidArgument("n*T must exceed K_x*K_g + K_z");
  }
}

std::vector<std::string> default_names(const std::string& prefix, std::size_t count) {
  std::vector<std::string> names;
  names.reserve(count);
  for (std::size_t k = 1; k <= count; ++k) names.push_back(prefix + std::to_string(k));
  return names;
}

PanelDataset make_panel(const Dims& dims) {
  PanelDataset ds;
  ds.dims = dims;
  const auto t = static_cast<Eigen::Index>(dims.periods);
  ds.y = Matrix::Zero(static_cast<Eigen::Index>(dims.n), t);
  ds.x.assign(dims.n, Matrix::Zero(t, static_cast<Eigen::Index>(dims.kx)));
  ds.g.assign(dims.n, Matrix::Zero(t, static_cast<Eigen::Index>(dims.kg)));
  ds.z.assign(dims.n, Matrix::Zero(t, static_cast<Eigen::Index>(dims.kz)));
  ds.h = Matrix::Zero(static_cast<Eigen::Index>(dims.n), static_cast<Eigen::Index>(dims.kh));
  ds.unit_labels = default_names("", dims.n);
  ds.time_labels = default_names("", dims.periods);
  ds.names = {default_names("x", dims.kx), default_names("g", dims.kg),
              default_names("z", dims.kz), default_names("h", dims.kh)};
  return ds;
}

namespace {

void check_block(const std::vector<Matrix>& blocks, std::size_t n, std::size_t t, std::size_t k,
                 const char* what) {
  if (blocks.size() != n) throw LengthMismatch(std::string(what) + ": wrong number of units");
  for (const auto& b : blocks) {
    if (static_cast<std::size_t>(b.rows()) != t || static_cast<std::size_t>(b.cols()) != k) {
      throw LengthMismatch(std::string(what) + ": block shape does not match dims");
    }
    if (!b.allFinite()) throw InvalidArgument(std::string(what) + ": non-finite entry");
  }
}

}  // namespace

void PanelDataset::check() const {
  const auto& d = dims;
  if (static_cast<std::size_t>(y.rows()) != d.n || static_cast<std::size_t>(y.cols()) != d.periods) {
    throw LengthMismatch("y: shape does not match dims");
  }
  if (!y.allFinite()) throw InvalidArgument("y: non-finite entry");
  check_block(x, d.n, d.periods, d.kx, "x");
  check_block(g, d.n, d.periods, d.kg, "g");
  check_block(z, d.n, d.periods, d.kz, "z");
  if (static_cast<std::size_t>(h.rows()) != d.n || static_cast<std::size_t>(h.cols()) != d.kh) {
    throw LengthMismatch("h: shape does not match dims");
  }
  if (!h.allFinite()) throw InvalidArgument("h: non-finite entry");
  if (unit_labels.size() != d.n || time_labels.size() != d.periods) {
    throw LengthMismatch("label lists do not match dims");
  }
  if (names.x.size() != d.kx || names.g.size() != d.kg || names.z.size() != d.kz ||
      names.h.size() != d.kh) {
    throw LengthMismatch("column names do not match dims");
  }
}

PanelDataset PanelDataset::subset(std::span<const std::size_t> units) const {
  PanelDataset out;
  out.dims = dims;
  out.dims.n = units.size();
  out.y.resize(static_cast<Eigen::Index>(units.size()), y.cols());
  out.h.resize(static_cast<Eigen::Index>(units.size()), h.cols());
  out.x.reserve(units.size());
  out.g.reserve(units.size());
  out.z.reserve(units.size());
  out.unit_labels.reserve(units.size());
  for (std::size_t r = 0; r < units.size(); ++r) {
    const std::size_t i = units[r];
    if (i >= dims.n) throw InvalidArgument("subset: unit index out of range");
    const auto ri = static_cast<Eigen::Index>(r);
    const auto ii = static_cast<Eigen::Index>(i);
    out.y.row(ri) = y.row(ii);
    out.h.row(ri) = h.row(ii);
    out.x.push_back(x[i]);
    out.g.push_back(g[i]);
    out.z.push_back(z[i]);
    out.unit_labels.push_back(unit_labels[i]);
  }
  out.time_labels = time_labels;
  out.names = names;
  return out;
}

PanelDataset PanelDataset::with_intercept_h(const std::string& name) const {
  PanelDataset out = *this;
  out.dims.kh += 1;
  out.h.conservativeResize(Eigen::NoChange, h.cols() + 1);
  out.h.col(h.cols()).setOnes();
  out.names.h.push_back(name);
  return out;
}

}  // namespace interx
