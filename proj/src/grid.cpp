#include "ecoevo/grid.hpp"

#include <cmath>
#include <string>

#include "ecoevo/errors.hpp"

namespace ecoevo {

Grid1D::Grid1D(double x_min, double x_max, std::size_t n_nodes)
    : x_min_(x_min), x_max_(x_max), n_nodes_(n_nodes), spacing_(0.0) {
  if (n_nodes < 3) throw ConfigError("Grid1D needs at least 3 nodes");
  if (!(x_max > x_min)) throw ConfigError("Grid1D needs x_max > x_min");
  spacing_ = (x_max - x_min) / static_cast<double>(n_nodes - 1);
}

Grid1D Grid1D::symmetric(double half_width, double spacing) {
  if (!(half_width > 0.0) || !(spacing > 0.0)) {
    throw ConfigError("symmetric grid needs positive half-width and spacing");
  }
  const auto intervals = static_cast<std::size_t>(std::llround(2.0 * half_width / spacing));
  return Grid1D(-half_width, half_width, intervals + 1);
}

std::vector<double> Grid1D::nodes() const {
  std::vector<double> x(n_nodes_);
  for (std::size_t i = 0; i < n_nodes_; ++i) x[i] = node(i);
  return x;
}

std::vector<double> Grid1D::trapezoid_weights() const {
  std::vector<double> w(n_nodes_, spacing_);
  w.front() = w.back() = 0.5 * spacing_;
  return w;
}

Grid1D Grid1D::refined() const { return Grid1D(x_min_, x_max_, 2 * n_nodes_ - 1); }

DensityState::DensityState(Grid1D g, std::vector<double> v, double t, DensityKind k)
    : grid(g), values(std::move(v)), time(t), kind(k) {
  if (values.size() != grid.size()) {
    throw ContractError("DensityState: " + std::to_string(values.size()) +
                        " values for a grid of " + std::to_string(grid.size()) + " nodes");
  }
}

double trapezoid(std::span<const double> values, const Grid1D& grid) {
  if (values.size() != grid.size()) {
    throw ContractError("trapezoid: length " + std::to_string(values.size()) +
                        " does not match grid size " + std::to_string(grid.size()));
  }
  double interior = 0.0;
  for (std::size_t i = 1; i + 1 < values.size(); ++i) interior += values[i];
  return grid.spacing() * (interior + 0.5 * (values.front() + values.back()));
}

double trapezoid(const DensityState& state) { return trapezoid(state.values, state.grid); }

double normalize_in_place(std::span<double> values, const Grid1D& grid) {
  const double mass = trapezoid(values, grid);
  if (!(mass > 0.0) || !std::isfinite(mass)) {
    throw DegenerateStateError("cannot normalize a density with mass " + std::to_string(mass));
  }
  for (double& v : values) v /= mass;
  return mass;
}

DensityState normalize(const DensityState& state) {
  DensityState out = state;
  normalize_in_place(out.values, out.grid);
  out.kind = DensityKind::normalized;
  return out;
}

void require_normalized(const DensityState& state, double tolerance) {
  const double mass = trapezoid(state);
  if (std::abs(mass - 1.0) > tolerance) {
    throw ContractError("expected a normalized density, got mass " + std::to_string(mass));
  }
}

std::vector<double> cdf(const DensityState& state) {
  require_normalized(state);
  const auto& v = state.values;
  const double half_h = 0.5 * state.grid.spacing();
  std::vector<double> c(v.size(), 0.0);
  for (std::size_t i = 1; i < v.size(); ++i) c[i] = c[i - 1] + half_h * (v[i - 1] + v[i]);
  return c;
}

DensityState indicator_density(const Grid1D& grid, double center, double width) {
  std::vector<double> v(grid.size(), 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (std::abs(grid.node(i) - center) < width) v[i] = 0.5 / width;
  }
  return DensityState(grid, std::move(v), 0.0, DensityKind::normalized);
}

}  // namespace ecoevo
