#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ecoevo {

/// Uniform grid on [x_min, x_max] with n_nodes nodes (both ends included).
class Grid1D {
 public:
  Grid1D(double x_min, double x_max, std::size_t n_nodes);

  /// Grid on [-half_width, half_width] with the given spacing; the node count is
  /// rounded so that the spacing divides the interval.
  static Grid1D symmetric(double half_width, double spacing);

  double x_min() const noexcept { return x_min_; }
  double x_max() const noexcept { return x_max_; }
  std::size_t size() const noexcept { return n_nodes_; }
  double spacing() const noexcept { return spacing_; }
  double node(std::size_t i) const noexcept {
    return i + 1 == n_nodes_ ? x_max_ : x_min_ + static_cast<double>(i) * spacing_;
  }
  std::vector<double> nodes() const;

  /// Trapezoid weights: spacing/2 at the two ends, spacing elsewhere.
  std::vector<double> trapezoid_weights() const;

  /// Same interval, spacing halved (2n-1 nodes).
  Grid1D refined() const;

  bool operator==(const Grid1D& other) const noexcept = default;

 private:
  double x_min_;
  double x_max_;
  std::size_t n_nodes_;
  double spacing_;
};

/// Whether a grid function is a probability density (q) or a population density (n).
enum class DensityKind { normalized, population };

struct DensityState {
  Grid1D grid;
  std::vector<double> values;
  double time = 0.0;
  DensityKind kind = DensityKind::population;

  DensityState(Grid1D g, std::vector<double> v, double t = 0.0,
               DensityKind k = DensityKind::population);
};

double trapezoid(std::span<const double> values, const Grid1D& grid);
double trapezoid(const DensityState& state);

/// Rescales to unit trapezoid mass. Throws DegenerateStateError on nonpositive mass.
DensityState normalize(const DensityState& state);
/// In-place variant; returns the mass before rescaling.
double normalize_in_place(std::span<double> values, const Grid1D& grid);

/// Cumulative trapezoid integral. Requires a normalized state (mass 1 within 1e-8).
std::vector<double> cdf(const DensityState& state);

/// Throws ContractError unless the state integrates to one within `tolerance`.
void require_normalized(const DensityState& state, double tolerance = 1e-8);

/// q_i = 1/(2 width) on |x_i - center| < width, zero elsewhere (not renormalized).
DensityState indicator_density(const Grid1D& grid, double center, double width);

}  // namespace ecoevo
