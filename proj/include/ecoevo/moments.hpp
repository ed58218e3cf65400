#pragma once

#include <cstddef>
#include <vector>

#include "ecoevo/grid.hpp"

namespace ecoevo {

struct MomentRecord {
  double time = 0.0;
  double rho = 0.0;
  double m1 = 0.0;
  double m2c = 0.0;
  double m2k0c = 0.0;
  double m_abs_3 = 0.0;
  double fbar = 0.0;
  double dbar = 0.0;
  double w1_to_gaussian = 0.0;
  double leaked_mass = 0.0;
};

/// Mean trait of a normalized density.
double mean(const DensityState& q);

/// k = 1 returns the mean itself; k >= 2 integrates (x - mean)^k q, or |x - mean|^k q when
/// `absolute` is set.
double central_moment(const DensityState& q, int k, bool absolute = false);

/// Uncentered moment of order k.
double raw_moment(const DensityState& q, int k);

struct QuantileFunction {
  std::vector<double> levels;
  std::vector<double> values;
};

inline constexpr std::size_t kDefaultQuantileLevels = 4096;

/// Quantiles at levels (j + 1/2)/n_levels, by linear inversion of the cumulative trapezoid cdf.
QuantileFunction quantile_function(const DensityState& q,
                                   std::size_t n_levels = kDefaultQuantileLevels);

/// p = 1: trapezoid of |F_a - F_b|. p > 1: L_p distance between quantile functions.
double wasserstein(double p, const DensityState& a, const DensityState& b,
                   std::size_t n_levels = kDefaultQuantileLevels);

/// N(mean, epsilon^2) sampled on the grid and renormalized to unit trapezoid mass.
DensityState gaussian_ansatz(double mean, double epsilon, const Grid1D& grid);

/// Gaussian density with arbitrary standard deviation (same construction).
DensityState gaussian_density(const Grid1D& grid, double mean, double sigma);

/// Fills the moment columns of a record from a normalized density. `k0` sets the order 2 k0.
MomentRecord moment_record(const DensityState& q, double epsilon, int k0 = 2);

}  // namespace ecoevo
