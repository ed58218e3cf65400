#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "ecoevo/grid.hpp"

namespace ecoevo {

/// Offspring segregation kernel Gamma_eps(x) = exp(-x^2/eps^2) / (eps sqrt(pi)).
class SegregationKernel {
 public:
  explicit SegregationKernel(double epsilon);

  double epsilon() const noexcept { return epsilon_; }
  double operator()(double x) const noexcept;
  double variance() const noexcept { return 0.5 * epsilon_ * epsilon_; }
  /// Beyond this distance the reference path treats the kernel as zero.
  double truncation_radius() const noexcept { return 8.0 * epsilon_; }
  /// Raw moment E[Z^order] of the kernel; zero for odd orders, sigma_l eps^{2l} for order 2l.
  double moment(int order) const noexcept;

 private:
  double epsilon_;
  double normalizer_;
};

/// Law of the parental midpoint (Y+Y')/2, sampled on the half-spacing refinement
/// of the parent grid (midpoints of grid nodes all fall on that refinement).
struct MidpointDensity {
  Grid1D grid;
  std::vector<double> values;
};

MidpointDensity midpoint_density(const DensityState& q);

struct ReproductionResult {
  DensityState offspring;       ///< renormalized to unit mass
  std::vector<double> raw;      ///< before renormalization
  double leaked_mass = 0.0;     ///< 1 - trapezoid(raw): kernel mass lost past the domain ends
  bool boundary_warning = false;
};

/// Leak above which a boundary warning is raised.
inline constexpr double kBoundaryLeakThreshold = 1e-10;

enum class ReproductionMethod { reference, direct, fft };

/// Nested quadrature of  sum_i sum_j w_i q_i w_j q_j Gamma(x_k - (x_i + x_j)/2), serial,
/// O(N^3). Kept as the oracle for the other two kernels.
ReproductionResult reproduce_reference(const DensityState& q, const SegregationKernel& kernel);

/// Same sum factored through the midpoint masses and evaluated as two direct O(N^2)
/// convolutions, OpenMP-parallel over output nodes.
ReproductionResult reproduce_direct(const DensityState& q, const SegregationKernel& kernel);

/// Reusable FFT workspace: the midpoint self-convolution and the kernel convolution are
/// done with one zero-padded real transform of length >= 4N-3.
class FastReproducer {
 public:
  /// transform_size == 0 picks the smallest 2^a 3^b 5^c length that avoids wrap-around;
  /// an explicit size below 4N-3 throws ConfigError.
  FastReproducer(const Grid1D& grid, const SegregationKernel& kernel, std::size_t transform_size = 0);
  ~FastReproducer();
  FastReproducer(FastReproducer&&) noexcept;
  FastReproducer& operator=(FastReproducer&&) noexcept;
  FastReproducer(const FastReproducer&) = delete;
  FastReproducer& operator=(const FastReproducer&) = delete;

  static std::size_t minimum_transform_size(std::size_t n_nodes) noexcept { return 4 * n_nodes - 3; }
  std::size_t transform_size() const noexcept;

  /// Writes the raw offspring density for a normalized q; returns the leaked mass.
  double apply(std::span<const double> q, std::span<double> raw);
  ReproductionResult apply(const DensityState& q);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

ReproductionResult reproduce_fast(const DensityState& q, const SegregationKernel& kernel);

/// Method-agnostic front end used by the time stepper.
class Reproducer {
 public:
  Reproducer(const Grid1D& grid, const SegregationKernel& kernel, ReproductionMethod method);

  /// raw <- T~[q] before renormalization; returns the leaked mass.
  double apply(std::span<const double> q, std::span<double> raw);
  ReproductionMethod method() const noexcept { return method_; }
  const SegregationKernel& kernel() const noexcept { return kernel_; }

 private:
  Grid1D grid_;
  SegregationKernel kernel_;
  ReproductionMethod method_;
  std::unique_ptr<FastReproducer> fast_;
};

/// T_eps[n] = rho T~[n/rho] with rho = trapezoid(n). Not renormalized: the output mass is
/// rho times (1 - leaked mass).
DensityState reproduce_unnormalized(const DensityState& n, const SegregationKernel& kernel,
                                    ReproductionMethod method = ReproductionMethod::fft);

/// Central moment of order 2k of T~[q] expressed through the central moments of q:
///   (2/4^k) M_2k + sum_{l<k} sum_{j<=2l} s_{k-l} eps^{2(k-l)} 4^-l C(2k,2l) C(2l,j) M_{2l-j} M_j
///   + sum_{j=2}^{2k-2} 4^-k C(2k,j) M_{2k-j} M_j
/// where s_m eps^{2m} is the 2m-th kernel moment. central[j] must hold M_j for j <= 2k
/// (central[0] = 1, central[1] = 0).
double reproduced_even_central_moment(int k, double epsilon, std::span<const double> central);

}  // namespace ecoevo
