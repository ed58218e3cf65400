#pragma once

#include <functional>
#include <vector>

#include "ecoevo/models.hpp"

namespace ecoevo {

struct TheoryTrajectory {
  std::vector<double> times;
  std::vector<double> zbar_eps;
  std::vector<double> zbar_0;
  std::vector<double> i_of_z;     ///< predator-prey: I(zbar_eps)
  std::vector<double> rho_limit;  ///< single species: (r0 - m0(zbar_0 - X0))/kappa
};

using ScalarField = std::function<double(double t, double z)>;

/// Classical RK4 for z' = rhs(t, z), sampled at `times` (ascending, starting at or after 0).
/// Each sampling interval is split into equal steps no longer than dt.
std::vector<double> integrate_rk4(const ScalarField& rhs, double z0, const std::vector<double>& times,
                                  double dt = 1e-3);

/// Uniform sampling times 0, stride, ..., horizon (horizon always included).
std::vector<double> sample_times(double horizon, double stride);

// ---------------------------------------------------------------------------
// Predator-prey equilibrium manifold

/// Per-capita growth of a population of size I concentrated at x:
///   section5_scheme: r1 + delta(x) - (f(x)^2 + kappa1) I
///   holling_reduced: r1 - (F(x, I, f(x))^e + kappa1 - delta(x)) I
double growth_G(const PredatorPreySpec& spec, double x, double I);
/// Central-difference dG/dI.
double growth_G_dI(const PredatorPreySpec& spec, double x, double I);

struct EquilibriumOptions {
  double tolerance = 1e-12;
  int max_iterations = 200;
  std::size_t scan_points = 1000;
};

/// Positive root of G(x, .). For section5_scheme this is the closed form
/// (r1 + delta)/(f^2 + kappa1); other families go through the root finder.
double solve_equilibrium(const PredatorPreySpec& spec, double x,
                         const EquilibriumOptions& options = {});

/// Bracketed root finder (sign scan, bisection to 1e-6, Newton polish), any family.
double solve_equilibrium_numeric(const PredatorPreySpec& spec, double x,
                                 const EquilibriumOptions& options = {});

struct FixedPointOptions {
  double lo = -2.0;
  double hi = 2.0;
  std::size_t scan_points = 2000;
  double tolerance = 1e-12;
};

struct FixedPoint {
  double x_star = 0.0;
  double i_star = 0.0;
  /// Frozen-coefficient second difference of the effective mortality at x* (must be > 0).
  double convexity = 0.0;
};

/// Effective selection gradient g(x) = selection_gradient(x, I(x)); the autonomous mean-trait
/// equation is z' = -g(z).
double effective_gradient(const PredatorPreySpec& spec, double x);

/// Stable root of the effective gradient. Throws AssumptionError when there is none or when
/// several stable roots exist in the search interval.
FixedPoint find_fixed_point(const PredatorPreySpec& spec, const FixedPointOptions& options = {});

/// Frozen-coefficient second difference of the effective mortality at x, I = I(x), C = f(x).
double convexity_certificate(const PredatorPreySpec& spec, double x, double step = 1e-3);

struct Band {
  double center = 0.0;
  double half_width = 0.0;
  double i_lower = 0.0;  ///< min I over the band
  double i_upper = 0.0;  ///< max I over the band
};

/// Grows |x - x*| < L1 outward until the equilibrium stops being unique and stable or the
/// convexity certificate fails. `limit` caps the half-width.
Band discover_band(const PredatorPreySpec& spec, const FixedPoint& fp, double step = 1e-3,
                   double limit = 2.0);

/// Canonical equations for the predator-prey model: zbar_eps from z_eps0 and zbar_0 from z_00,
/// i_of_z = I(zbar_eps). Leaving the band throws BandExitError.
TheoryTrajectory integrate_canonical(const PredatorPreySpec& spec, const Band& band, double z_eps0,
                                     double z_00, const std::vector<double>& times,
                                     double dt = 1e-3);

// ---------------------------------------------------------------------------
// Single species

/// zbar' = -m'(zbar - X(t)) for both clocks, plus rho_limit.
TheoryTrajectory integrate_canonical(const SingleSpeciesSpec& spec, double z_eps0, double z_00,
                                     const std::vector<double>& times, double dt = 1e-3);

struct LimitingPopulation {
  std::vector<double> rho;
  std::vector<double> nonpositive_times;
};

/// rho(t) = (r0(t) - m0(zbar_0(t) - X0(t)))/kappa at the trajectory samples.
LimitingPopulation limiting_population_single(const SingleSpeciesSpec& spec,
                                              const TheoryTrajectory& traj);

// ---------------------------------------------------------------------------
// Bound functions

struct HbarOptions {
  /// Time step as a fraction of eps^2/eta.
  double relative_step = 5e-4;
  double tolerance = 1e-10;
  int max_iterations = 500;
};

struct HbarSolution {
  std::vector<double> times;
  std::vector<double> values;
  int iterations = 0;
  double sup = 0.0;
  /// sup_t of  int_0^t |X'(s)| exp(-eta (t-s)/eps^2) ds / eps  (must be < L_X)
  double drift_integral = 0.0;
};

/// Picard iteration for
///   H = 1 + exp(-eta t/eps^2) + (eta2/eps^2) int_0^t H^2 e^{-eta(t-s)/eps^2} ds
///         + (eta2/eps) int_0^t H |X'| e^{-eta(t-s)/eps^2} ds
/// on [0, horizon], starting from H = 2.
HbarSolution solve_hbar(double eta, double eta2, double L_X, const std::function<double(double)>& xdot,
                        double epsilon, double horizon, const HbarOptions& options = {});

/// sup_t |H - Map[H]| with the integrals re-evaluated on a grid refined `refine` times,
/// using linear interpolation of H between samples.
double hbar_residual(const HbarSolution& sol, double eta, double eta2,
                     const std::function<double(double)>& xdot, double epsilon, int refine = 4);

struct TrackerSolution {
  std::vector<double> times;
  std::vector<double> y;
};

/// eps^2 y' = alpha(t) (H(t) - y) y by implicit midpoint with a Newton inner solve.
/// dt = 0 picks eps^2/64.
TrackerSolution logistic_tracker(const std::function<double(double)>& alpha,
                                 const std::function<double(double)>& H, double y0, double epsilon,
                                 double horizon, double dt = 0.0);

}  // namespace ecoevo
