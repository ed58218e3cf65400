#pragma once

#include <cmath>
#include <functional>
#include <string>

#include "ecoevo/grid.hpp"

namespace ecoevo {

/// A scalar trait function with its first two derivatives.
struct TraitFunction {
  std::function<double(double)> value;
  std::function<double(double)> d1;
  std::function<double(double)> d2;
  std::string name;

  double operator()(double x) const { return value(x); }
};

/// f(x) = max(x, floor)^2
TraitFunction section5_contact(double floor = 0.1);
/// delta(x) = slope * min(cap, max(x, 0))
TraitFunction section5_relief(double cap = 1.0, double slope = 0.4);
/// c0 + c2 x^2
TraitFunction quadratic_function(double c0, double c2);
TraitFunction constant_function(double c);

enum class OptimumKind { constant, linear_ramp, sinusoidal };

/// Location X(t) of the mortality minimum. All kinds start at 0.
struct OptimumTrajectory {
  OptimumKind kind = OptimumKind::constant;
  double speed = 0.0;       // linear_ramp: X = speed t
  double amplitude = 0.0;   // sinusoidal: X = amplitude sin(2 pi t / period)
  double period = 1.0;

  double value(double t) const;
  double derivative(double t) const;
  /// sup |X'| over all t.
  double derivative_bound() const;
};

/// r(t) = base + amplitude sin(2 pi t / period).
struct BirthRate {
  double base = 1.0;
  double amplitude = 0.0;
  double period = 1.0;

  double operator()(double t) const;
  double lower_bound() const { return base - std::abs(amplitude); }
};

enum class MortalityFamilyKind { quadratic, quadratic_quartic };

/// m(y) = (A/2) u^2 + (B/4) u^4 with u = y - center, y the distance to the optimum.
struct MortalityFamily {
  MortalityFamilyKind kind = MortalityFamilyKind::quadratic;
  double a = 1.0;
  double b = 0.0;
  double center = 0.0;

  double value(double y) const;
  double d1(double y) const;
  double d2(double y) const;
  double d3(double y) const;
  /// Growth exponent p of the third-derivative bound.
  int growth_exponent() const { return 2; }
};

struct SingleSpeciesSpec {
  double epsilon = 0.1;
  BirthRate birth;
  MortalityFamily mortality;
  OptimumTrajectory optimum;
  double kappa = 1.0;
};

enum class PreyMortalityFamily { holling_reduced, section5_scheme };

struct PredatorPreySpec {
  double epsilon = 0.2;
  double r1 = 1.0;
  TraitFunction contact = section5_contact();
  TraitFunction relief = section5_relief();
  double h = 0.0;
  double kappa1 = 1.0;
  double gamma = 1.0;
  double kappa2 = 1.0;
  double tau = 0.0;  // 0 selects the reduced model
  PreyMortalityFamily family = PreyMortalityFamily::section5_scheme;
  /// Power applied to F inside G(x, I).
  double g_exponent = 1.0;

  /// gamma / kappa2: predator density per unit of captured prey at quasi-equilibrium.
  double predation_scale() const { return gamma / kappa2; }
};

/// m(x - X(t)).
double eval_mortality_single(const SingleSpeciesSpec& spec, double x, double t);
double eval_mortality_single_dx(const SingleSpeciesSpec& spec, double x, double t);

/// F(x, I, C) = s f(x) C / (1 + h C I)^2, s = predation_scale().
double holling_response(const PredatorPreySpec& spec, double x, double I, double C);

/// Prey mortality under the reduced model, per family.
double eval_mortality_prey(const PredatorPreySpec& spec, double x, double rho1, double fbar);

/// Prey mortality with an explicit predator density: f(x) rho2 / (1 + h fbar rho1) - delta(x) rho1.
double eval_mortality_prey_coupled(const PredatorPreySpec& spec, double x, double rho1,
                                   double fbar, double rho2);

/// Quasi-steady predator density gamma fbar rho1 / (kappa2 (1 + h fbar rho1)).
double quasi_steady_predator(const PredatorPreySpec& spec, double rho1, double fbar);

/// Right side of tau rho2' = (gamma fbar rho1 / (1 + h fbar rho1) - kappa2 rho2) rho2.
double predator_rate(const PredatorPreySpec& spec, double rho1, double fbar, double rho2);

/// trapezoid(f q).
double averaged_contact(const DensityState& q, const PredatorPreySpec& spec);
/// trapezoid(delta q).
double averaged_relief(const DensityState& q, const PredatorPreySpec& spec);
double averaged(const DensityState& q, const std::function<double(double)>& g);

/// Effective mortality of a population concentrated at x with size I (C = f(x)).
double concentrated_mortality(const PredatorPreySpec& spec, double x, double I);
/// d/dx of the effective mortality at fixed I and C = f(x) frozen:
/// section5: I f f' - delta', holling: (s f' C/(1+hCI)^2 - delta') I.
double selection_gradient(const PredatorPreySpec& spec, double x, double I);

const char* to_string(PreyMortalityFamily f);
const char* to_string(OptimumKind k);
const char* to_string(MortalityFamilyKind k);

}  // namespace ecoevo
