#include "ecoevo/models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ecoevo/errors.hpp"

namespace ecoevo {

TraitFunction section5_contact(double floor) {
  return {[floor](double x) { return std::pow(std::max(x, floor), 2); },
          [floor](double x) { return x > floor ? 2.0 * x : 0.0; },
          [floor](double x) { return x > floor ? 2.0 : 0.0; },
          "max(x," + std::to_string(floor) + ")^2"};
}

TraitFunction section5_relief(double cap, double slope) {
  return {[cap, slope](double x) { return slope * std::min(cap, std::max(x, 0.0)); },
          [cap, slope](double x) { return x > 0.0 && x < cap ? slope : 0.0; },
          [](double) { return 0.0; },
          std::to_string(slope) + "*min(" + std::to_string(cap) + ",max(x,0))"};
}

TraitFunction quadratic_function(double c0, double c2) {
  return {[c0, c2](double x) { return c0 + c2 * x * x; },
          [c2](double x) { return 2.0 * c2 * x; },
          [c2](double) { return 2.0 * c2; },
          std::to_string(c0) + "+" + std::to_string(c2) + "*x^2"};
}

TraitFunction constant_function(double c) {
  return {[c](double) { return c; }, [](double) { return 0.0; }, [](double) { return 0.0; },
          std::to_string(c)};
}

double OptimumTrajectory::value(double t) const {
  switch (kind) {
    case OptimumKind::constant:
      return 0.0;
    case OptimumKind::linear_ramp:
      return speed * t;
    case OptimumKind::sinusoidal:
      return amplitude * std::sin(2.0 * std::numbers::pi * t / period);
  }
  return 0.0;
}

double OptimumTrajectory::derivative(double t) const {
  switch (kind) {
    case OptimumKind::constant:
      return 0.0;
    case OptimumKind::linear_ramp:
      return speed;
    case OptimumKind::sinusoidal: {
      const double w = 2.0 * std::numbers::pi / period;
      return amplitude * w * std::cos(w * t);
    }
  }
  return 0.0;
}

double OptimumTrajectory::derivative_bound() const {
  switch (kind) {
    case OptimumKind::constant:
      return 0.0;
    case OptimumKind::linear_ramp:
      return std::abs(speed);
    case OptimumKind::sinusoidal:
      return std::abs(amplitude) * 2.0 * std::numbers::pi / period;
  }
  return 0.0;
}

double BirthRate::operator()(double t) const {
  if (amplitude == 0.0) return base;
  return base + amplitude * std::sin(2.0 * std::numbers::pi * t / period);
}

double MortalityFamily::value(double y) const {
  y -= center;
  const double y2 = y * y;
  return 0.5 * a * y2 + (kind == MortalityFamilyKind::quadratic_quartic ? 0.25 * b * y2 * y2 : 0.0);
}

double MortalityFamily::d1(double y) const {
  y -= center;
  return a * y + (kind == MortalityFamilyKind::quadratic_quartic ? b * y * y * y : 0.0);
}

double MortalityFamily::d2(double y) const {
  y -= center;
  return a + (kind == MortalityFamilyKind::quadratic_quartic ? 3.0 * b * y * y : 0.0);
}

double MortalityFamily::d3(double y) const {
  y -= center;
  return kind == MortalityFamilyKind::quadratic_quartic ? 6.0 * b * y : 0.0;
}

double eval_mortality_single(const SingleSpeciesSpec& spec, double x, double t) {
  return spec.mortality.value(x - spec.optimum.value(t));
}

double eval_mortality_single_dx(const SingleSpeciesSpec& spec, double x, double t) {
  return spec.mortality.d1(x - spec.optimum.value(t));
}

double holling_response(const PredatorPreySpec& spec, double x, double I, double C) {
  const double den = 1.0 + spec.h * C * I;
  return spec.predation_scale() * spec.contact(x) * C / (den * den);
}

double eval_mortality_prey(const PredatorPreySpec& spec, double x, double rho1, double fbar) {
  switch (spec.family) {
    case PreyMortalityFamily::section5_scheme:
      return rho1 * fbar * spec.contact(x) - spec.relief(x);
    case PreyMortalityFamily::holling_reduced:
      return (holling_response(spec, x, rho1, fbar) - spec.relief(x)) * rho1;
  }
  return 0.0;
}

double eval_mortality_prey_coupled(const PredatorPreySpec& spec, double x, double rho1,
                                   double fbar, double rho2) {
  return spec.contact(x) * rho2 / (1.0 + spec.h * fbar * rho1) - spec.relief(x) * rho1;
}

double quasi_steady_predator(const PredatorPreySpec& spec, double rho1, double fbar) {
  return spec.gamma * fbar * rho1 / (spec.kappa2 * (1.0 + spec.h * fbar * rho1));
}

double predator_rate(const PredatorPreySpec& spec, double rho1, double fbar, double rho2) {
  return (spec.gamma * fbar * rho1 / (1.0 + spec.h * fbar * rho1) - spec.kappa2 * rho2) * rho2;
}

double averaged(const DensityState& q, const std::function<double(double)>& g) {
  std::vector<double> v(q.values.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = g(q.grid.node(i)) * q.values[i];
  return trapezoid(v, q.grid);
}

double averaged_contact(const DensityState& q, const PredatorPreySpec& spec) {
  require_normalized(q);
  return averaged(q, spec.contact.value);
}

double averaged_relief(const DensityState& q, const PredatorPreySpec& spec) {
  require_normalized(q);
  return averaged(q, spec.relief.value);
}

double concentrated_mortality(const PredatorPreySpec& spec, double x, double I) {
  return eval_mortality_prey(spec, x, I, spec.contact(x));
}

double selection_gradient(const PredatorPreySpec& spec, double x, double I) {
  const double C = spec.contact(x);
  switch (spec.family) {
    case PreyMortalityFamily::section5_scheme:
      return I * C * spec.contact.d1(x) - spec.relief.d1(x);
    case PreyMortalityFamily::holling_reduced: {
      const double den = 1.0 + spec.h * C * I;
      return (spec.predation_scale() * spec.contact.d1(x) * C / (den * den) - spec.relief.d1(x)) * I;
    }
  }
  return 0.0;
}

const char* to_string(PreyMortalityFamily f) {
  return f == PreyMortalityFamily::holling_reduced ? "holling_reduced" : "section5_scheme";
}

const char* to_string(OptimumKind k) {
  switch (k) {
    case OptimumKind::constant:
      return "constant";
    case OptimumKind::linear_ramp:
      return "linear_ramp";
    case OptimumKind::sinusoidal:
      return "sinusoidal";
  }
  return "?";
}

const char* to_string(MortalityFamilyKind k) {
  return k == MortalityFamilyKind::quadratic ? "quadratic" : "quadratic_quartic";
}

}  // namespace ecoevo
