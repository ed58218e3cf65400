#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ecoevo/stepper.hpp"

namespace ecoevo {

/// Trait-function choice as written in a scenario file.
struct TraitFunctionConfig {
  std::string kind;  ///< section5 | quadratic | constant
  double c0 = 0.0;
  double c2 = 0.0;
  double floor = 0.1;  ///< contact: max(x, floor)^2
  double slope = 0.4;  ///< relief: slope * min(kappa1, max(x, 0))
};

/// One scenario file, defaults applied. Epsilon-dependent quantities are resolved per epsilon.
struct ScenarioConfig {
  std::string name = "scenario";
  ModelKind model = ModelKind::predator_prey_reduced;
  double epsilon = 0.2;
  std::uint64_t seed = 20240501;

  double half_width = 2.0;
  double spacing = 0.02;

  SchemeConfig scheme;

  // predator-prey
  PreyMortalityFamily family = PreyMortalityFamily::section5_scheme;
  double r1 = 1.0;
  double h = 0.0;
  double kappa1 = 1.0;
  double gamma = 1.0;
  double kappa2 = 1.0;
  double tau = 0.0;
  double tau_eps_power = 0.0;  ///< if > 0, tau = eps^power (overrides tau)
  double g_exponent = 1.0;
  TraitFunctionConfig contact{"section5"};
  TraitFunctionConfig relief{"section5"};

  // single species
  BirthRate birth;
  MortalityFamily mortality;
  OptimumTrajectory optimum;
  double kappa = 1.0;

  // initial condition: center = center_base + center_eps_factor * eps, same for width
  InitialKind initial_kind = InitialKind::indicator;
  double center_base = 0.8;
  double center_eps_factor = 0.5;
  double width_base = 0.0;
  double width_eps_factor = 1.0;
  double rho0 = 0.0;
  double rho2_0 = 0.0;

  std::vector<double> epsilons;

  double theory_dt = 1e-3;
  double theory_stride = 0.0;  ///< 0 uses the simulation record times
  double audit_window = 1.0;
  double L_X = 1.0;

  std::string output_directory;

  Grid1D grid() const;
  ModelSpec model_spec(double eps) const;
  InitialCondition initial(double eps) const;
  AuditOptions audit_options() const;
};

/// Parses an INI scenario file. Unknown sections or keys, malformed numbers and invalid
/// enumerations throw ConfigError.
ScenarioConfig load_scenario(const std::filesystem::path& path);
ScenarioConfig parse_scenario(const std::string& text, const std::string& origin = "<string>");

/// The resolved configuration (every key, defaults applied) in the same INI format.
std::string to_ini(const ScenarioConfig& config);

/// Directory holding the bundled scenario files.
std::filesystem::path scenario_directory();
/// Bundled scenario names (file stems), sorted.
std::vector<std::string> list_scenarios(const std::filesystem::path& dir = scenario_directory());
/// Accepts a path or a bundled scenario name.
std::filesystem::path resolve_scenario_path(const std::string& name_or_path);

}  // namespace ecoevo
