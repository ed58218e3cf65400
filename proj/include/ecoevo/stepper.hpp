#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "ecoevo/audit.hpp"
#include "ecoevo/grid.hpp"
#include "ecoevo/models.hpp"
#include "ecoevo/moments.hpp"
#include "ecoevo/reproduction.hpp"

namespace ecoevo {

enum class ModelKind { single_species, predator_prey_reduced, predator_prey_coupled };

struct ModelSpec {
  ModelKind kind = ModelKind::predator_prey_reduced;
  SingleSpeciesSpec single;
  PredatorPreySpec prey;

  double epsilon() const { return kind == ModelKind::single_species ? single.epsilon : prey.epsilon; }
  bool is_predator_prey() const { return kind != ModelKind::single_species; }
};

/// q-mode evolves the normalized trait density plus rho; n-mode evolves the population density.
enum class StateMode { normalized, population };

/// Population sizes at or below this level end the run with status "extinct".
inline constexpr double kExtinctionLevel = 1e-12;

struct SchemeConfig {
  double dt = 0.0;            ///< 0 selects eps^2 / 2
  std::size_t n_steps = 0;    ///< 0 selects ceil(horizon / dt)
  double horizon = 16.0;
  StateMode mode = StateMode::normalized;
  bool renormalize_each_step = true;
  std::size_t record_stride = 1;
  double safety_factor = 1.0;
  bool allow_unsafe_dt = false;
  ReproductionMethod method = ReproductionMethod::fft;
  int k0 = 2;
  std::vector<double> snapshot_times{2.0, 16.0};

  /// Resolved values for a given epsilon; throws ConfigError when dt breaks the stability guard.
  double resolved_dt(double epsilon) const;
  std::size_t resolved_steps(double epsilon) const;
};

enum class InitialKind { indicator, gaussian };

struct InitialCondition {
  InitialKind kind = InitialKind::indicator;
  double center = 0.9;
  double width = 0.2;   ///< indicator half-width or Gaussian standard deviation
  double rho0 = 0.0;    ///< 0 selects I(center) (predator-prey) or the logistic level (single)
  double rho2_0 = 0.0;  ///< 0 selects the quasi-steady predator density
};

struct Snapshot {
  double time = 0.0;
  std::vector<double> density;
  std::vector<double> mortality;
};

struct SimulationRun {
  SimulationRun(ModelSpec s, SchemeConfig sc, DensityState st)
      : spec(std::move(s)), scheme(std::move(sc)), state(std::move(st)) {}

  ModelSpec spec;
  SchemeConfig scheme;
  DensityState state;   ///< q in q-mode, n in n-mode
  double rho = 0.0;
  double rho2 = 0.0;    ///< coupled mode only
  double dt = 0.0;
  std::size_t step_index = 0;
  std::vector<MomentRecord> records;
  std::vector<Snapshot> snapshots;
  std::string status = "ok";  ///< "ok" or "extinct"
  double last_leak = 0.0;
  double max_leak = 0.0;
  double max_mass_defect = 0.0;
  std::size_t boundary_warnings = 0;
  double wall_seconds = 0.0;
  std::shared_ptr<Reproducer> reproducer;

  double time() const { return state.time; }
  /// Normalized view of the state.
  DensityState trait_density() const;
};

/// Builds the initial state and the reproduction workspace.
SimulationRun initialize_run(const ModelSpec& spec, const SchemeConfig& scheme, const Grid1D& grid,
                             const InitialCondition& initial);

/// Per-capita mortality profile at the current state (excluding the kappa rho competition).
std::vector<double> mortality_profile(const SimulationRun& run);

/// One explicit step of the single-species model.
void step_single(SimulationRun& run);
/// One explicit step of the reduced or coupled predator-prey model.
void step_prey_predator(SimulationRun& run);

/// Appends the diagnostics record for the current state.
void record_moments(SimulationRun& run);

struct RunOptions {
  bool force = false;  ///< run even when the hypothesis audit fails
  AuditOptions audit;
};

/// Audits the scenario, then steps to the horizon recording diagnostics and snapshots.
/// An audit failure without `force` throws AuditError.
SimulationRun run_to_horizon(const ModelSpec& spec, const SchemeConfig& scheme, const Grid1D& grid,
                             const InitialCondition& initial, const RunOptions& options = {});

/// Hypothesis audit for either model kind.
AuditReport audit_model(const ModelSpec& spec, const AuditOptions& options);

const char* to_string(ModelKind k);

}  // namespace ecoevo
