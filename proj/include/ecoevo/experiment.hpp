#pragma once

#include <cstdint>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ecoevo/audit.hpp"
#include "ecoevo/scenario.hpp"
#include "ecoevo/stepper.hpp"
#include "ecoevo/theory.hpp"

namespace ecoevo {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitAudit = 3;
inline constexpr int kExitNumerical = 4;
inline constexpr int kExitAcceptance = 5;
inline constexpr int kExitExtinct = 6;

/// Maps a library exception to a CLI exit status.
int exit_code_for(const std::exception& e);

inline const char* kMomentsHeader =
    "time,rho,m1,m2c,m2k0c,m_abs_3,fbar,dbar,w1_to_gaussian,leaked_mass";
inline const char* kTheoryHeader = "time,zbar_eps,zbar_0,i_of_z,rho_limit";
inline const char* kScalingHeader = "epsilon,status,m1_gap,rho_gap,sup_w1,terminal_w1,m2c_gap";

struct RunOutcome {
  SimulationRun run;
  TheoryTrajectory theory;
  AuditReport audit;
};

/// Audit, simulate and integrate the theory for one epsilon.
RunOutcome execute_scenario(const ScenarioConfig& config, double epsilon, bool force = false);

/// Reference trajectories sampled at the run's record times.
TheoryTrajectory theory_for_run(const ScenarioConfig& config, const SimulationRun& run);

struct ScalingRow {
  double epsilon = 0.0;
  std::string status = "ok";
  double m1_gap = 0.0;       ///< |M1 - zbar_eps| at the horizon
  double rho_gap = 0.0;      ///< |rho - I(zbar_eps)| or |rho - rho_limit| at the horizon
  double sup_w1 = 0.0;       ///< sup over t >= eps^1.5 of W1(q, gaussian)
  double terminal_w1 = 0.0;
  double m2c_gap = 0.0;      ///< |M2c - eps^2| at the horizon
  std::string error;
  int exit_code = kExitOk;
};

ScalingRow scaling_row(const RunOutcome& outcome);

/// Runs every epsilon with per-member error isolation. Members run in parallel.
/// When `out` is set, each member writes its run artifacts under out/eps_<value>/.
std::vector<ScalingRow> run_sweep(const ScenarioConfig& config, const std::vector<double>& epsilons,
                                  bool force, const std::optional<std::filesystem::path>& out = {});

/// Least-squares slope of log(value) against log(epsilon) over rows with status ok.
/// Returns nullopt with fewer than two usable rows.
std::optional<double> loglog_slope(const std::vector<ScalingRow>& rows, double ScalingRow::*field);

std::string moments_csv(const SimulationRun& run);
std::string theory_csv(const TheoryTrajectory& theory);
std::string snapshot_csv(const SimulationRun& run, const Snapshot& snap);
std::string scaling_csv(const std::vector<ScalingRow>& rows);
std::string snapshot_filename(double requested_time);

/// Writes moments/theory/snapshot CSVs, plot script, resolved config and manifest.
/// Returns the list of written file names (relative to `dir`).
std::vector<std::string> write_run_artifacts(const std::filesystem::path& dir,
                                             const ScenarioConfig& config, double epsilon,
                                             const RunOutcome& outcome, int threads);

struct CommandOptions {
  std::string config;
  std::string out;
  bool force = false;
  int threads = 0;
  std::optional<std::uint64_t> seed;
};

int cmd_run(const CommandOptions& options);
int cmd_sweep(const CommandOptions& options);
int cmd_audit(const CommandOptions& options);

}  // namespace ecoevo
