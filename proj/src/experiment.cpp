#include "ecoevo/experiment.hpp"

#include <fftw3.h>
#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <limits>
#include <nlohmann/json.hpp>
#include <sstream>

#include "ecoevo/errors.hpp"

namespace ecoevo {

namespace fs = std::filesystem;

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const ContractError*>(&e)) return kExitConfig;
  if (dynamic_cast<const AuditError*>(&e) || dynamic_cast<const AssumptionError*>(&e)) return kExitAudit;
  if (dynamic_cast<const ExtinctionError*>(&e)) return kExitExtinct;
  return kExitNumerical;
}

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const char* status_for(int code) {
  switch (code) {
    case kExitConfig:
      return "config_error";
    case kExitAudit:
      return "audit_failed";
    case kExitExtinct:
      return "extinct";
    default:
      return "numerical_error";
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string plot_script(const std::vector<std::pair<double, std::string>>& snapshots) {
  std::ostringstream py;
  py << R"PY(#!/usr/bin/env python3
"""Render density/mortality snapshots and mean-trait/population trajectories from this run."""
import csv
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__))
SNAPSHOTS = [
)PY";
  for (const auto& [t, name] : snapshots) py << "    (" << num(t) << ", \"" << name << "\"),\n";
  py << R"PY(]


def read(name):
    with open(os.path.join(HERE, name), newline="") as fh:
        rows = list(csv.DictReader(fh))
    return {k: [float(r[k]) for r in rows] for k in rows[0]} if rows else {}


def densities():
    if not SNAPSHOTS:
        return
    fig, axes = plt.subplots(1, len(SNAPSHOTS), figsize=(5 * len(SNAPSHOTS), 4), squeeze=False)
    for ax, (t, name) in zip(axes[0], SNAPSHOTS):
        d = read(name)
        ax.fill_between(d["x"], d["q"], color="gold", alpha=0.7, label="q")
        ax.set_xlabel("trait x")
        ax.set_ylabel("density")
        ax.set_title("t = %g" % t)
        twin = ax.twinx()
        twin.plot(d["x"], d["mortality"], color="black", label="mortality")
        twin.set_ylabel("mortality")
    fig.tight_layout()
    fig.savefig(os.path.join(HERE, "densities.png"), dpi=150)


def trajectories():
    m = read("moments.csv")
    th = read("theory.csv")
    fig, (a, b) = plt.subplots(1, 2, figsize=(10, 4))
    a.plot(m["time"], m["m1"], color="tab:blue", label="M1")
    a.plot(th["time"], th["zbar_eps"], color="tab:red", label="zbar_eps")
    a.plot(th["time"], th["zbar_0"], color="black", ls="--", label="zbar_0")
    a.set_xlabel("t")
    a.set_ylabel("mean trait")
    a.legend()
    b.plot(m["time"], m["rho"], color="tab:blue", label="rho")
    if any(v == v for v in th["i_of_z"]):
        b.plot(th["time"], th["i_of_z"], color="tab:orange", label="I(zbar_eps)")
    b.plot(th["time"], th["rho_limit"], color="black", ls="--", label="limit")
    b.set_xlabel("t")
    b.set_ylabel("population")
    b.legend()
    fig.tight_layout()
    fig.savefig(os.path.join(HERE, "trajectories.png"), dpi=150)


if __name__ == "__main__":
    densities()
    trajectories()
)PY";
  return py.str();
}

}  // namespace

TheoryTrajectory theory_for_run(const ScenarioConfig& config, const SimulationRun& run) {
  std::vector<double> times;
  if (config.theory_stride > 0.0) {
    times = sample_times(run.time(), config.theory_stride);
  } else {
    for (const auto& r : run.records) times.push_back(r.time);
  }
  const double z_eps0 = run.records.front().m1;
  const double z_00 = config.center_base;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (run.spec.is_predator_prey()) {
    FixedPointOptions fo;
    fo.lo = -config.half_width;
    fo.hi = config.half_width;
    const FixedPoint fp = find_fixed_point(run.spec.prey, fo);
    const Band band = discover_band(run.spec.prey, fp);
    auto traj = integrate_canonical(run.spec.prey, band, z_eps0, z_00, times, config.theory_dt);
    for (double z : traj.zbar_0) traj.rho_limit.push_back(solve_equilibrium(run.spec.prey, z));
    return traj;
  }
  auto traj = integrate_canonical(run.spec.single, z_eps0, z_00, times, config.theory_dt);
  traj.i_of_z.assign(times.size(), nan);
  return traj;
}

RunOutcome execute_scenario(const ScenarioConfig& config, double epsilon, bool force) {
  const ModelSpec spec = config.model_spec(epsilon);
  const Grid1D grid = config.grid();
  const InitialCondition initial = config.initial(epsilon);
  RunOptions options;
  options.force = force;
  options.audit = config.audit_options();
  AuditOptions ao = options.audit;
  ao.initial_mean = initial.center;
  AuditReport audit = audit_model(spec, ao);
  SimulationRun run = run_to_horizon(spec, config.scheme, grid, initial, options);
  TheoryTrajectory theory;
  try {
    theory = theory_for_run(config, run);
  } catch (const AssumptionError&) {
    if (!force) throw;
  }
  return {std::move(run), std::move(theory), std::move(audit)};
}

ScalingRow scaling_row(const RunOutcome& o) {
  ScalingRow row;
  const auto& run = o.run;
  const double eps = run.spec.epsilon();
  row.epsilon = eps;
  row.status = run.status;
  if (run.records.empty()) return row;
  const auto& last = run.records.back();
  if (!o.theory.zbar_eps.empty()) {
    row.m1_gap = std::abs(last.m1 - o.theory.zbar_eps.back());
    row.rho_gap = run.spec.is_predator_prey() ? std::abs(last.rho - o.theory.i_of_z.back())
                                              : std::abs(last.rho - o.theory.rho_limit.back());
  } else {
    row.m1_gap = row.rho_gap = std::numeric_limits<double>::quiet_NaN();
  }
  const double t_min = std::pow(eps, 1.5);
  for (const auto& r : run.records) {
    if (r.time >= t_min) row.sup_w1 = std::max(row.sup_w1, r.w1_to_gaussian);
  }
  row.terminal_w1 = last.w1_to_gaussian;
  row.m2c_gap = std::abs(last.m2c - eps * eps);
  if (run.status == "extinct") row.exit_code = kExitExtinct;
  return row;
}

std::string moments_csv(const SimulationRun& run) {
  std::string s = std::string(kMomentsHeader) + "\n";
  for (const auto& r : run.records) {
    s += num(r.time) + "," + num(r.rho) + "," + num(r.m1) + "," + num(r.m2c) + "," + num(r.m2k0c) + "," +
         num(r.m_abs_3) + "," + num(r.fbar) + "," + num(r.dbar) + "," + num(r.w1_to_gaussian) + "," +
         num(r.leaked_mass) + "\n";
  }
  return s;
}

std::string theory_csv(const TheoryTrajectory& th) {
  std::string s = std::string(kTheoryHeader) + "\n";
  const double nan = std::numeric_limits<double>::quiet_NaN();
  auto at = [nan](const std::vector<double>& v, std::size_t i) { return i < v.size() ? v[i] : nan; };
  for (std::size_t i = 0; i < th.times.size(); ++i) {
    s += num(th.times[i]) + "," + num(at(th.zbar_eps, i)) + "," + num(at(th.zbar_0, i)) + "," +
         num(at(th.i_of_z, i)) + "," + num(at(th.rho_limit, i)) + "\n";
  }
  return s;
}

std::string snapshot_csv(const SimulationRun& run, const Snapshot& snap) {
  std::string s = "x,q,mortality\n";
  const auto& g = run.state.grid;
  for (std::size_t i = 0; i < g.size(); ++i) {
    s += num(g.node(i)) + "," + num(snap.density[i]) + "," + num(snap.mortality[i]) + "\n";
  }
  return s;
}

std::string snapshot_filename(double requested_time) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "density_t%g.csv", requested_time);
  return buf;
}

std::optional<double> loglog_slope(const std::vector<ScalingRow>& rows, double ScalingRow::*field) {
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& r : rows) {
    const double v = r.*field;
    if (r.status != "ok" || !(v > 0.0) || !std::isfinite(v)) continue;
    xs.push_back(std::log(r.epsilon));
    ys.push_back(std::log(v));
  }
  if (xs.size() < 2) return std::nullopt;
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double den = n * sxx - sx * sx;
  if (den == 0.0) return std::nullopt;
  return (n * sxy - sx * sy) / den;
}

std::string scaling_csv(const std::vector<ScalingRow>& rows) {
  std::string s = std::string(kScalingHeader) + "\n";
  for (const auto& r : rows) {
    s += num(r.epsilon) + "," + r.status + "," + num(r.m1_gap) + "," + num(r.rho_gap) + "," + num(r.sup_w1) +
         "," + num(r.terminal_w1) + "," + num(r.m2c_gap) + "\n";
  }
  const auto m1 = loglog_slope(rows, &ScalingRow::m1_gap);
  if (m1) {
    auto slope = [&](double ScalingRow::*f) {
      const auto v = loglog_slope(rows, f);
      return v ? num(*v) : std::string("nan");
    };
    s += "slope,fit," + slope(&ScalingRow::m1_gap) + "," + slope(&ScalingRow::rho_gap) + "," +
         slope(&ScalingRow::sup_w1) + "," + slope(&ScalingRow::terminal_w1) + "," +
         slope(&ScalingRow::m2c_gap) + "\n";
  }
  return s;
}

std::vector<std::string> write_run_artifacts(const fs::path& dir, const ScenarioConfig& config,
                                             double epsilon, const RunOutcome& o, int threads) {
  fs::create_directories(dir);
  std::vector<std::string> files;
  auto emit = [&](const std::string& name, const std::string& text) {
    write_text(dir / name, text);
    files.push_back(name);
  };
  emit("moments.csv", moments_csv(o.run));
  std::vector<std::pair<double, std::string>> snaps;
  for (double T : config.scheme.snapshot_times) {
    for (const auto& s : o.run.snapshots) {
      if (std::abs(s.time - T) <= 0.5 * o.run.dt) {
        const auto name = snapshot_filename(T);
        emit(name, snapshot_csv(o.run, s));
        snaps.emplace_back(T, name);
        break;
      }
    }
  }
  emit("theory.csv", theory_csv(o.theory));
  emit("plot_figures.py", plot_script(snaps));
  ScenarioConfig resolved = config;
  resolved.epsilon = epsilon;
  resolved.scheme.dt = o.run.dt;
  resolved.scheme.n_steps = config.scheme.resolved_steps(epsilon);
  resolved.tau = o.run.spec.prey.tau;
  resolved.tau_eps_power = 0.0;
  const InitialCondition ic = config.initial(epsilon);
  resolved.center_base = ic.center;
  resolved.center_eps_factor = 0.0;
  resolved.width_base = ic.width;
  resolved.width_eps_factor = 0.0;
  resolved.rho0 = o.run.records.empty() ? ic.rho0 : o.run.records.front().rho;
  resolved.epsilons = {epsilon};
  resolved.output_directory = dir.string();
  emit("resolved_config.ini", to_ini(resolved));

  nlohmann::json m;
  m["scenario"] = config.name;
  m["model"] = to_string(o.run.spec.kind);
  m["epsilon"] = epsilon;
  m["seed"] = config.seed;
  m["threads"] = threads > 0 ? threads : omp_get_max_threads();
  m["resolved_config"] = to_ini(resolved);
  files.push_back("manifest.json");
  m["files"] = files;
  m["snapshots"] = nlohmann::json::array();
  for (const auto& [t, name] : snaps) m["snapshots"].push_back({{"time", t}, {"file", name}});
  nlohmann::json audit = nlohmann::json::array();
  for (const auto& c : o.audit.checks) {
    audit.push_back({{"name", c.name}, {"passed", c.passed}, {"margin", c.margin}, {"detail", c.detail}});
  }
  m["audit"] = {{"passed", o.audit.passed()}, {"eta", o.audit.eta}, {"checks", audit}};
  if (o.audit.fixed_point) {
    m["audit"]["x_star"] = o.audit.fixed_point->x_star;
    m["audit"]["i_star"] = o.audit.fixed_point->i_star;
  }
  if (o.audit.band) m["audit"]["band_half_width"] = o.audit.band->half_width;
  m["run"] = {{"status", o.run.status},
              {"steps", o.run.step_index},
              {"dt", o.run.dt},
              {"final_time", o.run.time()},
              {"wall_seconds", o.run.wall_seconds},
              {"max_leaked_mass", o.run.max_leak},
              {"boundary_warnings", o.run.boundary_warnings},
              {"max_mass_defect", o.run.max_mass_defect}};
  if (o.run.spec.is_predator_prey()) {
    m["run"]["kappa1"] = o.run.spec.prey.kappa1;
    m["run"]["h"] = o.run.spec.prey.h;
    m["run"]["mortality_family"] = to_string(o.run.spec.prey.family);
  }
  m["versions"] = {{"ecoevo", "0.1.0"}, {"fftw", std::string(fftw_version)}, {"compiler", std::string(__VERSION__)}};
  m["created_utc"] = utc_timestamp();
  write_text(dir / "manifest.json", m.dump(2) + "\n");
  return files;
}

std::vector<ScalingRow> run_sweep(const ScenarioConfig& config, const std::vector<double>& epsilons,
                                  bool force, const std::optional<fs::path>& out) {
  std::vector<ScalingRow> rows(epsilons.size());
  const int n = static_cast<int>(epsilons.size());
  const int threads = omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1)
  for (int i = 0; i < n; ++i) {
    const double eps = epsilons[static_cast<std::size_t>(i)];
    ScalingRow& row = rows[static_cast<std::size_t>(i)];
    try {
      const RunOutcome o = execute_scenario(config, eps, force);
      row = scaling_row(o);
      if (out) {
        char name[64];
        std::snprintf(name, sizeof name, "eps_%g", eps);
        write_run_artifacts(*out / name, config, eps, o, threads);
      }
    } catch (const std::exception& e) {
      row.epsilon = eps;
      row.exit_code = exit_code_for(e);
      row.status = status_for(row.exit_code);
      row.error = e.what();
      const double nan = std::numeric_limits<double>::quiet_NaN();
      row.m1_gap = row.rho_gap = row.sup_w1 = row.terminal_w1 = row.m2c_gap = nan;
    }
  }
  return rows;
}

namespace {

ScenarioConfig load_for_command(const CommandOptions& opt) {
  ScenarioConfig cfg = load_scenario(resolve_scenario_path(opt.config));
  if (opt.seed) cfg.seed = *opt.seed;
  if (opt.threads > 0) omp_set_num_threads(opt.threads);
  return cfg;
}

fs::path output_dir(const CommandOptions& opt, const ScenarioConfig& cfg) {
  if (!opt.out.empty()) return opt.out;
  if (!cfg.output_directory.empty()) return cfg.output_directory;
  return fs::path("out") / cfg.name;
}

}  // namespace

int cmd_run(const CommandOptions& opt) {
  ScenarioConfig cfg;
  try {
    cfg = load_for_command(opt);
    // Resolve everything that can be rejected before any output exists.
    (void)cfg.grid();
    (void)cfg.scheme.resolved_steps(cfg.epsilon);
    (void)cfg.model_spec(cfg.epsilon);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
  RunOutcome outcome{SimulationRun(ModelSpec{}, SchemeConfig{}, DensityState(Grid1D(0, 1, 3), {0, 0, 0})), {}, {}};
  try {
    outcome = execute_scenario(cfg, cfg.epsilon, opt.force);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
  const fs::path dir = output_dir(opt, cfg);
  try {
    const auto files = write_run_artifacts(dir, cfg, cfg.epsilon, outcome, opt.threads);
    const auto& last = outcome.run.records.back();
    std::cout << "scenario " << cfg.name << " (eps = " << cfg.epsilon << "): " << outcome.run.status << ", "
              << outcome.run.step_index << " steps to t = " << outcome.run.time() << " in "
              << outcome.run.wall_seconds << " s\n"
              << "  M1 = " << last.m1 << ", M2c = " << last.m2c << ", rho = " << last.rho
              << ", W1 to gaussian = " << last.w1_to_gaussian << '\n'
              << "  wrote " << files.size() << " files to " << dir.string() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
  return outcome.run.status == "extinct" ? kExitExtinct : kExitOk;
}

int cmd_sweep(const CommandOptions& opt) {
  ScenarioConfig cfg;
  try {
    cfg = load_for_command(opt);
    (void)cfg.grid();
    (void)cfg.model_spec(cfg.epsilon);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
  const fs::path dir = output_dir(opt, cfg);
  fs::create_directories(dir);
  const auto rows = run_sweep(cfg, cfg.epsilons, opt.force, dir);
  write_text(dir / "scaling.csv", scaling_csv(rows));
  int code = kExitOk;
  for (const auto& r : rows) {
    std::cout << "eps = " << r.epsilon << ": " << r.status;
    if (r.status == "ok") {
      std::cout << "  |M1 - zbar| = " << r.m1_gap << "  rho gap = " << r.rho_gap
                << "  terminal W1 = " << r.terminal_w1;
    } else if (!r.error.empty()) {
      std::cout << "  (" << r.error << ")";
    }
    std::cout << '\n';
    if (r.exit_code != kExitOk && code == kExitOk) code = r.exit_code;
  }
  if (const auto s = loglog_slope(rows, &ScalingRow::m1_gap)) {
    std::cout << "slopes: m1_gap " << *s << ", rho_gap "
              << loglog_slope(rows, &ScalingRow::rho_gap).value_or(std::nan("")) << ", terminal_w1 "
              << loglog_slope(rows, &ScalingRow::terminal_w1).value_or(std::nan("")) << '\n';
  }
  std::cout << "wrote " << (dir / "scaling.csv").string() << '\n';
  return code;
}

int cmd_audit(const CommandOptions& opt) {
  try {
    const ScenarioConfig cfg = load_for_command(opt);
    int code = kExitOk;
    for (double eps : cfg.epsilons) {
      AuditOptions ao = cfg.audit_options();
      ao.initial_mean = cfg.initial(eps).center;
      const auto rep = audit_model(cfg.model_spec(eps), ao);
      std::cout << "scenario " << cfg.name << ", eps = " << eps << '\n' << rep.summary();
      if (!rep.passed()) code = kExitAudit;
    }
    return code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
}

}  // namespace ecoevo
