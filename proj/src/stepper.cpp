#include "ecoevo/stepper.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include "ecoevo/errors.hpp"
#include "ecoevo/theory.hpp"

namespace ecoevo {

double SchemeConfig::resolved_dt(double epsilon) const {
  const double limit = 0.5 * epsilon * epsilon;
  if (safety_factor > 1.0 && !allow_unsafe_dt) {
    throw ConfigError("safety_factor > 1 needs allow_unsafe_dt");
  }
  const double step = dt > 0.0 ? dt : limit;
  if (step > limit * safety_factor * (1.0 + 1e-12) && !allow_unsafe_dt) {
    throw ConfigError("dt = " + std::to_string(step) + " exceeds the stability limit eps^2/2 * " +
                      std::to_string(safety_factor) + " = " + std::to_string(limit * safety_factor));
  }
  return step;
}

std::size_t SchemeConfig::resolved_steps(double epsilon) const {
  if (n_steps > 0) return n_steps;
  if (horizon < 0.0) throw ConfigError("negative horizon");
  return static_cast<std::size_t>(std::ceil(horizon / resolved_dt(epsilon) - 1e-9));
}

DensityState SimulationRun::trait_density() const {
  DensityState q = normalize(state);
  q.kind = DensityKind::normalized;
  return q;
}

const char* to_string(ModelKind k) {
  switch (k) {
    case ModelKind::single_species:
      return "single_species";
    case ModelKind::predator_prey_reduced:
      return "predator_prey_reduced";
    case ModelKind::predator_prey_coupled:
      return "predator_prey_coupled";
  }
  return "?";
}

namespace {

void zero_boundary(std::vector<double>& v) {
  v.front() = 0.0;
  v.back() = 0.0;
}

void take_snapshots(SimulationRun& run) {
  for (double T : run.scheme.snapshot_times) {
    if (std::abs(run.time() - T) > 0.5 * run.dt) continue;
    const bool taken = std::any_of(run.snapshots.begin(), run.snapshots.end(),
                                   [&](const Snapshot& s) { return std::abs(s.time - T) <= 0.5 * run.dt; });
    if (taken) continue;
    run.snapshots.push_back({run.time(), run.trait_density().values, mortality_profile(run)});
  }
}

}  // namespace

SimulationRun initialize_run(const ModelSpec& spec, const SchemeConfig& scheme, const Grid1D& grid,
                             const InitialCondition& initial) {
  const double eps = spec.epsilon();
  if (spec.kind == ModelKind::predator_prey_coupled && !(spec.prey.tau > 0.0)) {
    throw ConfigError("coupled predator-prey mode needs tau > 0");
  }
  if (!(initial.width > 0.0)) throw ConfigError("initial width must be positive");
  if (scheme.record_stride == 0) throw ConfigError("record_stride must be positive");
  DensityState q = initial.kind == InitialKind::indicator
                       ? indicator_density(grid, initial.center, initial.width)
                       : gaussian_density(grid, initial.center, initial.width);
  zero_boundary(q.values);
  try {
    normalize_in_place(q.values, grid);
  } catch (const DegenerateStateError&) {
    throw ConfigError("initial condition has no mass on the grid");
  }
  q.kind = DensityKind::normalized;
  q.time = 0.0;

  double rho = initial.rho0;
  if (!(rho > 0.0)) {
    if (spec.is_predator_prey()) {
      rho = solve_equilibrium(spec.prey, initial.center);
    } else {
      rho = (spec.single.birth(0.0) - eval_mortality_single(spec.single, initial.center, 0.0)) /
            spec.single.kappa;
    }
  }
  if (!(rho > 0.0)) throw ConfigError("initial population must be positive");

  SimulationRun run(spec, scheme, q);
  run.dt = scheme.resolved_dt(eps);
  run.rho = rho;
  if (spec.kind == ModelKind::predator_prey_coupled) {
    const double fbar = averaged(q, spec.prey.contact.value);
    run.rho2 = initial.rho2_0 > 0.0 ? initial.rho2_0 : quasi_steady_predator(spec.prey, rho, fbar);
    if (!(run.rho2 > 0.0)) throw ConfigError("initial predator density must be positive");
  }
  if (scheme.mode == StateMode::population) {
    for (double& v : run.state.values) v *= rho;
    run.state.kind = DensityKind::population;
  }
  run.reproducer = std::make_shared<Reproducer>(grid, SegregationKernel(eps), scheme.method);
  return run;
}

std::vector<double> mortality_profile(const SimulationRun& run) {
  const auto& grid = run.state.grid;
  std::vector<double> m(grid.size());
  const double t = run.time();
  if (run.spec.kind == ModelKind::single_species) {
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = eval_mortality_single(run.spec.single, grid.node(i), t);
    return m;
  }
  const auto& p = run.spec.prey;
  const double fbar = averaged(run.trait_density(), p.contact.value);
  for (std::size_t i = 0; i < m.size(); ++i) {
    m[i] = run.spec.kind == ModelKind::predator_prey_coupled
               ? eval_mortality_prey_coupled(p, grid.node(i), run.rho, fbar, run.rho2)
               : eval_mortality_prey(p, grid.node(i), run.rho, fbar);
  }
  return m;
}

namespace {

void explicit_step(SimulationRun& run, double birth, double kappa) {
  const auto& grid = run.state.grid;
  const std::size_t n = grid.size();
  const double eps = run.spec.epsilon();
  const double c = run.dt / (eps * eps);
  const DensityState q = run.trait_density();
  const auto m = mortality_profile(run);
  std::vector<double> mq(n);
  for (std::size_t i = 0; i < n; ++i) mq[i] = m[i] * q.values[i];
  const double mbar = trapezoid(mq, grid);
  const double fbar = run.spec.is_predator_prey() ? averaged(q, run.spec.prey.contact.value) : 0.0;

  std::vector<double> raw(n);
  const double leak = run.reproducer->apply(q.values, raw);
  run.last_leak = leak;
  run.max_leak = std::max(run.max_leak, leak);
  if (leak > kBoundaryLeakThreshold) ++run.boundary_warnings;

  auto& v = run.state.values;
  std::vector<double> next(n);
  if (run.scheme.mode == StateMode::normalized) {
    for (std::size_t i = 0; i < n; ++i) {
      next[i] = v[i] + c * (birth * (raw[i] - v[i]) - (m[i] - mbar) * v[i]);
    }
  } else {
    const double rho = trapezoid(v, grid);
    for (std::size_t i = 0; i < n; ++i) {
      next[i] = v[i] + c * (birth * rho * raw[i] - (m[i] + kappa * rho) * v[i]);
    }
  }
  zero_boundary(next);

  double peak = 0.0;
  for (double x : next) {
    if (!std::isfinite(x)) {
      throw NumericalError("non-finite density at step " + std::to_string(run.step_index + 1));
    }
    peak = std::max(peak, std::abs(x));
  }
  // Transform round-off leaves values of order 1e-17 * peak where the density vanishes.
  const double floor = 1e-12 * peak;
  for (std::size_t i = 0; i < n; ++i) {
    if (next[i] >= 0.0) continue;
    if (next[i] > -floor) {
      next[i] = 0.0;
    } else {
      throw StabilityError("negative density " + std::to_string(next[i]) + " at node " +
                               std::to_string(i) + ", step " + std::to_string(run.step_index + 1),
                           run.step_index + 1);
    }
  }

  const double rho_old = run.rho;
  if (run.scheme.mode == StateMode::normalized) {
    const double mass = trapezoid(next, grid);
    run.max_mass_defect = std::max(run.max_mass_defect, std::abs(mass - trapezoid(v, grid)));
    if (run.scheme.renormalize_each_step) {
      if (!(mass > 0.0)) throw NumericalError("trait density lost all mass");
      for (double& x : next) x /= mass;
    }
    run.rho = rho_old + c * (birth - mbar - kappa * rho_old) * rho_old;
  } else {
    run.rho = trapezoid(next, grid);
  }
  v = std::move(next);

  if (run.spec.kind == ModelKind::predator_prey_coupled) {
    const auto& p = run.spec.prey;
    const double sub_max = p.tau / 10.0;
    const auto n_sub = static_cast<std::size_t>(std::ceil(run.dt / sub_max - 1e-12));
    const double h = run.dt / static_cast<double>(n_sub);
    double rho2 = run.rho2;
    for (std::size_t s = 0; s < n_sub && rho2 > 0.0; ++s) {
      rho2 += h / p.tau * predator_rate(p, rho_old, fbar, rho2);
    }
    run.rho2 = rho2;
    if (!(rho2 > kExtinctionLevel)) run.status = "extinct";
  }
  if (!std::isfinite(run.rho)) throw NumericalError("population size is not finite");
  if (!(run.rho > kExtinctionLevel)) run.status = "extinct";

  ++run.step_index;
  run.state.time = static_cast<double>(run.step_index) * run.dt;
}

}  // namespace

void step_single(SimulationRun& run) {
  if (run.spec.kind != ModelKind::single_species) throw ContractError("step_single on a predator-prey run");
  explicit_step(run, run.spec.single.birth(run.time()), run.spec.single.kappa);
}

void step_prey_predator(SimulationRun& run) {
  if (!run.spec.is_predator_prey()) throw ContractError("step_prey_predator on a single-species run");
  if (run.spec.kind == ModelKind::predator_prey_coupled && !(run.rho2 > 0.0)) {
    throw ContractError("coupled step needs rho2 > 0");
  }
  explicit_step(run, run.spec.prey.r1, run.spec.prey.kappa1);
}

void record_moments(SimulationRun& run) {
  const DensityState q = run.trait_density();
  MomentRecord rec = moment_record(q, run.spec.epsilon(), run.scheme.k0);
  rec.time = run.time();
  rec.rho = run.rho;
  if (run.spec.is_predator_prey()) {
    rec.fbar = averaged(q, run.spec.prey.contact.value);
    rec.dbar = averaged(q, run.spec.prey.relief.value);
  }
  rec.leaked_mass = run.last_leak;
  run.records.push_back(rec);
}

AuditReport audit_model(const ModelSpec& spec, const AuditOptions& options) {
  return spec.is_predator_prey() ? audit_predator_prey(spec.prey, options)
                                 : audit_single(spec.single, options);
}

SimulationRun run_to_horizon(const ModelSpec& spec, const SchemeConfig& scheme, const Grid1D& grid,
                             const InitialCondition& initial, const RunOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  if (!options.force) {
    AuditOptions ao = options.audit;
    ao.initial_mean = initial.center;
    ao.x_min = grid.x_min();
    ao.x_max = grid.x_max();
    const auto report = audit_model(spec, ao);
    if (!report.passed()) throw AuditError("hypothesis audit failed:\n" + report.summary());
  }
  SimulationRun run = initialize_run(spec, scheme, grid, initial);
  const std::size_t steps = scheme.resolved_steps(spec.epsilon());
  record_moments(run);
  take_snapshots(run);
  for (std::size_t k = 0; k < steps; ++k) {
    if (spec.kind == ModelKind::single_species) {
      step_single(run);
    } else {
      step_prey_predator(run);
    }
    const bool last = k + 1 == steps || run.status != "ok";
    if (last || run.step_index % scheme.record_stride == 0) record_moments(run);
    take_snapshots(run);
    if (run.status != "ok") break;
  }
  run.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return run;
}

}  // namespace ecoevo
