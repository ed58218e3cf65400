#include "ecoevo/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <sstream>

#include "ecoevo/errors.hpp"
#include "ecoevo/experiment.hpp"
#include "ecoevo/moments.hpp"
#include "ecoevo/reproduction.hpp"
#include "ecoevo/scenario.hpp"
#include "ecoevo/stepper.hpp"
#include "ecoevo/theory.hpp"

namespace ecoevo {

namespace {

const std::vector<CriterionInfo> kCriteria = {
    {1, "operator moment identities", 5.0},
    {2, "fast/reference equivalence", 30.0},
    {3, "W2 contraction", 20.0},
    {4, "predator-prey figure reproduction", 240.0},
    {5, "epsilon scaling of mean and population gaps", 600.0},
    {6, "canonical equation closed forms", 1.0},
    {7, "logistic tracker scaling", 10.0},
    {8, "H-bar fixed point", 5.0},
    {9, "equilibrium consistency", 5.0},
    {10, "fast predator reduction", 180.0},
};

struct Outcome {
  bool passed = false;
  double measured = 0.0;
  double threshold = 0.0;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

ScenarioConfig bundled(const AcceptanceOptions& opt, const std::string& name) {
  const auto dir = opt.scenario_dir.empty() ? scenario_directory() : opt.scenario_dir;
  return load_scenario(dir / (name + ".ini"));
}

SegregationKernel kernel_under_test(double eps, const AcceptanceOptions& opt) {
  return SegregationKernel(eps * std::sqrt(opt.kernel_variance_scale));
}

DensityState apply_operator(FastReproducer& op, const DensityState& q) {
  return op.apply(q).offspring;
}

Outcome operator_identities(const AcceptanceOptions& opt) {
  const Grid1D grid(-2.0, 2.0, 1024);
  const double values[] = {0.05, 0.1, 0.2};
  double worst_var = 0.0;
  double worst_drift = 0.0;
  for (double eps : values) {
    FastReproducer op(grid, kernel_under_test(eps, opt));
    for (double sigma : values) {
      const auto q = gaussian_density(grid, 0.0, sigma);
      const auto out = apply_operator(op, q);
      const double m = mean(out);
      worst_drift = std::max(worst_drift, std::abs(m - mean(q)));
      const double expected = 0.5 * eps * eps + 0.5 * sigma * sigma;
      worst_var = std::max(worst_var, std::abs(central_moment(out, 2) - expected) / expected);
    }
  }
  Outcome o;
  o.measured = worst_var;
  o.threshold = 1e-4;
  o.passed = worst_var <= 1e-4 && worst_drift <= 1e-9;
  o.detail = fmt("max mean drift %.3g (limit 1e-9)", worst_drift);
  return o;
}

DensityState random_density(const Grid1D& grid, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> count(1, 4);
  const int k = count(rng);
  std::vector<double> v(grid.size(), 0.0);
  for (int c = 0; c < k; ++c) {
    const double mu = -1.0 + 2.0 * u(rng);
    const double sd = 0.05 + 0.3 * u(rng);
    const double w = 0.2 + u(rng);
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double z = (grid.node(i) - mu) / sd;
      v[i] += w * std::exp(-0.5 * z * z);
    }
  }
  for (auto& x : v) x *= 1.0 + 0.1 * u(rng);
  return normalize(DensityState(grid, std::move(v), 0.0, DensityKind::normalized));
}

Outcome fast_reference(const AcceptanceOptions& opt) {
  std::mt19937_64 rng(opt.seed);
  const Grid1D grid(-2.0, 2.0, 256);
  const double epsilons[] = {0.05, 0.1, 0.2};
  double worst = 0.0;
  for (int s = 0; s < 50; ++s) {
    const auto q = random_density(grid, rng);
    const SegregationKernel kernel = kernel_under_test(epsilons[s % 3], opt);
    const auto fast = reproduce_fast(q, kernel);
    const auto ref = reproduce_reference(q, kernel);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      worst = std::max(worst, std::abs(fast.offspring.values[i] - ref.offspring.values[i]));
      worst = std::max(worst, std::abs(fast.raw[i] - ref.raw[i]));
    }
  }
  return {worst <= 1e-10, worst, 1e-10, "50 densities, N = 256"};
}

struct Mixture {
  std::vector<double> w, mu, sd;
  double mean() const {
    double m = 0.0, t = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      m += w[i] * mu[i];
      t += w[i];
    }
    return m / t;
  }
  DensityState density(const Grid1D& grid) const {
    std::vector<double> v(grid.size(), 0.0);
    for (std::size_t c = 0; c < w.size(); ++c) {
      for (std::size_t i = 0; i < v.size(); ++i) {
        const double z = (grid.node(i) - mu[c]) / sd[c];
        v[i] += w[c] / sd[c] * std::exp(-0.5 * z * z);
      }
    }
    return normalize(DensityState(grid, std::move(v), 0.0, DensityKind::normalized));
  }
};

Mixture random_mixture(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> count(1, 3);
  Mixture m;
  const int k = count(rng);
  for (int c = 0; c < k; ++c) {
    m.w.push_back(0.2 + u(rng));
    m.mu.push_back(-0.8 + 1.6 * u(rng));
    m.sd.push_back(0.05 + 0.15 * u(rng));
  }
  return m;
}

// Pairs share their mean: the midpoint map only halves W2^2 up to the squared mean offset.
Outcome contraction(const AcceptanceOptions& opt) {
  std::mt19937_64 rng(opt.seed + 3);
  const Grid1D grid(-2.0, 2.0, 1024);
  FastReproducer op(grid, kernel_under_test(0.1, opt));
  double worst = 0.0;
  for (int p = 0; p < 100; ++p) {
    const Mixture a = random_mixture(rng);
    Mixture b = random_mixture(rng);
    const double shift = a.mean() - b.mean();
    for (auto& m : b.mu) m += shift;
    const auto ga = a.density(grid);
    const auto gb = b.density(grid);
    const double before = wasserstein(2.0, ga, gb);
    if (before < 1e-6) continue;
    const double after = wasserstein(2.0, apply_operator(op, ga), apply_operator(op, gb));
    worst = std::max(worst, after / before);
  }
  const double limit = (1.0 + 1e-6) / std::sqrt(2.0);
  return {worst <= limit, worst, limit, "100 mean-matched mixture pairs, eps = 0.1"};
}

Outcome figure_reproduction(const AcceptanceOptions& opt) {
  Outcome o;
  o.passed = true;
  o.threshold = 0.2;
  std::ostringstream detail;
  for (const char* name : {"paper_fig12_eps02", "paper_fig12_eps01"}) {
    const ScenarioConfig cfg = bundled(opt, name);
    const double eps = cfg.epsilon;
    const RunOutcome r = execute_scenario(cfg, eps, false);
    const auto& last = r.run.records.back();
    const bool reached = r.run.status == "ok" && r.run.time() >= cfg.scheme.horizon - 0.5 * r.run.dt;
    const double m2c_rel = std::abs(last.m2c - eps * eps) / (eps * eps);
    double rho_gap = 0.0;
    for (const auto& rec : r.run.records) {
      if (rec.time >= 1.0) {
        rho_gap = std::max(rho_gap, std::abs(rec.rho - solve_equilibrium(r.run.spec.prey, rec.m1)));
      }
    }
    const bool ok = reached && m2c_rel <= 0.25 && last.w1_to_gaussian <= 0.5 * eps && rho_gap <= 0.2;
    o.passed = o.passed && ok;
    o.measured = std::max(o.measured, rho_gap);
    detail << "eps " << eps << ": M2c/eps^2-1 = " << fmt("%.3g", m2c_rel) << ", W1/eps = "
           << fmt("%.3g", last.w1_to_gaussian / eps) << ", rho gap = " << fmt("%.3g", rho_gap)
           << (reached ? "" : ", horizon not reached") << "; ";
  }
  o.detail = detail.str();
  return o;
}

Outcome epsilon_scaling(const AcceptanceOptions& opt) {
  Outcome o;
  o.passed = true;
  o.threshold = 0.8;
  o.measured = std::numeric_limits<double>::infinity();
  std::ostringstream detail;
  for (const char* name : {"pp_theory_sweep", "single_species_sweep"}) {
    const ScenarioConfig cfg = bundled(opt, name);
    const auto rows = run_sweep(cfg, cfg.epsilons, false, std::nullopt);
    for (const auto& r : rows) {
      if (r.status != "ok") {
        o.passed = false;
        detail << name << " eps " << r.epsilon << " " << r.status << "; ";
      }
    }
    const auto s1 = loglog_slope(rows, &ScalingRow::m1_gap);
    const auto s2 = loglog_slope(rows, &ScalingRow::rho_gap);
    for (const auto& s : {s1, s2}) {
      if (!s) {
        o.passed = false;
        o.measured = std::numeric_limits<double>::quiet_NaN();
      } else {
        o.measured = std::min(o.measured, *s);
        o.passed = o.passed && *s >= 0.8;
      }
    }
    detail << name << ": slopes m1 " << fmt("%.3f", s1.value_or(NAN)) << ", rho "
           << fmt("%.3f", s2.value_or(NAN)) << "; ";
  }
  o.detail = detail.str();
  return o;
}

Outcome canonical_closed_forms(const AcceptanceOptions&) {
  SingleSpeciesSpec spec;
  spec.epsilon = 0.1;
  spec.mortality.kind = MortalityFamilyKind::quadratic;
  spec.mortality.a = 1.5;
  spec.mortality.center = 0.3;
  spec.optimum.kind = OptimumKind::constant;
  const double z0 = 1.2;
  const auto times = sample_times(10.0, 0.1);
  const auto traj = integrate_canonical(spec, z0, z0, times);
  double err = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double exact = 0.3 + (z0 - 0.3) * std::exp(-1.5 * times[i]);
    err = std::max({err, std::abs(traj.zbar_0[i] - exact), std::abs(traj.zbar_eps[i] - exact)});
  }
  SingleSpeciesSpec ramp = spec;
  ramp.mortality.center = 0.0;
  ramp.optimum.kind = OptimumKind::linear_ramp;
  ramp.optimum.speed = 0.05;
  const auto lag_traj = integrate_canonical(ramp, 0.0, 0.0, {0.0, 40.0});
  const double lag = lag_traj.zbar_0.back() - ramp.optimum.value(40.0);
  const double lag_err = std::abs(lag + 0.05 / 1.5);
  Outcome o{err <= 1e-8 && lag_err <= 1e-6, err, 1e-8, fmt("lag error %.3g (limit 1e-6)", lag_err)};
  return o;
}

Outcome tracker_scaling(const AcceptanceOptions&) {
  auto H = [](double t) { return 1.0 + 0.1 * std::sin(t); };
  auto alpha = [](double) { return 1.0; };
  auto sup_gap = [&](double eps) {
    const auto sol = logistic_tracker(alpha, H, H(0.0) + eps, eps, 10.0);
    double s = 0.0;
    for (std::size_t i = 0; i < sol.times.size(); ++i) {
      if (sol.times[i] >= std::pow(eps, 1.5)) s = std::max(s, std::abs(sol.y[i] - H(sol.times[i])));
    }
    return s;
  };
  const double a = sup_gap(0.1);
  const double b = sup_gap(0.05);
  const double ratio = a / b;
  return {ratio >= 1.8, ratio, 1.8, fmt("sup gap %.3g at eps 0.1, %.3g at eps 0.05", a, b)};
}

Outcome hbar_fixed_point(const AcceptanceOptions&) {
  const double eta = 0.5, L_X = 1.0, eps = 0.1;
  const double eta2 = eta / (9.0 + 3.0 * L_X * eta);
  Outcome o;
  o.passed = true;
  o.threshold = 1e-8;
  std::ostringstream detail;
  const std::function<double(double)> drifts[] = {[](double) { return 0.0; },
                                                  [](double t) { return std::cos(t); }};
  const char* labels[] = {"still", "cos"};
  for (int k = 0; k < 2; ++k) {
    const auto sol = solve_hbar(eta, eta2, L_X, drifts[k], eps, 2.0);
    const double res = hbar_residual(sol, eta, eta2, drifts[k], eps);
    const bool ok = sol.values.front() == 2.0 && sol.sup <= 3.0 && res <= 1e-8;
    o.passed = o.passed && ok;
    o.measured = std::max(o.measured, res);
    detail << labels[k] << ": H(0) = " << sol.values.front() << ", sup = " << fmt("%.6f", sol.sup)
           << ", " << sol.iterations << " iterations; ";
  }
  o.detail = detail.str();
  return o;
}

Outcome equilibrium_consistency(const AcceptanceOptions&) {
  PredatorPreySpec spec;
  spec.epsilon = 0.1;
  const FixedPoint fp = find_fixed_point(spec);
  const Band band = discover_band(spec, fp);
  double worst = 0.0;
  double max_dgdi = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 200; ++i) {
    const double x = band.center - band.half_width + band.half_width * i / 100.0;
    const double closed = solve_equilibrium(spec, x);
    const double numeric = solve_equilibrium_numeric(spec, x);
    worst = std::max(worst, std::abs(closed - numeric));
    max_dgdi = std::max(max_dgdi, growth_G_dI(spec, x, numeric));
  }
  const double z0 = band.center + 0.8 * band.half_width;
  const auto traj = integrate_canonical(spec, band, z0, z0, {0.0, 50.0});
  const double end_gap = std::abs(traj.zbar_0.back() - fp.x_star);
  Outcome o{worst <= 1e-10 && max_dgdi < 0.0 && end_gap <= 1e-6, worst, 1e-10,
            fmt("max dG/dI %.3g, |Z0(50) - x*| = %.3g", max_dgdi, end_gap)};
  return o;
}

double relative_sup(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
    num = std::max(num, std::abs(a[i] - b[i]));
    den = std::max(den, std::abs(b[i]));
  }
  return num / den;
}

Outcome fast_predator(const AcceptanceOptions& opt) {
  const ScenarioConfig coupled = bundled(opt, "pp_coupled_tau");
  ScenarioConfig reduced = coupled;
  reduced.model = ModelKind::predator_prey_reduced;
  reduced.tau = 0.0;
  reduced.tau_eps_power = 0.0;
  const double eps = coupled.epsilon;
  const RunOutcome a = execute_scenario(coupled, eps, false);
  const RunOutcome b = execute_scenario(reduced, eps, false);
  if (a.run.records.size() != b.run.records.size() || a.run.status != "ok" || b.run.status != "ok") {
    return {false, NAN, 0.02, "runs did not complete on the same clock"};
  }
  std::vector<double> m1a, m1b, ra, rb;
  for (const auto& r : a.run.records) {
    m1a.push_back(r.m1);
    ra.push_back(r.rho);
  }
  for (const auto& r : b.run.records) {
    m1b.push_back(r.m1);
    rb.push_back(r.rho);
  }
  const double dm = relative_sup(m1a, m1b);
  const double dr = relative_sup(ra, rb);
  return {std::max(dm, dr) <= 0.02, std::max(dm, dr), 0.02,
          fmt("M1 %.3g, rho1 %.3g (relative sup-norm), tau = %.3g", dm, dr, a.run.spec.prey.tau)};
}

using Check = Outcome (*)(const AcceptanceOptions&);
const Check kChecks[] = {operator_identities, fast_reference,       contraction,
                         figure_reproduction, epsilon_scaling,      canonical_closed_forms,
                         tracker_scaling,     hbar_fixed_point,     equilibrium_consistency,
                         fast_predator};

}  // namespace

const std::vector<CriterionInfo>& list_criteria() { return kCriteria; }

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options) {
  std::vector<CriterionResult> results;
  for (std::size_t i = 0; i < kCriteria.size(); ++i) {
    const auto& info = kCriteria[i];
    if (!options.only.empty() &&
        std::find(options.only.begin(), options.only.end(), info.id) == options.only.end()) {
      continue;
    }
    CriterionResult r;
    r.id = info.id;
    r.name = info.name;
    r.time_limit = info.time_limit;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const Outcome o = kChecks[i](options);
      r.passed = o.passed;
      r.measured = o.measured;
      r.threshold = o.threshold;
      r.detail = o.detail;
    } catch (const std::exception& e) {
      r.passed = false;
      r.measured = std::numeric_limits<double>::quiet_NaN();
      r.detail = std::string("error: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (r.seconds > r.time_limit) {
      r.passed = false;
      r.detail += fmt(" exceeded time limit (%.1f s > %.0f s)", r.seconds, r.time_limit);
    }
    results.push_back(r);
  }
  return results;
}

std::string format_results(const std::vector<CriterionResult>& results) {
  std::ostringstream out;
  int passed = 0;
  for (const auto& r : results) {
    char line[512];
    std::snprintf(line, sizeof line, "[%s] %2d %-46s measured %-12.6g threshold %-10.4g %7.2f s / %.0f s",
                  r.passed ? "PASS" : "FAIL", r.id, r.name.c_str(), r.measured, r.threshold, r.seconds,
                  r.time_limit);
    out << line << '\n';
    if (!r.detail.empty()) out << "       " << r.detail << '\n';
    passed += r.passed ? 1 : 0;
  }
  out << passed << "/" << results.size() << " criteria passed\n";
  return out.str();
}

}  // namespace ecoevo
