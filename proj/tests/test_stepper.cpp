#include <gtest/gtest.h>

#include <cmath>

#include "ecoevo/errors.hpp"
#include "ecoevo/moments.hpp"
#include "ecoevo/stepper.hpp"

#include <algorithm>

using namespace ecoevo;

namespace {

ModelSpec section5(double eps) {
  ModelSpec m;
  m.kind = ModelKind::predator_prey_reduced;
  m.prey.epsilon = eps;
  return m;
}

InitialCondition start(double eps) {
  InitialCondition ic;
  ic.center = 0.8 + 0.5 * eps;
  ic.width = 0.5 * eps;
  return ic;
}

}  // namespace

TEST(Scheme, DefaultClock) {
  SchemeConfig s;
  EXPECT_DOUBLE_EQ(s.resolved_dt(0.2), 0.02);
  EXPECT_EQ(s.resolved_steps(0.2), 800u);
  EXPECT_EQ(s.resolved_steps(0.1), 3200u);
  s.dt = 0.03;
  EXPECT_THROW(s.resolved_dt(0.2), ConfigError);
  s.allow_unsafe_dt = true;
  s.safety_factor = 2.0;
  EXPECT_DOUBLE_EQ(s.resolved_dt(0.2), 0.03);
  SchemeConfig t;
  t.safety_factor = 1.5;
  EXPECT_THROW(t.resolved_dt(0.2), ConfigError);
}

TEST(Stepper, PreservesPositivityMassAndBoundary) {
  const double eps = 0.2;
  SchemeConfig sc;
  sc.horizon = 4.0;
  const auto run = run_to_horizon(section5(eps), sc, Grid1D::symmetric(2.0, 0.02), start(eps));
  EXPECT_EQ(run.status, "ok");
  EXPECT_EQ(run.step_index, 200u);
  EXPECT_NEAR(run.time(), 4.0, 1e-12);
  EXPECT_EQ(run.records.size(), 201u);
  for (double v : run.state.values) EXPECT_GE(v, 0.0);
  EXPECT_DOUBLE_EQ(run.state.values.front(), 0.0);
  EXPECT_DOUBLE_EQ(run.state.values.back(), 0.0);
  EXPECT_NEAR(trapezoid(run.state), 1.0, 1e-12);
  EXPECT_LT(run.max_leak, 1e-8);
}

TEST(Stepper, ReproductionMethodsGiveSameTrajectory) {
  const double eps = 0.2;
  SchemeConfig sc;
  sc.horizon = 1.0;
  const auto grid = Grid1D::symmetric(2.0, 0.04);
  sc.method = ReproductionMethod::fft;
  const auto a = run_to_horizon(section5(eps), sc, grid, start(eps));
  sc.method = ReproductionMethod::reference;
  const auto b = run_to_horizon(section5(eps), sc, grid, start(eps));
  sc.method = ReproductionMethod::direct;
  const auto c = run_to_horizon(section5(eps), sc, grid, start(eps));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    EXPECT_NEAR(a.state.values[i], b.state.values[i], 1e-10);
    EXPECT_NEAR(c.state.values[i], b.state.values[i], 1e-12);
  }
  EXPECT_NEAR(a.rho, b.rho, 1e-12);
}

TEST(Stepper, Deterministic) {
  const double eps = 0.2;
  SchemeConfig sc;
  sc.horizon = 2.0;
  const auto grid = Grid1D::symmetric(2.0, 0.02);
  const auto a = run_to_horizon(section5(eps), sc, grid, start(eps));
  const auto b = run_to_horizon(section5(eps), sc, grid, start(eps));
  EXPECT_EQ(a.state.values, b.state.values);
  EXPECT_EQ(a.rho, b.rho);
}

TEST(Stepper, PopulationModeMatchesNormalizedMode) {
  ModelSpec m;
  m.kind = ModelKind::single_species;
  m.single.epsilon = 0.2;
  m.single.mortality = {MortalityFamilyKind::quadratic, 0.5, 0.0, 0.0};
  SchemeConfig sc;
  sc.horizon = 3.0;
  const auto grid = Grid1D::symmetric(1.25, 0.0125);
  InitialCondition ic;
  ic.center = 0.2;
  ic.width = 0.1;
  sc.mode = StateMode::normalized;
  const auto a = run_to_horizon(m, sc, grid, ic);
  sc.mode = StateMode::population;
  const auto b = run_to_horizon(m, sc, grid, ic);
  EXPECT_NEAR(a.records.back().m1, b.records.back().m1, 1e-3);
  EXPECT_NEAR(a.records.back().rho, b.records.back().rho, 2e-3);
}

TEST(Stepper, SnapshotsAtRequestedTimes) {
  const double eps = 0.2;
  SchemeConfig sc;
  sc.horizon = 3.0;
  sc.snapshot_times = {1.0, 3.0};
  const auto run = run_to_horizon(section5(eps), sc, Grid1D::symmetric(2.0, 0.02), start(eps));
  ASSERT_EQ(run.snapshots.size(), 2u);
  EXPECT_NEAR(run.snapshots[0].time, 1.0, 1e-12);
  EXPECT_NEAR(run.snapshots[1].time, 3.0, 1e-12);
  EXPECT_EQ(run.snapshots[1].mortality.size(), run.state.grid.size());
}

TEST(Stepper, AuditGate) {
  auto spec = section5(0.2);
  spec.prey.kappa1 = 0.1;  // kappa1 - delta < 0 near x = 1
  SchemeConfig sc;
  sc.horizon = 0.1;
  EXPECT_THROW(run_to_horizon(spec, sc, Grid1D::symmetric(2.0, 0.02), start(0.2)), AuditError);
  RunOptions force;
  force.force = true;
  EXPECT_NO_THROW(run_to_horizon(spec, sc, Grid1D::symmetric(2.0, 0.02), start(0.2), force));
}

TEST(Stepper, ExtinctionHaltsGracefully) {
  ModelSpec m;
  m.kind = ModelKind::single_species;
  m.single.epsilon = 0.2;
  m.single.birth = {0.05, 0.0, 1.0};
  m.single.mortality = {MortalityFamilyKind::quadratic, 0.5, 0.0, 0.0};
  // the optimum outruns the population: lag v/A keeps mean mortality above the birth rate
  m.single.optimum = {OptimumKind::linear_ramp, 0.5, 0.0, 1.0};
  SchemeConfig sc;
  sc.horizon = 200.0;
  InitialCondition ic;
  ic.center = 0.0;
  ic.width = 0.1;
  ic.rho0 = 0.5;
  RunOptions force;
  force.force = true;
  const auto run = run_to_horizon(m, sc, Grid1D::symmetric(1.5, 0.02), ic, force);
  EXPECT_EQ(run.status, "extinct");
  EXPECT_LT(run.time(), 200.0);
}

TEST(Stepper, CoupledPredatorTracksQuasiSteady) {
  ModelSpec m;
  m.kind = ModelKind::predator_prey_coupled;
  m.prey.epsilon = 0.2;
  m.prey.family = PreyMortalityFamily::holling_reduced;
  m.prey.tau = std::pow(0.2, 4);
  SchemeConfig sc;
  sc.horizon = 2.0;
  const auto run = run_to_horizon(m, sc, Grid1D::symmetric(2.0, 0.02), start(0.2));
  const double fbar = run.records.back().fbar;
  EXPECT_NEAR(run.rho2, quasi_steady_predator(m.prey, run.rho, fbar), 1e-2);
}

namespace {

ModelSpec single(double eps, double birth, double a) {
  ModelSpec m;
  m.kind = ModelKind::single_species;
  m.single.epsilon = eps;
  m.single.birth = {birth, 0.0, 1.0};
  m.single.mortality = {MortalityFamilyKind::quadratic, a, 0.0, 0.0};
  return m;
}

InitialCondition gaussian_start(double center, double sd, double rho0 = 0.0) {
  InitialCondition ic;
  ic.kind = InitialKind::gaussian;
  ic.center = center;
  ic.width = sd;
  ic.rho0 = rho0;
  return ic;
}

}  // namespace

TEST(Stepper, GaussianAnsatzIsNearlyStationaryWithoutSelection) {
  const double eps = 0.2;
  SchemeConfig sc;
  auto run = initialize_run(single(eps, 1.0, 0.0), sc, Grid1D::symmetric(2.0, 0.01), gaussian_start(0.0, eps, 1.0));
  const auto before = moment_record(run.trait_density(), eps);
  step_single(run);
  const auto after = moment_record(run.trait_density(), eps);
  EXPECT_NEAR(after.m1, before.m1, 1e-10);
  EXPECT_NEAR(after.m2c, before.m2c, run.dt * eps * eps);
}

TEST(Stepper, OneStepFromIndicatorWidensSupport) {
  const double eps = 0.2;
  SchemeConfig sc;
  auto run = initialize_run(section5(eps), sc, Grid1D::symmetric(2.0, 0.02), start(eps));
  auto support = [](const std::vector<double>& v) {
    return std::count_if(v.begin(), v.end(), [](double x) { return x > 1e-12; });
  };
  const auto before = support(run.state.values);
  step_prey_predator(run);
  EXPECT_NEAR(trapezoid(run.state), 1.0, 1e-13);
  EXPECT_GT(support(run.state.values), before + 10);
}

TEST(Stepper, SelectionMovesMeanDownhill) {
  // zero birth: eps^2 dM1/dt = -cov(m, x) = -A M1 M2c for a Gaussian under quadratic m
  const double eps = 0.2, A = 1.0, mu = 0.4;
  SchemeConfig sc;
  sc.dt = 1e-3 * eps * eps;
  auto run = initialize_run(single(eps, 0.0, A), sc, Grid1D::symmetric(2.0, 0.01), gaussian_start(mu, eps, 1.0));
  const auto before = moment_record(run.trait_density(), eps);
  step_single(run);
  const auto after = moment_record(run.trait_density(), eps);
  const double rate = (after.m1 - before.m1) / run.dt;
  const double predicted = -A * before.m1 * before.m2c / (eps * eps);
  EXPECT_NEAR(rate, predicted, 0.1 * std::abs(predicted));
}

TEST(Stepper, ZeroContactDecouplesPrey) {
  const double eps = 0.2;
  for (auto family : {PreyMortalityFamily::section5_scheme, PreyMortalityFamily::holling_reduced}) {
    ModelSpec spec = section5(eps);
    spec.prey.family = family;
    spec.prey.contact = constant_function(0.0);
    SchemeConfig sc;
    auto ic = start(eps);
    ic.rho0 = 1.2;
    auto run = initialize_run(spec, sc, Grid1D::symmetric(2.0, 0.02), ic);
    const auto q = run.trait_density();
    const double rho = run.rho;
    // hand-rolled update with mortality -delta(x) rho1 (holling) or -delta(x) (section5 form)
    const auto raw = reproduce_fast(q, SegregationKernel(eps)).raw;
    std::vector<double> m(q.values.size()), mq(q.values.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
      const double d = spec.prey.relief(q.grid.node(i));
      m[i] = family == PreyMortalityFamily::holling_reduced ? -d * rho : -d;
      mq[i] = m[i] * q.values[i];
    }
    const double mbar = trapezoid(mq, q.grid);
    const double c = run.dt / (eps * eps);
    std::vector<double> expected(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
      expected[i] = q.values[i] + c * (spec.prey.r1 * (raw[i] - q.values[i]) - (m[i] - mbar) * q.values[i]);
    }
    expected.front() = expected.back() = 0.0;
    normalize_in_place(expected, q.grid);
    step_prey_predator(run);
    for (std::size_t i = 0; i < m.size(); ++i) EXPECT_NEAR(run.state.values[i], expected[i], 1e-13);
    EXPECT_NEAR(run.rho, rho + c * (spec.prey.r1 - mbar - spec.prey.kappa1 * rho) * rho, 1e-14);
  }
}

TEST(Stepper, HorizonZeroKeepsInitialRecord) {
  SchemeConfig sc;
  sc.horizon = 0.0;
  const auto run = run_to_horizon(section5(0.2), sc, Grid1D::symmetric(2.0, 0.02), start(0.2));
  EXPECT_EQ(run.records.size(), 1u);
  EXPECT_EQ(run.step_index, 0u);
}

TEST(Stepper, RecordsIncreaseAndMassDefectIsSmall) {
  for (double eps : {0.2, 0.1}) {
    SchemeConfig sc;
    sc.horizon = 2.0;
    sc.record_stride = 3;
    const auto run = run_to_horizon(section5(eps), sc, Grid1D::symmetric(2.0, 0.02), start(eps));
    for (std::size_t i = 1; i < run.records.size(); ++i) EXPECT_GT(run.records[i].time, run.records[i - 1].time);
    EXPECT_LT(run.max_mass_defect, 10.0 * run.dt);
  }
}

TEST(Stepper, PopulationModeFollowsLogisticOde) {
  // n-mode, time-independent m: eps^2 rho' = (r - mbar - kappa rho) rho with mbar taken from the run
  const double eps = 0.2, r = 1.0, kappa = 1.0;
  SchemeConfig sc;
  sc.mode = StateMode::population;
  sc.dt = 0.1 * eps * eps;  // keeps the explicit-Euler error of the transient well under 1%
  auto spec = single(eps, r, 0.5);
  auto run = initialize_run(spec, sc, Grid1D::symmetric(1.25, 0.0125), gaussian_start(0.3, eps, 0.6));
  std::vector<double> times{0.0}, rho{run.rho}, mbar;
  auto current_mbar = [&] {
    const auto q = run.trait_density();
    const auto m = mortality_profile(run);
    std::vector<double> mq(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) mq[i] = m[i] * q.values[i];
    return trapezoid(mq, q.grid);
  };
  for (int s = 0; s < 1000; ++s) {
    mbar.push_back(current_mbar());
    step_single(run);
    times.push_back(run.time());
    rho.push_back(run.rho);
  }
  mbar.push_back(current_mbar());
  // independent integration with mbar linear between steps
  double y = rho.front(), worst = 0.0;
  const int sub = 200;
  for (std::size_t s = 0; s + 1 < times.size(); ++s) {
    const double h = (times[s + 1] - times[s]) / sub;
    for (int k = 0; k < sub; ++k) {
      auto f = [&](double tau, double yy) {
        const double w = tau / (times[s + 1] - times[s]);
        const double mb = (1.0 - w) * mbar[s] + w * mbar[s + 1];
        return (r - mb - kappa * yy) * yy / (eps * eps);
      };
      const double t0 = k * h;
      const double k1 = f(t0, y), k2 = f(t0 + h / 2, y + h / 2 * k1), k3 = f(t0 + h / 2, y + h / 2 * k2),
                   k4 = f(t0 + h, y + h * k3);
      y += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    worst = std::max(worst, std::abs(y - rho[s + 1]) / rho[s + 1]);
  }
  EXPECT_LT(worst, 0.01);
}

TEST(Stepper, GridConvergenceOfTerminalMean) {
  for (double eps : {0.2, 0.1}) {
    SchemeConfig sc;
    const auto coarse = run_to_horizon(section5(eps), sc, Grid1D::symmetric(2.0, 0.02), start(eps));
    const auto fine = run_to_horizon(section5(eps), sc, Grid1D::symmetric(2.0, 0.01), start(eps));
    EXPECT_LT(std::abs(coarse.records.back().m1 - fine.records.back().m1), 1e-3) << "eps " << eps;
  }
}

TEST(Stepper, Section5PopulationTracksEquilibrium) {
  const double eps = 0.2;
  SchemeConfig sc;
  const auto run = run_to_horizon(section5(eps), sc, Grid1D::symmetric(2.0, 0.02), start(eps));
  double worst = 0.0;
  for (const auto& r : run.records) {
    if (r.time >= 1.0) worst = std::max(worst, std::abs(r.rho - solve_equilibrium(run.spec.prey, r.m1)));
  }
  EXPECT_LT(worst, std::pow(eps, 0.9));
}

TEST(Stepper, NegativeNodeIsStabilityError) {
  const double eps = 0.2;
  SchemeConfig sc;
  sc.dt = 3.0 * eps * eps;
  sc.safety_factor = 6.0;
  sc.allow_unsafe_dt = true;
  sc.horizon = 2.0;
  try {
    run_to_horizon(single(eps, 1.0, 1.0), sc, Grid1D::symmetric(2.0, 0.02), gaussian_start(0.8, 0.1), {true, {}});
    FAIL() << "expected a stability error";
  } catch (const StabilityError& e) {
    EXPECT_GE(e.step(), 1u);
  }
}
