#include "ecoevo/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ecoevo/errors.hpp"

namespace ecoevo {

std::vector<double> integrate_rk4(const ScalarField& rhs, double z0, const std::vector<double>& times,
                                  double dt) {
  if (!(dt > 0.0)) throw ContractError("integrate_rk4 needs dt > 0");
  std::vector<double> out;
  out.reserve(times.size());
  double t = 0.0;
  double z = z0;
  for (double target : times) {
    if (target < t) throw ContractError("integrate_rk4: sample times must be ascending");
    const double span = target - t;
    const auto n = static_cast<std::size_t>(std::ceil(span / dt - 1e-9));
    if (n > 0) {
      const double h = span / static_cast<double>(n);
      const double t_start = t;
      for (std::size_t i = 0; i < n; ++i) {
        const double ti = t_start + static_cast<double>(i) * h;
        const double k1 = rhs(ti, z);
        const double k2 = rhs(ti + 0.5 * h, z + 0.5 * h * k1);
        const double k3 = rhs(ti + 0.5 * h, z + 0.5 * h * k2);
        const double k4 = rhs(ti + h, z + h * k3);
        z += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      }
      if (!std::isfinite(z)) throw NumericalError("integrate_rk4: non-finite state");
    }
    t = target;
    out.push_back(z);
  }
  return out;
}

std::vector<double> sample_times(double horizon, double stride) {
  if (!(stride > 0.0)) throw ContractError("sample_times needs a positive stride");
  std::vector<double> t;
  const auto n = static_cast<std::size_t>(std::floor(horizon / stride + 1e-9));
  for (std::size_t i = 0; i <= n; ++i) t.push_back(static_cast<double>(i) * stride);
  if (horizon - t.back() > 1e-12 * std::max(1.0, horizon)) t.push_back(horizon);
  return t;
}

double growth_G(const PredatorPreySpec& spec, double x, double I) {
  const double C = spec.contact(x);
  const double d = spec.relief(x);
  switch (spec.family) {
    case PreyMortalityFamily::section5_scheme:
      return spec.r1 + d - (C * C + spec.kappa1) * I;
    case PreyMortalityFamily::holling_reduced: {
      const double F = holling_response(spec, x, I, C);
      return spec.r1 - (std::pow(F, spec.g_exponent) + spec.kappa1 - d) * I;
    }
  }
  return 0.0;
}

double growth_G_dI(const PredatorPreySpec& spec, double x, double I) {
  const double h = 1e-6 * std::max(1.0, std::abs(I));
  return (growth_G(spec, x, I + h) - growth_G(spec, x, I - h)) / (2.0 * h);
}

namespace {

double equilibrium_upper_bound(const PredatorPreySpec& spec, double x) {
  const double d = spec.relief(x);
  if (spec.family == PreyMortalityFamily::section5_scheme) {
    if (!(spec.r1 + d > 0.0) || !(spec.kappa1 > 0.0)) {
      throw AssumptionError("no positive equilibrium at x = " + std::to_string(x));
    }
    return 2.0 * (spec.r1 + d) / spec.kappa1;
  }
  if (!(spec.kappa1 - d > 0.0)) {
    throw AssumptionError("kappa1 - delta(x) <= 0 at x = " + std::to_string(x));
  }
  return 2.0 * spec.r1 / (spec.kappa1 - d);
}

int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

}  // namespace

double solve_equilibrium_numeric(const PredatorPreySpec& spec, double x,
                                 const EquilibriumOptions& options) {
  const double upper = equilibrium_upper_bound(spec, x);
  const std::size_t n = std::max<std::size_t>(options.scan_points, 2);
  auto G = [&](double I) { return growth_G(spec, x, I); };

  double lo = 0.0;
  double hi = 0.0;
  int crossings = 0;
  double prev_I = 0.0;
  double prev_G = G(0.0);
  if (prev_G <= 0.0) throw AssumptionError("G(x, 0) <= 0: the prey cannot grow at x = " + std::to_string(x));
  for (std::size_t k = 1; k <= n; ++k) {
    const double I = upper * static_cast<double>(k) / static_cast<double>(n);
    const double g = G(I);
    if (sign_of(g) != sign_of(prev_G) && sign_of(g) != 0) {
      if (crossings == 0) {
        lo = prev_I;
        hi = I;
      }
      ++crossings;
    } else if (g == 0.0) {
      if (crossings == 0) lo = hi = I;
      ++crossings;
      // a simple root lands exactly on a scan point: continue as if already across it
      prev_G = -prev_G;
      prev_I = I;
      continue;
    }
    if (g != 0.0) {
      prev_G = g;
      prev_I = I;
    }
  }
  if (crossings == 0) throw AssumptionError("no equilibrium population at x = " + std::to_string(x));
  if (crossings > 1) {
    throw AssumptionError("equilibrium population is not unique at x = " + std::to_string(x));
  }
  if (lo == hi) return lo;

  double g_lo = G(lo);
  while (hi - lo > 1e-6) {
    const double mid = 0.5 * (lo + hi);
    const double g = G(mid);
    if (g == 0.0) return mid;
    if (sign_of(g) == sign_of(g_lo)) {
      lo = mid;
      g_lo = g;
    } else {
      hi = mid;
    }
  }
  double I = 0.5 * (lo + hi);
  for (int it = 0; it < options.max_iterations; ++it) {
    const double g = G(I);
    const double dg = growth_G_dI(spec, x, I);
    if (g == 0.0 || dg == 0.0) break;
    double next = I - g / dg;
    if (next <= lo || next >= hi) next = 0.5 * (lo + hi);
    if (sign_of(G(next)) == sign_of(g_lo)) {
      lo = next;
    } else {
      hi = next;
    }
    const double step = std::abs(next - I);
    I = next;
    if (step <= options.tolerance * std::max(1.0, std::abs(I))) break;
  }
  return I;
}

double solve_equilibrium(const PredatorPreySpec& spec, double x, const EquilibriumOptions& options) {
  if (spec.family == PreyMortalityFamily::section5_scheme) {
    const double C = spec.contact(x);
    const double I = (spec.r1 + spec.relief(x)) / (C * C + spec.kappa1);
    if (!(I > 0.0)) throw AssumptionError("no positive equilibrium at x = " + std::to_string(x));
    return I;
  }
  return solve_equilibrium_numeric(spec, x, options);
}

double effective_gradient(const PredatorPreySpec& spec, double x) {
  return selection_gradient(spec, x, solve_equilibrium(spec, x));
}

double convexity_certificate(const PredatorPreySpec& spec, double x, double step) {
  const double I = solve_equilibrium(spec, x);
  const double C = spec.contact(x);
  auto m = [&](double y) { return eval_mortality_prey(spec, y, I, C); };
  return (m(x + step) - 2.0 * m(x) + m(x - step)) / (step * step);
}

FixedPoint find_fixed_point(const PredatorPreySpec& spec, const FixedPointOptions& options) {
  const std::size_t n = std::max<std::size_t>(options.scan_points, 3);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> xs(n);
  std::vector<double> gs(n, nan);
  for (std::size_t k = 0; k < n; ++k) {
    xs[k] = options.lo + (options.hi - options.lo) * static_cast<double>(k) / static_cast<double>(n - 1);
    try {
      gs[k] = effective_gradient(spec, xs[k]);
    } catch (const AssumptionError&) {
    }
  }
  // Stable crossings: the gradient goes from negative to positive.
  std::vector<std::pair<double, double>> brackets;
  std::size_t last = n;  // last valid nonzero sample
  for (std::size_t k = 0; k < n; ++k) {
    if (std::isnan(gs[k])) {
      last = n;
      continue;
    }
    if (gs[k] == 0.0) {
      const bool left_neg = last < n && gs[last] < 0.0;
      const bool right_pos = k + 1 < n && gs[k + 1] > 0.0;
      if (left_neg && right_pos) brackets.emplace_back(xs[k], xs[k]);
      continue;
    }
    if (last < n && gs[last] < 0.0 && gs[k] > 0.0 && last + 1 == k) {
      brackets.emplace_back(xs[last], xs[k]);
    }
    last = k;
  }
  if (brackets.empty()) {
    throw AssumptionError("selection gradient has no stable root in [" + std::to_string(options.lo) +
                          ", " + std::to_string(options.hi) + "]");
  }
  if (brackets.size() > 1) {
    throw AssumptionError("selection gradient has " + std::to_string(brackets.size()) +
                          " stable roots; the fixed point is ambiguous");
  }
  auto g = [&](double x) { return effective_gradient(spec, x); };
  double lo = brackets.front().first;
  double hi = brackets.front().second;
  double x = lo;
  if (lo != hi) {
    while (hi - lo > 1e-6) {
      const double mid = 0.5 * (lo + hi);
      const double gm = g(mid);
      if (gm == 0.0) {
        lo = hi = mid;
        break;
      }
      (gm < 0.0 ? lo : hi) = mid;
    }
    x = 0.5 * (lo + hi);
    for (int it = 0; it < 100 && lo != hi; ++it) {
      const double gx = g(x);
      if (gx == 0.0) break;
      const double h = 1e-7;
      const double dg = (g(x + h) - g(x - h)) / (2.0 * h);
      double next = dg > 0.0 ? x - gx / dg : 0.5 * (lo + hi);
      if (next <= lo || next >= hi) next = 0.5 * (lo + hi);
      (g(next) < 0.0 ? lo : hi) = next;
      const double step = std::abs(next - x);
      x = next;
      if (step <= options.tolerance) break;
    }
  }
  FixedPoint fp;
  fp.x_star = x;
  fp.i_star = solve_equilibrium(spec, x);
  fp.convexity = convexity_certificate(spec, x);
  return fp;
}

Band discover_band(const PredatorPreySpec& spec, const FixedPoint& fp, double step, double limit) {
  auto admissible = [&](double x) {
    try {
      const double I = solve_equilibrium_numeric(spec, x);
      if (!(growth_G_dI(spec, x, I) < 0.0)) return false;
      return convexity_certificate(spec, x) > 0.0;
    } catch (const AssumptionError&) {
      return false;
    }
  };
  Band band;
  band.center = fp.x_star;
  band.i_lower = band.i_upper = fp.i_star;
  if (!admissible(fp.x_star)) return band;
  double accepted = 0.0;
  for (double d = step; d <= limit + 1e-12; d += step) {
    if (!admissible(fp.x_star - d) || !admissible(fp.x_star + d)) break;
    accepted = d;
    for (double x : {fp.x_star - d, fp.x_star + d}) {
      const double I = solve_equilibrium(spec, x);
      band.i_lower = std::min(band.i_lower, I);
      band.i_upper = std::max(band.i_upper, I);
    }
  }
  band.half_width = accepted;
  return band;
}

TheoryTrajectory integrate_canonical(const PredatorPreySpec& spec, const Band& band, double z_eps0,
                                     double z_00, const std::vector<double>& times, double dt) {
  auto rhs = [&](double, double z) {
    if (!(std::abs(z - band.center) < band.half_width)) {
      throw BandExitError("mean trait " + std::to_string(z) + " left the band |x - " +
                          std::to_string(band.center) + "| < " + std::to_string(band.half_width));
    }
    return -effective_gradient(spec, z);
  };
  TheoryTrajectory traj;
  traj.times = times;
  traj.zbar_eps = integrate_rk4(rhs, z_eps0, times, dt);
  traj.zbar_0 = integrate_rk4(rhs, z_00, times, dt);
  traj.i_of_z.reserve(times.size());
  for (double z : traj.zbar_eps) traj.i_of_z.push_back(solve_equilibrium(spec, z));
  return traj;
}

TheoryTrajectory integrate_canonical(const SingleSpeciesSpec& spec, double z_eps0, double z_00,
                                     const std::vector<double>& times, double dt) {
  auto rhs = [&](double t, double z) { return -eval_mortality_single_dx(spec, z, t); };
  TheoryTrajectory traj;
  traj.times = times;
  traj.zbar_eps = integrate_rk4(rhs, z_eps0, times, dt);
  traj.zbar_0 = integrate_rk4(rhs, z_00, times, dt);
  traj.rho_limit = limiting_population_single(spec, traj).rho;
  return traj;
}

LimitingPopulation limiting_population_single(const SingleSpeciesSpec& spec,
                                              const TheoryTrajectory& traj) {
  if (traj.zbar_0.size() != traj.times.size()) {
    throw ContractError("limiting_population_single needs zbar_0 samples");
  }
  LimitingPopulation out;
  out.rho.reserve(traj.times.size());
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const double t = traj.times[i];
    const double rho = (spec.birth(t) - eval_mortality_single(spec, traj.zbar_0[i], t)) / spec.kappa;
    out.rho.push_back(rho);
    if (rho <= 0.0) out.nonpositive_times.push_back(t);
  }
  return out;
}

namespace {

// Weights of  int_0^D g(u) e^{-lambda (D-u)} du  for g linear between g0 and g1.
struct ExpWeights {
  double decay;
  double w0;
  double w1;
};

ExpWeights exp_weights(double lambda, double D) {
  const double mu = lambda * D;
  const double one_minus_e = -std::expm1(-mu);
  double c;  // (1 - phi1(mu))/mu with phi1(mu) = (1 - e^{-mu})/mu
  if (mu < 1e-2) {
    c = 0.5 - mu / 6.0 + mu * mu / 24.0 - mu * mu * mu / 120.0 + mu * mu * mu * mu / 720.0;
  } else {
    c = (1.0 - one_minus_e / mu) / mu;
  }
  const double w1 = D * c;
  return {std::exp(-mu), one_minus_e / lambda - w1, w1};
}

// One pass of the H map on a uniform grid. h(t_n), xd(t_n) given at the nodes.
std::vector<double> hbar_map(const std::vector<double>& times, const std::vector<double>& h,
                             const std::vector<double>& xd, double lambda, double eta2,
                             double epsilon, const ExpWeights& w) {
  const std::size_t n = times.size();
  std::vector<double> out(n);
  double j1 = 0.0;
  double j2 = 0.0;
  out[0] = 2.0;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    j1 = w.decay * j1 + w.w0 * h[k] * h[k] + w.w1 * h[k + 1] * h[k + 1];
    j2 = w.decay * j2 + w.w0 * h[k] * xd[k] + w.w1 * h[k + 1] * xd[k + 1];
    out[k + 1] = 1.0 + std::exp(-lambda * times[k + 1]) + eta2 / (epsilon * epsilon) * j1 +
                 eta2 / epsilon * j2;
  }
  return out;
}

}  // namespace

HbarSolution solve_hbar(double eta, double eta2, double L_X, const std::function<double(double)>& xdot,
                        double epsilon, double horizon, const HbarOptions& options) {
  if (!(eta > 0.0) || !(epsilon > 0.0) || !(L_X > 0.0) || !(horizon > 0.0) || eta2 < 0.0) {
    throw ContractError("solve_hbar needs eta, epsilon, L_X, horizon > 0 and eta2 >= 0");
  }
  const double bound = eta / (9.0 + 3.0 * L_X * eta);
  if (eta2 > bound * (1.0 + 1e-12)) {
    throw ContractError("solve_hbar: eta2 = " + std::to_string(eta2) +
                        " exceeds the contraction bound eta/(9 + 3 L_X eta) = " + std::to_string(bound));
  }
  const double lambda = eta / (epsilon * epsilon);
  const auto n_steps = static_cast<std::size_t>(std::ceil(horizon * lambda / options.relative_step));
  const double D = horizon / static_cast<double>(n_steps);
  const ExpWeights w = exp_weights(lambda, D);

  HbarSolution sol;
  sol.times.resize(n_steps + 1);
  std::vector<double> xd(n_steps + 1);
  for (std::size_t k = 0; k <= n_steps; ++k) {
    sol.times[k] = k == n_steps ? horizon : static_cast<double>(k) * D;
    xd[k] = std::abs(xdot(sol.times[k]));
  }
  // Drift condition: (1/eps) int_0^t |X'| e^{-lambda (t-s)} ds < L_X.
  double j = 0.0;
  for (std::size_t k = 0; k < n_steps; ++k) {
    j = w.decay * j + w.w0 * xd[k] + w.w1 * xd[k + 1];
    sol.drift_integral = std::max(sol.drift_integral, j / epsilon);
  }
  if (!(sol.drift_integral < L_X)) {
    throw ContractError("solve_hbar: drift integral " + std::to_string(sol.drift_integral) +
                        " violates the bound eps L_X with L_X = " + std::to_string(L_X));
  }

  std::vector<double> h(n_steps + 1, 2.0);
  for (int it = 1; it <= options.max_iterations; ++it) {
    auto next = hbar_map(sol.times, h, xd, lambda, eta2, epsilon, w);
    double diff = 0.0;
    for (std::size_t k = 0; k <= n_steps; ++k) diff = std::max(diff, std::abs(next[k] - h[k]));
    h = std::move(next);
    if (!std::isfinite(diff)) throw NumericalError("solve_hbar: iteration diverged");
    if (diff <= options.tolerance) {
      sol.iterations = it;
      sol.values = std::move(h);
      sol.sup = *std::max_element(sol.values.begin(), sol.values.end());
      return sol;
    }
  }
  throw NumericalError("solve_hbar: Picard iteration did not converge in " +
                       std::to_string(options.max_iterations) + " iterations");
}

double hbar_residual(const HbarSolution& sol, double eta, double eta2,
                     const std::function<double(double)>& xdot, double epsilon, int refine) {
  if (sol.times.size() < 2 || refine < 1) throw ContractError("hbar_residual: bad input");
  const double lambda = eta / (epsilon * epsilon);
  const std::size_t n = sol.times.size() - 1;
  const auto r = static_cast<std::size_t>(refine);
  std::vector<double> fine_t(n * r + 1);
  std::vector<double> fine_h(n * r + 1);
  std::vector<double> fine_x(n * r + 1);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t s = 0; s < r; ++s) {
      const double theta = static_cast<double>(s) / static_cast<double>(r);
      const std::size_t i = k * r + s;
      fine_t[i] = sol.times[k] + theta * (sol.times[k + 1] - sol.times[k]);
      fine_h[i] = (1.0 - theta) * sol.values[k] + theta * sol.values[k + 1];
    }
  }
  fine_t.back() = sol.times.back();
  fine_h.back() = sol.values.back();
  for (std::size_t i = 0; i < fine_t.size(); ++i) fine_x[i] = std::abs(xdot(fine_t[i]));
  const double D = (sol.times.back() - sol.times.front()) / static_cast<double>(n * r);
  const auto mapped = hbar_map(fine_t, fine_h, fine_x, lambda, eta2, epsilon, exp_weights(lambda, D));
  double res = 0.0;
  for (std::size_t k = 0; k <= n; ++k) res = std::max(res, std::abs(mapped[k * r] - sol.values[k]));
  return res;
}

TrackerSolution logistic_tracker(const std::function<double(double)>& alpha,
                                 const std::function<double(double)>& H, double y0, double epsilon,
                                 double horizon, double dt) {
  if (!(epsilon > 0.0) || horizon < 0.0) throw ContractError("logistic_tracker: bad epsilon or horizon");
  if (!(y0 > 0.0)) throw ExtinctionError("logistic_tracker: y0 <= 0");
  const double e2 = epsilon * epsilon;
  if (dt <= 0.0) dt = e2 / 64.0;
  const auto n = static_cast<std::size_t>(std::ceil(horizon / dt - 1e-9));
  const double step = n > 0 ? horizon / static_cast<double>(n) : 0.0;
  TrackerSolution sol;
  sol.times.reserve(n + 1);
  sol.y.reserve(n + 1);
  sol.times.push_back(0.0);
  sol.y.push_back(y0);
  double y = y0;
  for (std::size_t k = 0; k < n; ++k) {
    const double tm = (static_cast<double>(k) + 0.5) * step;
    const double a = alpha(tm);
    const double Hm = H(tm);
    double z = y;
    for (int it = 0; it < 50; ++it) {
      const double ym = 0.5 * (y + z);
      const double F = e2 * (z - y) / step - a * (Hm - ym) * ym;
      const double dF = e2 / step - 0.5 * a * (Hm - 2.0 * ym);
      const double dz = F / dF;
      z -= dz;
      if (std::abs(dz) <= 1e-15 * std::max(1.0, std::abs(z))) break;
    }
    if (!std::isfinite(z)) throw NumericalError("logistic_tracker: non-finite state");
    if (z <= 0.0) throw ExtinctionError("logistic_tracker: y reached zero");
    y = z;
    sol.times.push_back(k + 1 == n ? horizon : static_cast<double>(k + 1) * step);
    sol.y.push_back(y);
  }
  return sol;
}

}  // namespace ecoevo
