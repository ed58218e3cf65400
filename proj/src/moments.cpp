#include "ecoevo/moments.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ecoevo/errors.hpp"

namespace ecoevo {

double mean(const DensityState& q) {
  require_normalized(q);
  std::vector<double> v(q.values.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = q.grid.node(i) * q.values[i];
  return trapezoid(v, q.grid);
}

double central_moment(const DensityState& q, int k, bool absolute) {
  if (k < 1) throw ContractError("central_moment needs k >= 1");
  const double m1 = mean(q);
  if (k == 1 && !absolute) return m1;
  std::vector<double> v(q.values.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double d = q.grid.node(i) - m1;
    v[i] = (absolute ? std::pow(std::abs(d), k) : std::pow(d, k)) * q.values[i];
  }
  return trapezoid(v, q.grid);
}

double raw_moment(const DensityState& q, int k) {
  require_normalized(q);
  std::vector<double> v(q.values.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::pow(q.grid.node(i), k) * q.values[i];
  return trapezoid(v, q.grid);
}

QuantileFunction quantile_function(const DensityState& q, std::size_t n_levels) {
  if (n_levels == 0) throw ContractError("quantile_function needs at least one level");
  auto F = cdf(q);
  // Break flat stretches so the inverse is single valued.
  for (std::size_t i = 0; i < F.size(); ++i) F[i] += static_cast<double>(i) * 1e-15;
  for (std::size_t i = 1; i < F.size(); ++i) F[i] = std::max(F[i], F[i - 1] + 1e-15);

  QuantileFunction out;
  out.levels.resize(n_levels);
  out.values.resize(n_levels);
  const double h = q.grid.spacing();
  for (std::size_t j = 0; j < n_levels; ++j) {
    const double u = (static_cast<double>(j) + 0.5) / static_cast<double>(n_levels);
    out.levels[j] = u;
    auto it = std::upper_bound(F.begin(), F.end(), u);
    if (it == F.begin()) {
      out.values[j] = q.grid.x_min();
    } else if (it == F.end()) {
      out.values[j] = q.grid.x_max();
    } else {
      const auto i = static_cast<std::size_t>(it - F.begin()) - 1;
      const double s = (u - F[i]) / (F[i + 1] - F[i]);
      out.values[j] = q.grid.node(i) + s * h;
    }
  }
  return out;
}

double wasserstein(double p, const DensityState& a, const DensityState& b, std::size_t n_levels) {
  if (!(a.grid == b.grid)) throw ContractError("wasserstein: densities live on different grids");
  if (!(p >= 1.0)) throw ContractError("wasserstein needs p >= 1");
  if (p == 1.0) {
    const auto Fa = cdf(a);
    const auto Fb = cdf(b);
    std::vector<double> d(Fa.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = std::abs(Fa[i] - Fb[i]);
    return trapezoid(d, a.grid);
  }
  const auto Qa = quantile_function(a, n_levels);
  const auto Qb = quantile_function(b, n_levels);
  double s = 0.0;
  for (std::size_t j = 0; j < n_levels; ++j) s += std::pow(std::abs(Qa.values[j] - Qb.values[j]), p);
  return std::pow(s / static_cast<double>(n_levels), 1.0 / p);
}

DensityState gaussian_density(const Grid1D& grid, double mu, double sigma) {
  if (!(sigma > 0.0)) throw ContractError("gaussian_density needs sigma > 0");
  std::vector<double> v(grid.size());
  const double c = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * sigma);
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double u = (grid.node(i) - mu) / sigma;
    v[i] = c * std::exp(-0.5 * u * u);
  }
  DensityState g(grid, std::move(v), 0.0, DensityKind::normalized);
  normalize_in_place(g.values, g.grid);
  return g;
}

DensityState gaussian_ansatz(double mu, double epsilon, const Grid1D& grid) {
  if (mu < grid.x_min() || mu > grid.x_max()) {
    throw ContractError("gaussian_ansatz: mean outside the grid");
  }
  return gaussian_density(grid, mu, epsilon);
}

MomentRecord moment_record(const DensityState& q, double epsilon, int k0) {
  MomentRecord r;
  r.time = q.time;
  r.m1 = mean(q);
  r.m2c = central_moment(q, 2);
  r.m2k0c = central_moment(q, 2 * k0);
  r.m_abs_3 = central_moment(q, 3, true);
  const double mu = std::clamp(r.m1, q.grid.x_min(), q.grid.x_max());
  r.w1_to_gaussian = wasserstein(1.0, q, gaussian_ansatz(mu, epsilon, q.grid));
  return r;
}

}  // namespace ecoevo
