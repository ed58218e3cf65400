#include "ecoevo/audit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ecoevo/errors.hpp"

namespace ecoevo {

bool AuditReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const AuditCheck& c) { return c.passed; });
}

std::string AuditReport::summary() const {
  std::ostringstream os;
  for (const auto& c : checks) {
    os << (c.passed ? "PASS " : "FAIL ") << c.name << "  margin=" << c.margin;
    if (!c.detail.empty()) os << "  (" << c.detail << ")";
    os << '\n';
  }
  return os.str();
}

namespace {

std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  return v;
}

AuditCheck check(std::string name, double margin, std::string detail = {}) {
  return {std::move(name), margin > 0.0, margin, std::move(detail)};
}

}  // namespace

AuditReport audit_single(const SingleSpeciesSpec& spec, const AuditOptions& o) {
  AuditReport rep;
  const auto ys = linspace(-o.window, o.window, std::max<std::size_t>(o.samples, 3));
  const auto& m = spec.mortality;
  double m_min = std::numeric_limits<double>::infinity();
  double m_max = -m_min;
  double curv_min = m_min;
  double am = 0.0;
  const double p = m.growth_exponent();
  for (double y : ys) {
    m_min = std::min(m_min, m.value(y));
    m_max = std::max(m_max, m.value(y));
    curv_min = std::min(curv_min, m.d2(y));
    am = std::max(am, std::abs(m.d3(y)) / (1.0 + std::pow(std::abs(y), p - 1.0)));
  }
  const double m_at_optimum = m.value(0.0);
  {
    AuditCheck c = check("H0", 1.0, "min m = " + std::to_string(m_min));
    c.passed = m_min >= 0.0 && std::abs(m_at_optimum) <= 1e-12;
    c.margin = c.passed ? m_min + 1.0 : std::min(m_min, -std::abs(m_at_optimum));
    if (!c.passed) c.detail += ", m(optimum) = " + std::to_string(m_at_optimum);
    rep.checks.push_back(c);
  }
  {
    AuditCheck c = check("H1", curv_min, "A0 = " + std::to_string(curv_min));
    if (std::abs(m.d1(0.0)) > 1e-12) {
      c.passed = false;
      c.margin = -std::abs(m.d1(0.0));
      c.detail += ", m'(optimum) = " + std::to_string(m.d1(0.0));
    }
    rep.checks.push_back(c);
  }
  const double r_L = spec.birth.lower_bound();
  rep.checks.push_back(check("H2", r_L - m_max,
                             "r_L = " + std::to_string(r_L) + ", max m = " + std::to_string(m_max)));
  rep.checks.push_back(check("H3", std::isfinite(am) ? 1.0 : -1.0,
                             "A_m = " + std::to_string(am) + ", p = " + std::to_string(m.growth_exponent())));
  rep.eta = r_L * (1.0 - std::pow(4.0, -o.k0)) - m_max;
  rep.checks.push_back(check("H4", rep.eta, "eta = " + std::to_string(rep.eta)));
  {
    // sup_t (1/eps) int |X'| e^{-eta (t-s)/eps^2} ds <= eps sup|X'| / eta
    const double drift = rep.eta > 0.0 ? spec.epsilon * spec.optimum.derivative_bound() / rep.eta
                                       : std::numeric_limits<double>::infinity();
    AuditCheck c = check("H7", o.L_X - drift,
                         "drift bound = " + std::to_string(drift) + ", L_X = " + std::to_string(o.L_X));
    if (std::abs(spec.optimum.value(0.0)) > 0.0) {
      c.passed = false;
      c.detail += ", X(0) != 0";
    }
    rep.checks.push_back(c);
  }
  if (o.initial_mean) {
    const double x0 = *o.initial_mean - spec.optimum.value(0.0);
    rep.checks.push_back(check("H5", o.window - std::abs(x0), "initial lag = " + std::to_string(x0)));
  }
  return rep;
}

AuditReport audit_predator_prey(const PredatorPreySpec& spec, const AuditOptions& o) {
  AuditReport rep;
  {
    double kmin = std::numeric_limits<double>::infinity();
    for (double x : linspace(o.x_min, o.x_max, std::max<std::size_t>(o.samples, 3))) {
      kmin = std::min(kmin, spec.kappa1 - spec.relief(x));
    }
    rep.checks.push_back(check("A0", kmin, "min kappa1 - delta = " + std::to_string(kmin)));
  }
  FixedPoint fp;
  try {
    FixedPointOptions fo;
    fo.lo = o.x_min;
    fo.hi = o.x_max;
    fp = find_fixed_point(spec, fo);
  } catch (const AssumptionError& e) {
    rep.checks.push_back({"A1", false, -1.0, e.what()});
    return rep;
  }
  rep.fixed_point = fp;
  const Band band = discover_band(spec, fp);
  rep.band = band;
  const double dG = growth_G_dI(spec, fp.x_star, fp.i_star);
  {
    std::ostringstream d;
    d << "x* = " << fp.x_star << ", I(x*) = " << fp.i_star << ", L1 = " << band.half_width
      << ", I in [" << band.i_lower << ", " << band.i_upper << "], dG/dI = " << dG;
    AuditCheck c = check("A1", std::min(band.half_width, -dG), d.str());
    rep.checks.push_back(c);
  }
  rep.checks.push_back(check("A2", fp.convexity, "second difference at x* = " + std::to_string(fp.convexity)));

  // Mortality landscape frozen at the equilibrium, maximized over the band.
  double m_max = -std::numeric_limits<double>::infinity();
  const double C = spec.contact(fp.x_star);
  for (double x : linspace(fp.x_star - band.half_width, fp.x_star + band.half_width, o.samples)) {
    m_max = std::max(m_max, eval_mortality_prey(spec, x, fp.i_star, C));
  }
  rep.eta = spec.r1 * (1.0 - std::pow(4.0, -o.k0)) - m_max;
  rep.checks.push_back(check("A5", rep.eta, "eta = " + std::to_string(rep.eta)));
  if (o.initial_mean) {
    rep.checks.push_back(check("A3", band.half_width - std::abs(*o.initial_mean - fp.x_star),
                               "|M1(0) - x*| = " + std::to_string(std::abs(*o.initial_mean - fp.x_star))));
  }
  return rep;
}

}  // namespace ecoevo
