#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ecoevo/models.hpp"
#include "ecoevo/theory.hpp"

namespace ecoevo {

struct AuditCheck {
  std::string name;
  bool passed = false;
  double margin = 0.0;  ///< positive when satisfied; how far from the boundary
  std::string detail;
};

struct AuditOptions {
  double window = 1.0;   ///< half-width L of the hypothesis window around the optimum
  int k0 = 2;
  double L_X = 1.0;
  double horizon = 16.0;
  std::size_t samples = 401;
  /// Mean trait of the initial condition, if known.
  std::optional<double> initial_mean;
  /// Trait domain used for the kappa1 - delta check.
  double x_min = -2.0;
  double x_max = 2.0;
};

struct AuditReport {
  std::vector<AuditCheck> checks;
  double eta = 0.0;
  std::optional<FixedPoint> fixed_point;
  std::optional<Band> band;

  bool passed() const;
  std::string summary() const;
};

/// H0-H3 on the window, H4 dissipation rate eta, H7 drift bound.
AuditReport audit_single(const SingleSpeciesSpec& spec, const AuditOptions& options = {});

/// A0-A3 and eta for the predator-prey model.
AuditReport audit_predator_prey(const PredatorPreySpec& spec, const AuditOptions& options = {});

}  // namespace ecoevo
