#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vfp/estimate.hpp"

namespace vfp {

struct ConditionalEffect {
  std::string variable;
  std::string moderator;
  double m = 0;  // moderator value minus its grand mean
  double effect = 0;
  double std_error = 0;
  double ci_low = 0;   // effect - 1.96*se
  double ci_high = 0;  // effect + 1.96*se
};

/// effect = beta_base + beta_int * m;
/// var = Var(base) + m^2 Var(int) + 2 m Cov(base, int).
ConditionalEffect conditional_effect(const ModelResult& result,
                                     const std::string& base,
                                     const std::string& interaction, double m);

struct ZoneEffect {
  std::string zone;
  double ic_centered = 0;
  ConditionalEffect domestic;
  ConditionalEffect neighboring;
  double combined = 0;  // domestic + neighboring at the zone's IC level
  double combined_se = 0;
  double ci_low = 0, ci_high = 0;
};

struct ZoneEffectsResult {
  std::vector<ZoneEffect> zones;
  /// Effects at the sample-average IC (m = 0): the base coefficients.
  double combined_at_mean = 0;
  double combined_at_mean_se = 0;
  std::vector<std::string> warnings;

  void emit(const std::filesystem::path& path) const;
};

/// Per-zone conditional effects of domestic and neighboring penetration at
/// the zone's interconnector capacity, and their sum with a delta-method
/// standard error covering both interaction terms. ic_by_zone holds raw
/// normalized IC values; centering comes from the fitted design.
ZoneEffectsResult zone_effects(const ModelResult& result,
                               const std::map<std::string, double>& ic_by_zone);

struct CurvePoint {
  double m = 0;  // moderator minus grand mean
  double effect = 0;
  double std_error = 0;
  double ci_low = 0, ci_high = 0;
};

struct ModeratorCurve {
  std::string variable;
  std::string moderator;
  std::vector<CurvePoint> points;
  /// m where the effect crosses zero, when the interaction is nonzero and
  /// the crossing lies inside the grid range.
  std::optional<double> zero_crossing;
};

ModeratorCurve moderator_curve(const ModelResult& result,
                               const std::string& base,
                               const std::string& interaction, double m_lo,
                               double m_hi, int grid_points);

/// Builds effect curves of domestic penetration over every estimated
/// cross-level moderator, spanning the observed (centered) moderator range
/// in the design. grid_points defaults to 41.
std::vector<ModeratorCurve> moderator_curves(const ModelResult& result,
                                             const DesignMatrix& design,
                                             int grid_points = 41);

void emit_curves(const std::vector<ModeratorCurve>& curves,
                 const std::filesystem::path& path);

}  // namespace vfp
