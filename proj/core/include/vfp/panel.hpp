#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vfp/metrics.hpp"
#include "vfp/spatial.hpp"
#include "vfp/timeutil.hpp"

namespace vfp {

/// One zone-period observation with every candidate regressor. Missing
/// values are NaN; rows enter a design only when all referenced regressors
/// are present (complete-case, no imputation).
struct PanelInputRow {
  int zone = -1;
  std::int64_t period_key = 0;
  double vf = 0;            // dependent variable
  double dom_pen = 0;       // own-technology domestic penetration
  double nbr_pen = 0;       // own-technology neighboring (spatially lagged)
  double dom_pen_other = 0; // cross-technology domestic penetration
  double nbr_pen_other = 0; // cross-technology neighboring penetration
  double hydro_pump = 0;    // normalized pumped-storage capacity
  double hydro_resv = 0;    // normalized reservoir capacity
  double load_corr = 0;     // generation-load correlation
  double gen_cov = 0;       // generation coefficient of variation
  double gas_coal = 0;      // clean gas-coal price ratio (common to zones)
  double ic = 0;            // normalized interconnector capacity (invariant)
};

struct PanelInput {
  Tech tech = Tech::wind;
  Aggregation level = Aggregation::monthly;
  std::vector<std::string> zone_ids;  // index space of PanelInputRow::zone
  std::vector<PanelInputRow> rows;
  std::vector<std::string> warnings;

  void emit(const std::filesystem::path& path) const;
  static PanelInput load_csv(const std::filesystem::path& path);
};

enum class Estimator { rewb, fe };
Estimator parse_estimator(std::string_view s);
std::string_view estimator_name(Estimator e);

enum class ControlSet { full, penetration_only };
ControlSet parse_control_set(std::string_view s);
std::string_view control_set_name(ControlSet c);

struct ModelSpec {
  Tech technology = Tech::wind;
  Estimator estimator = Estimator::rewb;
  Aggregation aggregation = Aggregation::monthly;
  WeightScheme weights = WeightScheme::ic_weighted;
  /// Bartlett truncation lag; -1 selects floor(4*(T_mean/100)^(2/9))
  /// clamped below the shortest entity length.
  int hac_lags = -1;
  ControlSet controls = ControlSet::full;
  MetricsOptions thresholds;
};

enum class ColumnKind { within, between, time_invariant, interaction, intercept };
std::string_view column_kind_name(ColumnKind k);

/// True for columns that survive entity demeaning: within transforms and
/// the (lower-level and cross-level) interaction columns built from them.
inline bool is_within_type(ColumnKind k) {
  return k == ColumnKind::within || k == ColumnKind::interaction;
}

struct DesignMatrix {
  std::vector<std::string> names;
  std::vector<ColumnKind> kinds;
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  std::vector<int> entity;            // per-row entity index, grouped and
                                      // time-ordered within entity
  std::vector<std::string> entity_ids;
  std::vector<std::int64_t> period_keys;  // per-row
  /// Grand means subtracted from between / time-invariant columns; the
  /// effects module uses these to center moderator values consistently.
  std::map<std::string, double> centering;
  std::vector<std::string> warnings;

  int col(std::string_view name) const;
  void emit(const std::filesystem::path& path) const;
};

// --- decomposition primitives --------------------------------------------

struct WithinBetween {
  std::vector<double> within;   // x - entity mean
  std::vector<double> between;  // entity mean repeated per row
  std::vector<std::string> warnings;
};

/// Entity means over each entity's realized periods (unbalanced panel mean).
/// Reconstruction within + between == x; within sums to ~0 inside every
/// entity. Single-period entities get a zero within component and a warning.
WithinBetween within_between(std::span<const double> x,
                             std::span<const int> entity, int n_entities);

/// Demeaned product of two entity-demeaned variables, demeaned again per
/// entity, so the interaction column has zero entity means.
std::vector<double> lower_level_interaction(std::span<const double> x_within,
                                            std::span<const double> z_within,
                                            std::span<const int> entity,
                                            int n_entities);

/// Elementwise product of a within column and a centered entity-level
/// moderator (constant per entity).
std::vector<double> cross_level_interaction(
    std::span<const double> x_within, std::span<const double> m_centered);

/// Builds the full REWB design for the spec from complete-case rows:
/// within+between of own and cross-technology penetration, centered
/// time-invariant IC, within+between controls (gas-coal ratio within only),
/// double-demeaned lower-level interactions, cross-level interactions with
/// entity-average moderators and IC, intercept last. Throws NumericError on
/// rank deficiency, naming the collinear columns.
DesignMatrix assemble_design(const ModelSpec& spec, const PanelInput& input);

}  // namespace vfp
