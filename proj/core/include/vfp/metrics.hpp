#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "vfp/ingest.hpp"
#include "vfp/timeutil.hpp"

namespace vfp {

enum class Tech { wind, solar };
Tech parse_tech(std::string_view s);
std::string_view tech_name(Tech t);
inline Tech other_tech(Tech t) {
  return t == Tech::wind ? Tech::solar : Tech::wind;
}

// --- per-window primitives ---------------------------------------------

/// Generation-weighted spot price: sum(p*g)/sum(g).
double market_value(std::span<const double> prices, std::span<const double> gen);

/// mv divided by the plain average of prices over the window.
double value_factor(double mv, std::span<const double> prices);

/// sum(gen)/sum(load).
double penetration(std::span<const double> gen, std::span<const double> load);

/// Population standard deviation over mean. NaN when mean is zero.
double coefficient_of_variation(std::span<const double> gen);

/// Pearson correlation. NaN when either series is constant.
double load_correlation(std::span<const double> gen,
                        std::span<const double> load);

/// (gas + eua*carbon_gas) / (coal + eua*carbon_coal). Same value for every
/// zone. Hard error on non-positive denominator.
double clean_fuel_ratio(double gas, double coal, double eua, double carbon_gas,
                        double carbon_coal);

/// Quantile with linear interpolation between order statistics. q in [0,1].
double quantile_linear(std::vector<double> values, double q);

// --- interconnector capacity proxy ---------------------------------------

struct IcEdge {
  std::string from;  // focal zone
  std::string to;    // neighbor
  double ic_mw = 0.0;
};

struct InterconnectorProxy {
  /// Per (focal, neighbor) adjacent pair: 95% quantile of hourly absolute
  /// net flow over the focal zone's first sample year. Time-invariant.
  std::vector<IcEdge> edges;
  std::map<std::string, double> zone_total_mw;
  /// Zone total divided by the zone's mean hourly load over its first
  /// sample year.
  std::map<std::string, double> zone_normalized;
  std::vector<std::string> warnings;

  double edge_mw(const std::string& from, const std::string& to) const;
  void emit(const std::filesystem::path& path) const;
};

InterconnectorProxy interconnector_proxy(const HourlyStore& store);

// --- per-zone-period metrics table ---------------------------------------

struct ZonePeriodMetrics {
  int zone = -1;
  Period period{Aggregation::monthly, 0};
  Tech tech = Tech::wind;
  double mv = 0, avg_price = 0, vf = 0, penetration = 0;
  double cov = 0, load_corr = 0;  // NaN when undefined for the window
  double gen_total = 0;
};

struct MetricsOptions {
  double min_coverage = 0.9;
  /// Window generation share of load below which the observation is flagged
  /// "insufficient generation" and excluded.
  double min_gen_share = 0.001;
  /// Zone-technology inclusion: sample-average penetration threshold.
  double min_avg_penetration = 0.005;
  double carbon_gas = 0.202;   // tCO2 per MWh thermal
  double carbon_coal = 0.340;  // tCO2 per MWh thermal
};

struct ExclusionCount {
  std::string zone;
  std::string reason;
  std::int64_t count = 0;
  std::string first_period;
};

struct MetricsTable {
  Aggregation level = Aggregation::monthly;
  std::vector<std::string> zone_ids;  // index space for ZonePeriodMetrics
  std::vector<ZonePeriodMetrics> rows;
  /// Penetration for every coverage-passing (zone, period, tech), with no
  /// generation minimum: the physical quantity feeding neighbors' spatial
  /// lags even when the zone itself is excluded from a model.
  std::map<std::pair<int, std::int64_t>, double> penetration_all[2];
  /// Clean gas-coal price ratio per period key (common across zones).
  std::map<std::int64_t, double> fuel_ratio;
  /// Normalized hydro capacities per (zone, year).
  std::map<std::pair<int, int>, double> hydro_pumped_norm;
  std::map<std::pair<int, int>, double> hydro_reservoir_norm;
  InterconnectorProxy ic;
  std::vector<ExclusionCount> exclusions;

  void count_exclusion(const std::string& zone, const std::string& reason,
                       const Period& p);
  void emit(const std::filesystem::path& path) const;
};

MetricsTable build_metrics(const HourlyStore& store,
                           const FuelPriceSeries& fuel,
                           const HydroCapacityTable& hydro, Aggregation level,
                           const MetricsOptions& opt, unsigned threads = 1);

}  // namespace vfp
