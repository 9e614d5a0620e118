#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vfp/estimate.hpp"
#include "vfp/ingest.hpp"
#include "vfp/panel.hpp"

namespace vfp {

/// Direct panel generator: draws zone-level moderators and penetration
/// processes, builds the regression design exactly as the panel module
/// does, then y = X beta_true + AR(1) noise.
struct DgpConfig {
  int n_zones = 30;
  int min_periods = 60;   // per-zone window length, staggered entry
  int max_periods = 108;
  int start_year = 2015;
  std::uint64_t seed = 1;
  /// Truth coefficients keyed by design column name; absent keys are zero.
  /// Unknown keys are a hard error.
  std::map<std::string, double> beta;
  double rho = 0.5;     // AR(1) of the error term, |rho| < 1
  double sigma = 0.02;  // error innovation scale

  // Penetration processes: zone base level plus AR(1) deviations with a
  // seasonal harmonic.
  double pen_base_mean = 0.10, pen_base_sd = 0.05;
  double pen_within_sd = 0.04, pen_ar = 0.6, pen_seasonal_amp = 0.02;
  double other_base_mean = 0.06, other_base_sd = 0.03;
  double other_within_sd = 0.03;

  // Controls.
  double hydro_pump_base_mean = 0.05, hydro_pump_base_sd = 0.04,
         hydro_pump_within_sd = 0.01;
  double hydro_resv_base_mean = 0.15, hydro_resv_base_sd = 0.10,
         hydro_resv_within_sd = 0.02;
  double corr_base_mean = 0.10, corr_base_sd = 0.15, corr_within_sd = 0.05;
  double cov_base_mean = 0.60, cov_base_sd = 0.15, cov_within_sd = 0.08;
  double gas_coal_mean = 1.5, gas_coal_sd = 0.3, gas_coal_ar = 0.8;

  // Topology and interconnection.
  int extra_edges = 8;  // chords on top of the ring
  double ic_log_mean = 6.0, ic_log_sd = 0.7;
  double load_log_mean = 8.5, load_log_sd = 0.6;

  ControlSet controls = ControlSet::full;
};

struct PanelTruth {
  /// Truth vector aligned with the design columns (zeros filled in).
  std::map<std::string, double> beta;
  DesignMatrix design;  // internal design, y populated
  PanelInput input;     // metrics-shaped table with vf = y
  std::map<std::string, double> ic_by_zone;  // raw normalized IC
  ModelSpec spec;       // the spec the design was assembled under

  void write_truth_json(const std::filesystem::path& path) const;
};

PanelTruth generate_panel(const DgpConfig& cfg);

/// Hourly merit-order market simulator: linear zonal supply curves, shared
/// synoptic weather factors, greedy pairwise trade clearing toward price
/// equalization subject to interconnector limits. An oracle for the full
/// pipeline, not a market model.
struct MeritOrderConfig {
  int n_zones = 4;
  int n_days = 365;
  int start_year = 2015;
  std::uint64_t seed = 1;

  // Zonal supply curve price = intercept + slope * conventional generation.
  double supply_intercept_lo = 15.0, supply_intercept_hi = 35.0;
  double supply_slope_lo = 0.004, supply_slope_hi = 0.008;

  double base_load_lo = 5000.0, base_load_hi = 15000.0;  // MWh/h
  double load_daily_amp = 0.20, load_weekly_amp = 0.06, load_noise = 0.02;

  // Renewable capacities as fractions of zone base load.
  double wind_cap_frac_lo = 0.20, wind_cap_frac_hi = 0.50;
  double solar_cap_frac_lo = 0.15, solar_cap_frac_hi = 0.40;

  // Capacity-factor processes: day-scale AR(1) factors shared across zones
  // (weight) and zone-specific remainders; wind is broad within the day,
  // solar follows a clear-sky bell scaled by cloud factors.
  double wind_common_weight = 0.60;
  double solar_common_weight = 0.88;
  double wind_day_ar = 0.75;
  double wind_hour_sd = 0.04;
  double solar_day_ar = 0.70;

  // Interconnector limits as a fraction of the smaller zone's base load.
  double ic_frac_lo = 0.05, ic_frac_hi = 0.40;
  int extra_edges = 1;

  std::optional<double> price_floor;       // unset: negative prices retained
  std::optional<double> max_supply_frac;   // conventional capacity cap

  // Exogenous regressor plumbing emitted alongside the market data.
  double hydro_frac_hi = 0.20;
  double gas_mean = 25.0, coal_mean = 12.0, eua_mean = 25.0;
};

struct SynthDataset {
  HourlyStore store;  // topology embedded
  FuelPriceSeries fuel;
  HydroCapacityTable hydro;
  // Zone supply parameters, for clearing-consistency checks.
  std::vector<std::string> zone_ids;
  std::vector<double> supply_intercept;
  std::vector<double> supply_slope;

  /// Writes hourly.csv, exchanges.csv, topology.txt, fuel_prices.csv,
  /// hydro_capacities.csv into dir.
  void emit(const std::filesystem::path& dir) const;
};

SynthDataset generate_hourly(const MeritOrderConfig& cfg);

}  // namespace vfp
