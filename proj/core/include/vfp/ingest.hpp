#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "vfp/timeutil.hpp"
#include "vfp/topology.hpp"

namespace vfp {

/// Column-major hourly series for one zone, sorted by hour, hours unique.
struct ZoneSeries {
  std::vector<EpochHour> hours;
  std::vector<double> price;
  std::vector<double> wind;
  std::vector<double> solar;
  std::vector<double> load;

  std::size_t size() const { return hours.size(); }
  /// [first, last) index range of hours falling inside the period.
  std::pair<std::size_t, std::size_t> range(const Period& p) const;
};

/// Directed net-export series (positive = export from `from` to `to`).
struct BorderSeries {
  std::vector<EpochHour> hours;
  std::vector<double> net_export;
};

struct Rejection {
  std::string file;
  std::size_t line = 0;
  std::string zone;  // or "from>to" for exchange rows
  std::string reason;
};

struct ZoneLoadStats {
  std::int64_t retained = 0;
  std::int64_t rejected = 0;
  std::int64_t gaps = 0;  // missing hours between first and last retained
};

struct LoadReport {
  std::map<std::string, ZoneLoadStats> zones;
  std::vector<Rejection> rejections;
  std::int64_t exchange_rows = 0;
  std::int64_t exchange_rejected = 0;

  nlohmann::json to_json() const;
};

struct LoadPaths {
  std::vector<std::filesystem::path> hourly;
  std::vector<std::filesystem::path> exchanges;
};

/// Immutable indexed store of hourly zonal data. Safe to share across
/// concurrent readers once constructed.
class HourlyStore {
 public:
  static constexpr std::string_view kHourlyHeader =
      "zone,timestamp_utc,price,wind_gen,solar_gen,load";
  static constexpr std::string_view kExchangeHeader =
      "zone_from,zone_to,timestamp_utc,net_export";

  /// Loads and validates CSV inputs against the topology. Hard errors:
  /// malformed rows, duplicate (zone, hour), unknown zone ids,
  /// timezone-ambiguous timestamps. Soft rejections (recorded in the
  /// report): rows outside zone lifecycle, non-positive load, negative
  /// generation, exchange rows for non-adjacent pairs.
  static HourlyStore load(const LoadPaths& paths, ZoneTopology topology,
                          unsigned threads = 1);

  /// Assembles a store from already validated in-memory series (synthetic
  /// generators). Series must be sorted and unique per zone.
  static HourlyStore from_parts(
      ZoneTopology topology, std::map<std::string, ZoneSeries> zones,
      std::map<std::pair<std::string, std::string>, BorderSeries> borders);

  const ZoneTopology& topology() const { return topo_; }
  const LoadReport& report() const { return report_; }

  const ZoneSeries* series(std::string_view zone) const;
  const std::map<std::string, ZoneSeries>& zones() const { return zones_; }
  const std::map<std::pair<std::string, std::string>, BorderSeries>& borders()
      const {
    return borders_;
  }

  /// Net flow from `a` to `b` merged over both stored directions.
  /// Hours ascending; missing direction contributes zero.
  BorderSeries net_flow(const std::string& a, const std::string& b) const;

  /// Observed hours divided by hours in the period; 0 when no data.
  double coverage(std::string_view zone, const Period& p) const;

  std::int64_t total_rows() const;

  /// Writes hourly.csv and exchanges.csv into dir; reloading them with the
  /// same topology round-trips bit-exactly.
  void emit(const std::filesystem::path& dir) const;

 private:
  ZoneTopology topo_;
  std::map<std::string, ZoneSeries> zones_;
  std::map<std::pair<std::string, std::string>, BorderSeries> borders_;
  LoadReport report_;
};

/// Monthly fuel and carbon price series, shared by all zones.
struct FuelPriceSeries {
  std::vector<std::int64_t> month_keys;  // strictly increasing
  std::vector<double> gas;   // currency per MWh thermal
  std::vector<double> coal;  // currency per MWh thermal
  std::vector<double> eua;   // currency per tCO2

  static constexpr std::string_view kHeader = "month,gas,coal,eua";
  static FuelPriceSeries load_csv(const std::filesystem::path& path);
  void emit(const std::filesystem::path& path) const;

  /// Index of a month key, or -1.
  int find(std::int64_t month_key) const;
};

struct HydroCapacity {
  double pumped_mw = 0.0;
  double reservoir_mw = 0.0;
};

/// Annual installed hydro capacities per zone (capacities, not generation).
struct HydroCapacityTable {
  std::map<std::pair<std::string, int>, HydroCapacity> rows;

  static constexpr std::string_view kHeader = "zone,year,pumped_mw,reservoir_mw";
  static HydroCapacityTable load_csv(const std::filesystem::path& path);
  void emit(const std::filesystem::path& path) const;

  const HydroCapacity* find(const std::string& zone, int year) const;
};

}  // namespace vfp
