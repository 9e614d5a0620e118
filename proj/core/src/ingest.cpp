#include "vfp/ingest.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "vfp/common.hpp"
#include "vfp/csv.hpp"

namespace vfp {

namespace {

struct HourlyRow {
  int zone = -1;
  EpochHour hour = 0;
  double price = 0, wind = 0, solar = 0, load = 0;
  int file = 0;
  std::size_t line = 0;
};

struct ExchangeRow {
  int from = -1, to = -1;
  EpochHour hour = 0;
  double net_export = 0;
  int file = 0;
  std::size_t line = 0;
};

struct ParsedFile {
  std::vector<HourlyRow> rows;
  std::vector<Rejection> rejections;
};

struct ParsedExchangeFile {
  std::vector<ExchangeRow> rows;
  std::vector<Rejection> rejections;
};

std::string loc(const std::filesystem::path& file, std::size_t line) {
  return file.string() + ":" + std::to_string(line);
}

double parse_field(std::string_view s, const std::filesystem::path& file,
                   std::size_t line, const char* what) {
  double v;
  if (!try_parse_double(s, v))
    throw DataError(loc(file, line) + ": malformed row: bad " +
                    std::string(what) + " \"" + std::string(s) + "\"");
  return v;
}

ParsedFile parse_hourly_file(const std::filesystem::path& path,
                             const ZoneTopology& topo) {
  ParsedFile out;
  CsvReader reader(path);
  reader.expect_header(HourlyStore::kHourlyHeader);
  std::vector<std::string_view> f;
  while (reader.next(f)) {
    if (f.size() != 6)
      throw DataError(loc(path, reader.line()) +
                      ": malformed row: want 6 fields, got " +
                      std::to_string(f.size()));
    HourlyRow row;
    row.zone = topo.index_of(f[0]);
    if (row.zone < 0)
      throw DataError(loc(path, reader.line()) + ": unknown zone id \"" +
                      std::string(f[0]) + "\"");
    try {
      row.hour = parse_hour_utc(f[1]);
    } catch (const DataError& e) {
      throw DataError(loc(path, reader.line()) + ": " + e.what());
    }
    row.price = parse_field(f[2], path, reader.line(), "price");
    row.wind = parse_field(f[3], path, reader.line(), "wind_gen");
    row.solar = parse_field(f[4], path, reader.line(), "solar_gen");
    row.load = parse_field(f[5], path, reader.line(), "load");
    row.line = reader.line();

    // Negative prices are retained; negative generation and non-positive
    // load are rejected, as are rows outside the zone lifecycle.
    const std::string zone_id = topo.zone(row.zone).id;
    if (!topo.in_lifecycle(row.zone, row.hour)) {
      out.rejections.push_back({path.string(), reader.line(), zone_id,
                                "timestamp outside zone lifecycle"});
      continue;
    }
    if (row.wind < 0 || row.solar < 0) {
      out.rejections.push_back(
          {path.string(), reader.line(), zone_id, "negative generation"});
      continue;
    }
    if (!(row.load > 0)) {
      out.rejections.push_back(
          {path.string(), reader.line(), zone_id, "non-positive load"});
      continue;
    }
    out.rows.push_back(row);
  }
  return out;
}

ParsedExchangeFile parse_exchange_file(const std::filesystem::path& path,
                                       const ZoneTopology& topo) {
  ParsedExchangeFile out;
  CsvReader reader(path);
  reader.expect_header(HourlyStore::kExchangeHeader);
  std::vector<std::string_view> f;
  while (reader.next(f)) {
    if (f.size() != 4)
      throw DataError(loc(path, reader.line()) +
                      ": malformed row: want 4 fields, got " +
                      std::to_string(f.size()));
    ExchangeRow row;
    row.from = topo.index_of(f[0]);
    row.to = topo.index_of(f[1]);
    if (row.from < 0)
      throw DataError(loc(path, reader.line()) + ": unknown zone id \"" +
                      std::string(f[0]) + "\"");
    if (row.to < 0)
      throw DataError(loc(path, reader.line()) + ": unknown zone id \"" +
                      std::string(f[1]) + "\"");
    if (row.from == row.to)
      throw DataError(loc(path, reader.line()) +
                      ": malformed row: self-exchange");
    try {
      row.hour = parse_hour_utc(f[2]);
    } catch (const DataError& e) {
      throw DataError(loc(path, reader.line()) + ": " + e.what());
    }
    row.net_export = parse_field(f[3], path, reader.line(), "net_export");
    row.line = reader.line();

    std::string pair_id =
        topo.zone(row.from).id + ">" + topo.zone(row.to).id;
    if (!topo.adjacent(row.from, row.to)) {
      out.rejections.push_back({path.string(), reader.line(), pair_id,
                                "zones not adjacent in topology"});
      continue;
    }
    if (!topo.in_lifecycle(row.from, row.hour) ||
        !topo.in_lifecycle(row.to, row.hour)) {
      out.rejections.push_back({path.string(), reader.line(), pair_id,
                                "timestamp outside zone lifecycle"});
      continue;
    }
    out.rows.push_back(row);
  }
  return out;
}

}  // namespace

std::pair<std::size_t, std::size_t> ZoneSeries::range(const Period& p) const {
  EpochHour lo = period_start_hour(p);
  EpochHour hi = lo + hours_in(p);
  auto first = std::lower_bound(hours.begin(), hours.end(), lo);
  auto last = std::lower_bound(hours.begin(), hours.end(), hi);
  return {std::size_t(first - hours.begin()), std::size_t(last - hours.begin())};
}

nlohmann::json LoadReport::to_json() const {
  nlohmann::json j;
  nlohmann::json zj = nlohmann::json::object();
  for (const auto& [id, st] : zones)
    zj[id] = {{"retained", st.retained},
              {"rejected", st.rejected},
              {"gaps", st.gaps}};
  j["zones"] = zj;
  nlohmann::json rj = nlohmann::json::array();
  for (const auto& r : rejections)
    rj.push_back({{"file", r.file},
                  {"line", r.line},
                  {"zone", r.zone},
                  {"reason", r.reason}});
  j["rejections"] = rj;
  j["exchange_rows"] = exchange_rows;
  j["exchange_rejected"] = exchange_rejected;
  return j;
}

HourlyStore HourlyStore::load(const LoadPaths& paths, ZoneTopology topology,
                              unsigned threads) {
  std::vector<ParsedFile> parsed(paths.hourly.size());
  parallel_for(paths.hourly.size(), threads, [&](std::size_t i) {
    parsed[i] = parse_hourly_file(paths.hourly[i], topology);
  });
  std::vector<ParsedExchangeFile> parsed_ex(paths.exchanges.size());
  parallel_for(paths.exchanges.size(), threads, [&](std::size_t i) {
    parsed_ex[i] = parse_exchange_file(paths.exchanges[i], topology);
  });

  HourlyStore store;
  store.topo_ = std::move(topology);
  const ZoneTopology& topo = store.topo_;

  for (const auto& z : topo.zones()) store.report_.zones[z.id];

  std::vector<HourlyRow> rows;
  for (std::size_t i = 0; i < parsed.size(); ++i) {
    for (auto& row : parsed[i].rows) {
      row.file = int(i);
      rows.push_back(row);
    }
    for (auto& r : parsed[i].rejections) {
      store.report_.zones[r.zone].rejected++;
      store.report_.rejections.push_back(std::move(r));
    }
  }

  std::stable_sort(rows.begin(), rows.end(),
                   [](const HourlyRow& a, const HourlyRow& b) {
                     if (a.zone != b.zone) return a.zone < b.zone;
                     return a.hour < b.hour;
                   });
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].zone == rows[i - 1].zone && rows[i].hour == rows[i - 1].hour) {
      const auto& a = rows[i - 1];
      const auto& b = rows[i];
      throw DataError("duplicate (zone, hour) for " + topo.zone(b.zone).id +
                      " at " + format_hour_utc(b.hour) + ": " +
                      loc(paths.hourly[a.file], a.line) + " and " +
                      loc(paths.hourly[b.file], b.line));
    }
  }

  for (const auto& row : rows) {
    const std::string& id = topo.zone(row.zone).id;
    ZoneSeries& zs = store.zones_[id];
    zs.hours.push_back(row.hour);
    zs.price.push_back(row.price);
    zs.wind.push_back(row.wind);
    zs.solar.push_back(row.solar);
    zs.load.push_back(row.load);
  }
  for (auto& [id, zs] : store.zones_) {
    ZoneLoadStats& st = store.report_.zones[id];
    st.retained = std::int64_t(zs.size());
    for (std::size_t i = 1; i < zs.hours.size(); ++i)
      st.gaps += zs.hours[i] - zs.hours[i - 1] - 1;
  }

  std::vector<ExchangeRow> ex_rows;
  for (std::size_t i = 0; i < parsed_ex.size(); ++i) {
    for (auto& row : parsed_ex[i].rows) {
      row.file = int(i);
      ex_rows.push_back(row);
    }
    store.report_.exchange_rejected +=
        std::int64_t(parsed_ex[i].rejections.size());
    for (auto& r : parsed_ex[i].rejections)
      store.report_.rejections.push_back(std::move(r));
  }
  std::stable_sort(ex_rows.begin(), ex_rows.end(),
                   [](const ExchangeRow& a, const ExchangeRow& b) {
                     if (a.from != b.from) return a.from < b.from;
                     if (a.to != b.to) return a.to < b.to;
                     return a.hour < b.hour;
                   });
  for (std::size_t i = 1; i < ex_rows.size(); ++i) {
    const auto& a = ex_rows[i - 1];
    const auto& b = ex_rows[i];
    if (a.from == b.from && a.to == b.to && a.hour == b.hour)
      throw DataError("duplicate exchange row for " + topo.zone(b.from).id +
                      ">" + topo.zone(b.to).id + " at " +
                      format_hour_utc(b.hour) + ": " +
                      loc(paths.exchanges[a.file], a.line) + " and " +
                      loc(paths.exchanges[b.file], b.line));
  }
  for (const auto& row : ex_rows) {
    BorderSeries& bs =
        store.borders_[{topo.zone(row.from).id, topo.zone(row.to).id}];
    bs.hours.push_back(row.hour);
    bs.net_export.push_back(row.net_export);
    store.report_.exchange_rows++;
  }

  return store;
}

HourlyStore HourlyStore::from_parts(
    ZoneTopology topology, std::map<std::string, ZoneSeries> zones,
    std::map<std::pair<std::string, std::string>, BorderSeries> borders) {
  HourlyStore store;
  store.topo_ = std::move(topology);
  store.zones_ = std::move(zones);
  store.borders_ = std::move(borders);
  for (const auto& [id, zs] : store.zones_) {
    if (store.topo_.index_of(id) < 0)
      throw DataError("from_parts: unknown zone id " + id);
    if (!std::is_sorted(zs.hours.begin(), zs.hours.end()))
      throw DataError("from_parts: unsorted hours for zone " + id);
    ZoneLoadStats& st = store.report_.zones[id];
    st.retained = std::int64_t(zs.size());
    for (std::size_t i = 1; i < zs.hours.size(); ++i) {
      if (zs.hours[i] == zs.hours[i - 1])
        throw DataError("from_parts: duplicate hour for zone " + id);
      st.gaps += zs.hours[i] - zs.hours[i - 1] - 1;
    }
  }
  for (const auto& [key, bs] : store.borders_) {
    store.report_.exchange_rows += std::int64_t(bs.hours.size());
    if (!std::is_sorted(bs.hours.begin(), bs.hours.end()))
      throw DataError("from_parts: unsorted exchange hours for " + key.first +
                      ">" + key.second);
  }
  return store;
}

const ZoneSeries* HourlyStore::series(std::string_view zone) const {
  auto it = zones_.find(std::string(zone));
  return it == zones_.end() ? nullptr : &it->second;
}

BorderSeries HourlyStore::net_flow(const std::string& a,
                                   const std::string& b) const {
  const BorderSeries* fwd = nullptr;
  const BorderSeries* rev = nullptr;
  if (auto it = borders_.find({a, b}); it != borders_.end()) fwd = &it->second;
  if (auto it = borders_.find({b, a}); it != borders_.end()) rev = &it->second;
  BorderSeries out;
  std::size_t i = 0, j = 0;
  std::size_t nf = fwd ? fwd->hours.size() : 0;
  std::size_t nr = rev ? rev->hours.size() : 0;
  out.hours.reserve(nf + nr);
  while (i < nf || j < nr) {
    EpochHour hf = i < nf ? fwd->hours[i] : INT64_MAX;
    EpochHour hr = j < nr ? rev->hours[j] : INT64_MAX;
    if (hf < hr) {
      out.hours.push_back(hf);
      out.net_export.push_back(fwd->net_export[i++]);
    } else if (hr < hf) {
      out.hours.push_back(hr);
      out.net_export.push_back(-rev->net_export[j++]);
    } else {
      out.hours.push_back(hf);
      out.net_export.push_back(fwd->net_export[i++] - rev->net_export[j++]);
    }
  }
  return out;
}

double HourlyStore::coverage(std::string_view zone, const Period& p) const {
  const ZoneSeries* zs = series(zone);
  if (!zs) return 0.0;
  auto [lo, hi] = zs->range(p);
  return double(hi - lo) / double(hours_in(p));
}

std::int64_t HourlyStore::total_rows() const {
  std::int64_t n = 0;
  for (const auto& [id, zs] : zones_) n += std::int64_t(zs.size());
  return n;
}

void HourlyStore::emit(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  {
    CsvWriter w(dir / "hourly.csv");
    w.raw_line(kHourlyHeader);
    for (const auto& [id, zs] : zones_) {
      for (std::size_t i = 0; i < zs.size(); ++i) {
        w.field(id);
        w.field(format_hour_utc(zs.hours[i]));
        w.field(zs.price[i]);
        w.field(zs.wind[i]);
        w.field(zs.solar[i]);
        w.field(zs.load[i]);
        w.end_row();
      }
    }
  }
  {
    CsvWriter w(dir / "exchanges.csv");
    w.raw_line(kExchangeHeader);
    for (const auto& [key, bs] : borders_) {
      for (std::size_t i = 0; i < bs.hours.size(); ++i) {
        w.field(key.first);
        w.field(key.second);
        w.field(format_hour_utc(bs.hours[i]));
        w.field(bs.net_export[i]);
        w.end_row();
      }
    }
  }
}

FuelPriceSeries FuelPriceSeries::load_csv(const std::filesystem::path& path) {
  FuelPriceSeries out;
  CsvReader reader(path);
  reader.expect_header(kHeader);
  std::vector<std::string_view> f;
  while (reader.next(f)) {
    if (f.size() != 4)
      throw DataError(loc(path, reader.line()) +
                      ": malformed row: want 4 fields");
    std::string_view m = f[0];  // YYYY-MM
    if (m.size() != 7 || m[4] != '-')
      throw DataError(loc(path, reader.line()) + ": malformed month \"" +
                      std::string(m) + "\"");
    int year = 0, month = 0;
    for (int i = 0; i < 4; ++i) year = year * 10 + (m[i] - '0');
    for (int i = 5; i < 7; ++i) month = month * 10 + (m[i] - '0');
    if (month < 1 || month > 12)
      throw DataError(loc(path, reader.line()) + ": malformed month \"" +
                      std::string(m) + "\"");
    double gas = parse_field(f[1], path, reader.line(), "gas");
    double coal = parse_field(f[2], path, reader.line(), "coal");
    double eua = parse_field(f[3], path, reader.line(), "eua");
    if (gas < 0 || coal < 0 || eua < 0)
      throw DataError(loc(path, reader.line()) + ": negative fuel price");
    std::int64_t key = month_key(year, month);
    if (!out.month_keys.empty() && key <= out.month_keys.back())
      throw DataError(loc(path, reader.line()) +
                      ": months not strictly increasing");
    out.month_keys.push_back(key);
    out.gas.push_back(gas);
    out.coal.push_back(coal);
    out.eua.push_back(eua);
  }
  return out;
}

void FuelPriceSeries::emit(const std::filesystem::path& path) const {
  CsvWriter w(path);
  w.raw_line(kHeader);
  for (std::size_t i = 0; i < month_keys.size(); ++i) {
    w.field(period_label({Aggregation::monthly, month_keys[i]}));
    w.field(gas[i]);
    w.field(coal[i]);
    w.field(eua[i]);
    w.end_row();
  }
}

int FuelPriceSeries::find(std::int64_t key) const {
  auto it = std::lower_bound(month_keys.begin(), month_keys.end(), key);
  if (it == month_keys.end() || *it != key) return -1;
  return int(it - month_keys.begin());
}

HydroCapacityTable HydroCapacityTable::load_csv(
    const std::filesystem::path& path) {
  HydroCapacityTable out;
  CsvReader reader(path);
  reader.expect_header(kHeader);
  std::vector<std::string_view> f;
  while (reader.next(f)) {
    if (f.size() != 4)
      throw DataError(loc(path, reader.line()) +
                      ": malformed row: want 4 fields");
    std::string zone(f[0]);
    double yearf = parse_field(f[1], path, reader.line(), "year");
    HydroCapacity cap;
    cap.pumped_mw = parse_field(f[2], path, reader.line(), "pumped_mw");
    cap.reservoir_mw = parse_field(f[3], path, reader.line(), "reservoir_mw");
    if (cap.pumped_mw < 0 || cap.reservoir_mw < 0)
      throw DataError(loc(path, reader.line()) + ": negative hydro capacity");
    int year = int(yearf);
    if (double(year) != yearf)
      throw DataError(loc(path, reader.line()) + ": non-integer year");
    auto [it, inserted] = out.rows.emplace(std::make_pair(zone, year), cap);
    if (!inserted)
      throw DataError(loc(path, reader.line()) + ": duplicate (zone, year): " +
                      zone + "," + std::to_string(year));
  }
  return out;
}

void HydroCapacityTable::emit(const std::filesystem::path& path) const {
  CsvWriter w(path);
  w.raw_line(kHeader);
  for (const auto& [key, cap] : rows) {
    w.field(key.first);
    w.field(std::int64_t(key.second));
    w.field(cap.pumped_mw);
    w.field(cap.reservoir_mw);
    w.end_row();
  }
}

const HydroCapacity* HydroCapacityTable::find(const std::string& zone,
                                              int year) const {
  auto it = rows.find({zone, year});
  return it == rows.end() ? nullptr : &it->second;
}

}  // namespace vfp
