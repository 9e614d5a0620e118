#include "vfp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vfp/common.hpp"
#include "vfp/csv.hpp"

namespace vfp {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Neumaier-compensated sum; window sums feed ratios checked against
// independent oracles at 1e-12, so plain accumulation error budgets are
// too tight for long windows.
double csum(std::span<const double> xs) {
  double s = 0.0, c = 0.0;
  for (double x : xs) {
    double t = s + x;
    if (std::abs(s) >= std::abs(x))
      c += (s - t) + x;
    else
      c += (x - t) + s;
    s = t;
  }
  return s + c;
}

double cdot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0, c = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double x = a[i] * b[i];
    double t = s + x;
    if (std::abs(s) >= std::abs(x))
      c += (s - t) + x;
    else
      c += (x - t) + s;
    s = t;
  }
  return s + c;
}

}  // namespace

Tech parse_tech(std::string_view s) {
  if (s == "wind") return Tech::wind;
  if (s == "solar") return Tech::solar;
  throw ConfigError("unknown technology: " + std::string(s));
}

std::string_view tech_name(Tech t) {
  return t == Tech::wind ? "wind" : "solar";
}

double market_value(std::span<const double> prices,
                    std::span<const double> gen) {
  if (prices.size() != gen.size())
    throw NumericError("market_value: series not aligned");
  double g = csum(gen);
  if (!(g > 0)) return kNaN;
  return cdot(prices, gen) / g;
}

double value_factor(double mv, std::span<const double> prices) {
  if (prices.empty()) return kNaN;
  double avg = csum(prices) / double(prices.size());
  if (std::abs(avg) < 1e-12) return kNaN;
  return mv / avg;
}

double penetration(std::span<const double> gen, std::span<const double> load) {
  if (gen.size() != load.size())
    throw NumericError("penetration: series not aligned");
  double l = csum(load);
  if (!(l > 0)) return kNaN;
  return csum(gen) / l;
}

double coefficient_of_variation(std::span<const double> gen) {
  if (gen.empty()) return kNaN;
  double mean = refined_mean(gen.data(), gen.size());
  if (!(mean > 0)) return kNaN;
  double ss = 0.0;
  for (double x : gen) {
    double d = x - mean;
    ss += d * d;
  }
  // Population convention: divide by n.
  return std::sqrt(ss / double(gen.size())) / mean;
}

double load_correlation(std::span<const double> gen,
                        std::span<const double> load) {
  if (gen.size() != load.size())
    throw NumericError("load_correlation: series not aligned");
  if (gen.size() < 2) return kNaN;
  double mg = refined_mean(gen.data(), gen.size());
  double ml = refined_mean(load.data(), load.size());
  double sgg = 0, sll = 0, sgl = 0;
  for (std::size_t i = 0; i < gen.size(); ++i) {
    double dg = gen[i] - mg;
    double dl = load[i] - ml;
    sgg += dg * dg;
    sll += dl * dl;
    sgl += dg * dl;
  }
  if (!(sgg > 0) || !(sll > 0)) return kNaN;  // constant series
  return sgl / std::sqrt(sgg * sll);
}

double clean_fuel_ratio(double gas, double coal, double eua, double carbon_gas,
                        double carbon_coal) {
  double denom = coal + eua * carbon_coal;
  if (!(denom > 0))
    throw NumericError("clean_fuel_ratio: non-positive denominator");
  return (gas + eua * carbon_gas) / denom;
}

double quantile_linear(std::vector<double> values, double q) {
  if (values.empty()) return kNaN;
  if (q < 0 || q > 1) throw NumericError("quantile_linear: q outside [0,1]");
  std::sort(values.begin(), values.end());
  double h = q * double(values.size() - 1);
  std::size_t lo = std::size_t(h);
  double frac = h - double(lo);
  if (lo + 1 >= values.size()) return values.back();
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

double InterconnectorProxy::edge_mw(const std::string& from,
                                    const std::string& to) const {
  for (const auto& e : edges)
    if (e.from == from && e.to == to) return e.ic_mw;
  return 0.0;
}

void InterconnectorProxy::emit(const std::filesystem::path& path) const {
  CsvWriter w(path);
  w.raw_line("from,to,ic_mw");
  for (const auto& e : edges) {
    w.field(e.from);
    w.field(e.to);
    w.field(e.ic_mw);
    w.end_row();
  }
}

InterconnectorProxy interconnector_proxy(const HourlyStore& store) {
  InterconnectorProxy out;
  const ZoneTopology& topo = store.topology();
  for (int zi = 0; zi < int(topo.size()); ++zi) {
    const ZoneInfo& zone = topo.zone(zi);
    int first_year = zone.first_sample_year;
    EpochHour y_lo = period_start_hour(year_period(first_year));
    EpochHour y_hi = period_start_hour(year_period(first_year + 1));

    double total = 0.0;
    for (int nj : topo.neighbors(zi)) {
      const std::string& nb = topo.zone(nj).id;
      BorderSeries flow = store.net_flow(zone.id, nb);
      std::vector<double> abs_flow;
      for (std::size_t i = 0; i < flow.hours.size(); ++i)
        if (flow.hours[i] >= y_lo && flow.hours[i] < y_hi)
          abs_flow.push_back(std::abs(flow.net_export[i]));
      double ic = 0.0;
      if (abs_flow.empty()) {
        out.warnings.push_back("no exchange data in first sample year for " +
                               zone.id + ">" + nb + "; IC set to 0");
      } else {
        ic = quantile_linear(std::move(abs_flow), 0.95);
      }
      out.edges.push_back({zone.id, nb, ic});
      total += ic;
    }
    if (topo.neighbors(zi).empty()) continue;
    out.zone_total_mw[zone.id] = total;

    // Normalize by the zone's mean hourly load over its first sample year.
    const ZoneSeries* zs = store.series(zone.id);
    double norm = kNaN;
    if (zs) {
      auto lo = std::lower_bound(zs->hours.begin(), zs->hours.end(), y_lo);
      auto hi = std::lower_bound(zs->hours.begin(), zs->hours.end(), y_hi);
      std::size_t a = lo - zs->hours.begin();
      std::size_t b = hi - zs->hours.begin();
      if (b > a) {
        double mean_load =
            csum(std::span(zs->load).subspan(a, b - a)) / double(b - a);
        if (mean_load > 0) norm = total / mean_load;
      }
    }
    if (std::isnan(norm))
      out.warnings.push_back("no load data in first sample year for " +
                             zone.id + "; normalized IC undefined");
    out.zone_normalized[zone.id] = norm;
  }
  return out;
}

void MetricsTable::count_exclusion(const std::string& zone,
                                   const std::string& reason,
                                   const Period& p) {
  for (auto& e : exclusions) {
    if (e.zone == zone && e.reason == reason) {
      e.count++;
      return;
    }
  }
  exclusions.push_back({zone, reason, 1, period_label(p)});
}

void MetricsTable::emit(const std::filesystem::path& path) const {
  CsvWriter w(path);
  w.raw_line(
      "zone,period,tech,mv,avg_price,vf,penetration,cov,load_corr,gen_total");
  for (const auto& r : rows) {
    w.field(zone_ids[r.zone]);
    w.field(period_label(r.period));
    w.field(tech_name(r.tech));
    w.field(r.mv);
    w.field(r.avg_price);
    w.field(r.vf);
    w.field(r.penetration);
    w.field(r.cov);
    w.field(r.load_corr);
    w.field(r.gen_total);
    w.end_row();
  }
}

namespace {

struct ZoneMetricsPart {
  std::vector<ZonePeriodMetrics> rows;
  std::vector<std::pair<std::pair<int, std::int64_t>, double>> pen[2];
  std::vector<std::pair<std::string, std::string>> exclusions;  // reason,period
};

ZoneMetricsPart metrics_for_zone(const HourlyStore& store, int zi,
                                 Aggregation level, const MetricsOptions& opt) {
  ZoneMetricsPart part;
  const ZoneTopology& topo = store.topology();
  const std::string& id = topo.zone(zi).id;
  const ZoneSeries* zs = store.series(id);
  if (!zs || zs->size() == 0) return part;

  std::int64_t first_key = period_of(zs->hours.front(), level).key;
  std::int64_t last_key = period_of(zs->hours.back(), level).key;
  for (std::int64_t key = first_key; key <= last_key; ++key) {
    Period p{level, key};
    auto [lo, hi] = zs->range(p);
    if (hi == lo) continue;
    double cov_frac = double(hi - lo) / double(hours_in(p));
    if (cov_frac < opt.min_coverage) {
      part.exclusions.emplace_back("insufficient coverage", period_label(p));
      continue;
    }
    std::size_t n = hi - lo;
    std::span<const double> price(zs->price.data() + lo, n);
    std::span<const double> load(zs->load.data() + lo, n);
    double load_sum = csum(load);
    if (!(load_sum > 0)) continue;  // unreachable for retained records

    for (Tech tech : {Tech::wind, Tech::solar}) {
      std::span<const double> gen(
          (tech == Tech::wind ? zs->wind.data() : zs->solar.data()) + lo, n);
      double pen = csum(gen) / load_sum;
      part.pen[int(tech)].push_back({{zi, key}, pen});

      double gen_sum = pen * load_sum;
      if (pen < opt.min_gen_share) {
        part.exclusions.emplace_back(
            std::string("insufficient ") + std::string(tech_name(tech)) +
                " generation",
            period_label(p));
        continue;
      }
      double mv = market_value(price, gen);
      double avg = csum(price) / double(n);
      double vf = value_factor(mv, price);
      if (std::isnan(vf)) {
        part.exclusions.emplace_back("near-zero average price",
                                     period_label(p));
        continue;
      }
      ZonePeriodMetrics row;
      row.zone = zi;
      row.period = p;
      row.tech = tech;
      row.mv = mv;
      row.avg_price = avg;
      row.vf = vf;
      row.penetration = pen;
      row.gen_total = gen_sum;
      row.cov = coefficient_of_variation(gen);
      row.load_corr = load_correlation(gen, load);
      if (std::isnan(row.load_corr))
        part.exclusions.emplace_back(
            std::string(tech_name(tech)) +
                "-load correlation undefined (constant series)",
            period_label(p));
      part.rows.push_back(row);
    }
  }
  return part;
}

}  // namespace

MetricsTable build_metrics(const HourlyStore& store,
                           const FuelPriceSeries& fuel,
                           const HydroCapacityTable& hydro, Aggregation level,
                           const MetricsOptions& opt, unsigned threads) {
  MetricsTable table;
  table.level = level;
  const ZoneTopology& topo = store.topology();
  for (const auto& z : topo.zones()) table.zone_ids.push_back(z.id);

  std::vector<ZoneMetricsPart> parts(topo.size());
  parallel_for(topo.size(), threads, [&](std::size_t zi) {
    parts[zi] = metrics_for_zone(store, int(zi), level, opt);
  });

  for (std::size_t zi = 0; zi < parts.size(); ++zi) {
    auto& part = parts[zi];
    for (int t = 0; t < 2; ++t)
      for (const auto& [key, v] : part.pen[t])
        table.penetration_all[t].emplace(key, v);
    for (auto& row : part.rows) table.rows.push_back(row);
    for (auto& [reason, period] : part.exclusions) {
      // Re-aggregate per zone to keep reports compact.
      bool merged = false;
      for (auto& e : table.exclusions)
        if (e.zone == table.zone_ids[zi] && e.reason == reason) {
          e.count++;
          merged = true;
          break;
        }
      if (!merged)
        table.exclusions.push_back({table.zone_ids[zi], reason, 1, period});
    }
  }

  // Zone-technology inclusion: the sample-average penetration of retained
  // observations must clear the threshold, otherwise the zone drops out of
  // that technology's model (its penetration still feeds neighbors).
  for (Tech tech : {Tech::wind, Tech::solar}) {
    std::map<int, std::pair<double, std::int64_t>> acc;
    for (const auto& r : table.rows)
      if (r.tech == tech) {
        acc[r.zone].first += r.penetration;
        acc[r.zone].second++;
      }
    for (const auto& [zi, sums] : acc) {
      double avg = sums.first / double(sums.second);
      if (avg < opt.min_avg_penetration) {
        std::erase_if(table.rows, [&](const ZonePeriodMetrics& r) {
          return r.tech == tech && r.zone == zi;
        });
        table.exclusions.push_back(
            {table.zone_ids[zi],
             std::string("sample-average ") + std::string(tech_name(tech)) +
                 " penetration below threshold",
             sums.second, ""});
      }
    }
  }
  std::sort(table.rows.begin(), table.rows.end(),
            [](const ZonePeriodMetrics& a, const ZonePeriodMetrics& b) {
              if (a.zone != b.zone) return a.zone < b.zone;
              if (a.period.key != b.period.key) return a.period.key < b.period.key;
              return int(a.tech) < int(b.tech);
            });

  // Clean gas-coal ratio per period of the requested level: monthly value
  // for months, containing month's value for days and hours, year average
  // of available months for annual windows.
  std::map<std::int64_t, double> monthly_ratio;
  for (std::size_t i = 0; i < fuel.month_keys.size(); ++i)
    monthly_ratio[fuel.month_keys[i]] = clean_fuel_ratio(
        fuel.gas[i], fuel.coal[i], fuel.eua[i], opt.carbon_gas, opt.carbon_coal);

  std::set<std::int64_t> period_keys;
  for (const auto& r : table.rows) period_keys.insert(r.period.key);
  for (int t = 0; t < 2; ++t)
    for (const auto& [key, v] : table.penetration_all[t])
      period_keys.insert(key.second);
  for (std::int64_t key : period_keys) {
    Period p{level, key};
    double ratio = kNaN;
    switch (level) {
      case Aggregation::monthly: {
        auto it = monthly_ratio.find(key);
        if (it != monthly_ratio.end()) ratio = it->second;
        break;
      }
      case Aggregation::hourly:
      case Aggregation::daily: {
        EpochHour h = period_start_hour(p);
        auto it = monthly_ratio.find(period_of(h, Aggregation::monthly).key);
        if (it != monthly_ratio.end()) ratio = it->second;
        break;
      }
      case Aggregation::annual: {
        double sum = 0;
        int cnt = 0;
        for (int m = 1; m <= 12; ++m) {
          auto it = monthly_ratio.find(month_key(int(key), m));
          if (it != monthly_ratio.end()) {
            sum += it->second;
            cnt++;
          }
        }
        if (cnt > 0) ratio = sum / cnt;
        break;
      }
    }
    table.fuel_ratio[key] = ratio;
  }

  // Hydro capacities normalized by mean zonal load of the same year.
  for (const auto& [key, cap] : hydro.rows) {
    int zi = topo.index_of(key.first);
    if (zi < 0) continue;
    const ZoneSeries* zs = store.series(key.first);
    if (!zs) continue;
    EpochHour y_lo = period_start_hour(year_period(key.second));
    EpochHour y_hi = period_start_hour(year_period(key.second + 1));
    auto lo = std::lower_bound(zs->hours.begin(), zs->hours.end(), y_lo);
    auto hi = std::lower_bound(zs->hours.begin(), zs->hours.end(), y_hi);
    std::size_t a = lo - zs->hours.begin();
    std::size_t b = hi - zs->hours.begin();
    if (b <= a) continue;
    double mean_load =
        csum(std::span(zs->load).subspan(a, b - a)) / double(b - a);
    if (!(mean_load > 0)) continue;
    table.hydro_pumped_norm[{zi, key.second}] = cap.pumped_mw / mean_load;
    table.hydro_reservoir_norm[{zi, key.second}] = cap.reservoir_mw / mean_load;
  }

  table.ic = interconnector_proxy(store);
  return table;
}

}  // namespace vfp
