#include "vfp/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <set>

#include <nlohmann/json.hpp>

#include "vfp/common.hpp"
#include "vfp/spatial.hpp"

namespace vfp {

namespace {

using Rng = std::mt19937_64;

double normal(Rng& rng, double mean, double sd) {
  std::normal_distribution<double> d(mean, sd);
  return d(rng);
}

double uniform(Rng& rng, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  return d(rng);
}

/// Stationary AR(1) path with the given marginal standard deviation.
std::vector<double> ar1_path(Rng& rng, int n, double phi, double sd) {
  std::vector<double> x(n);
  if (n == 0) return x;
  x[0] = normal(rng, 0.0, sd);
  double innov_sd = sd * std::sqrt(std::max(0.0, 1.0 - phi * phi));
  for (int t = 1; t < n; ++t) x[t] = phi * x[t - 1] + normal(rng, 0.0, innov_sd);
  return x;
}

std::set<std::pair<int, int>> ring_with_chords(Rng& rng, int n, int extra) {
  std::set<std::pair<int, int>> edges;
  if (n == 2) edges.insert({0, 1});
  if (n >= 3)
    for (int i = 0; i < n; ++i)
      edges.insert({std::min(i, (i + 1) % n), std::max(i, (i + 1) % n)});
  std::uniform_int_distribution<int> pick(0, n - 1);
  int attempts = 0;
  int added = 0;
  while (added < extra && attempts < 100 * (extra + 1) && n > 3) {
    ++attempts;
    int a = pick(rng), b = pick(rng);
    if (a == b) continue;
    auto e = std::make_pair(std::min(a, b), std::max(a, b));
    if (edges.insert(e).second) ++added;
  }
  return edges;
}

std::string zone_name(int i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "Z%02d", i);
  return buf;
}

}  // namespace

void PanelTruth::write_truth_json(const std::filesystem::path& path) const {
  nlohmann::json j;
  nlohmann::json bj = nlohmann::json::object();
  for (const auto& [k, v] : beta) bj[k] = v;
  j["beta"] = bj;
  j["columns"] = design.names;
  j["n_obs"] = design.X.rows();
  j["technology"] = tech_name(spec.technology);
  j["aggregation"] = aggregation_name(spec.aggregation);
  nlohmann::json icj = nlohmann::json::object();
  for (const auto& [k, v] : ic_by_zone) icj[k] = v;
  j["ic_by_zone"] = icj;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

PanelTruth generate_panel(const DgpConfig& cfg) {
  if (cfg.n_zones < 2) throw ConfigError("dgp: need at least 2 zones");
  if (!(std::abs(cfg.rho) < 1)) throw ConfigError("dgp: |rho| must be < 1");
  if (!(cfg.sigma > 0)) throw ConfigError("dgp: sigma must be positive");
  if (cfg.min_periods < 2 || cfg.max_periods < cfg.min_periods)
    throw ConfigError("dgp: invalid period range");

  Rng rng(cfg.seed);
  const int n = cfg.n_zones;
  const int T = cfg.max_periods;

  // Topology, interconnection, zone loads.
  auto edges = ring_with_chords(rng, n, cfg.extra_edges);
  std::vector<ZoneInfo> zones;
  EpochDay from = parse_date(std::to_string(cfg.start_year) + "-01-01");
  EpochDay to = parse_date(std::to_string(cfg.start_year + T / 12 + 1) + "-12-31");
  for (int i = 0; i < n; ++i)
    zones.push_back({zone_name(i), from, to, cfg.start_year});
  ZoneTopology topo(zones, edges);

  InterconnectorProxy ic;
  std::map<std::pair<int, int>, double> edge_mw;
  for (const auto& [a, b] : edges)
    edge_mw[{a, b}] = std::exp(normal(rng, cfg.ic_log_mean, cfg.ic_log_sd));
  for (int zi = 0; zi < n; ++zi)
    for (int nj : topo.neighbors(zi)) {
      double mw = edge_mw.at({std::min(zi, nj), std::max(zi, nj)});
      ic.edges.push_back({topo.zone(zi).id, topo.zone(nj).id, mw});
    }
  std::map<std::string, double> ic_by_zone;
  for (int zi = 0; zi < n; ++zi) {
    double load = std::exp(normal(rng, cfg.load_log_mean, cfg.load_log_sd));
    double total = 0;
    for (int nj : topo.neighbors(zi))
      total += edge_mw.at({std::min(zi, nj), std::max(zi, nj)});
    ic_by_zone[topo.zone(zi).id] = total / load;
  }

  SpatialWeightsSet weights =
      build_weights(topo, ic, WeightScheme::ic_weighted);

  // Window lengths, staggered so all zones end together (unbalanced panel).
  std::vector<int> start(n);
  for (int zi = 0; zi < n; ++zi) {
    std::uniform_int_distribution<int> len_d(cfg.min_periods, cfg.max_periods);
    start[zi] = T - len_d(rng);
  }

  // Penetration processes over the full horizon for all zones: neighbors'
  // values exist even outside a zone's own sample window.
  auto pen_series = [&](double base_mean, double base_sd, double within_sd,
                        double seasonal_amp) {
    std::vector<std::vector<double>> out(n);
    for (int zi = 0; zi < n; ++zi) {
      double base = std::max(0.01, normal(rng, base_mean, base_sd));
      double phase = uniform(rng, 0.0, 2.0 * std::numbers::pi);
      auto dev = ar1_path(rng, T, cfg.pen_ar, within_sd);
      out[zi].resize(T);
      for (int t = 0; t < T; ++t) {
        double seasonal =
            seasonal_amp * std::cos(2.0 * std::numbers::pi * (t % 12) / 12.0 + phase);
        out[zi][t] = std::max(0.0005, base + dev[t] + seasonal);
      }
    }
    return out;
  };
  auto pen = pen_series(cfg.pen_base_mean, cfg.pen_base_sd, cfg.pen_within_sd,
                        cfg.pen_seasonal_amp);
  auto pen_other = pen_series(cfg.other_base_mean, cfg.other_base_sd,
                              cfg.other_within_sd, cfg.pen_seasonal_amp * 0.5);

  auto lag_of = [&](const std::vector<std::vector<double>>& p, int zi, int t) {
    const SpatialWeights& w = weights.by_zone[zi];
    double acc = 0;
    for (const auto& [nj, wt] : w.weights) acc += wt * p[nj][t];
    return acc;
  };

  // Controls.
  auto bounded_series = [&](double base_mean, double base_sd, double within_sd,
                            double lo_clip) {
    std::vector<std::vector<double>> out(n);
    for (int zi = 0; zi < n; ++zi) {
      double base = std::max(lo_clip, normal(rng, base_mean, base_sd));
      auto dev = ar1_path(rng, T, 0.8, within_sd);
      out[zi].resize(T);
      for (int t = 0; t < T; ++t)
        out[zi][t] = std::max(lo_clip, base + dev[t]);
    }
    return out;
  };
  auto hydro_pump = bounded_series(cfg.hydro_pump_base_mean,
                                   cfg.hydro_pump_base_sd,
                                   cfg.hydro_pump_within_sd, 0.0);
  auto hydro_resv = bounded_series(cfg.hydro_resv_base_mean,
                                   cfg.hydro_resv_base_sd,
                                   cfg.hydro_resv_within_sd, 0.0);
  std::vector<std::vector<double>> load_corr(n);
  for (int zi = 0; zi < n; ++zi) {
    double base = normal(rng, cfg.corr_base_mean, cfg.corr_base_sd);
    auto dev = ar1_path(rng, T, 0.7, cfg.corr_within_sd);
    load_corr[zi].resize(T);
    for (int t = 0; t < T; ++t)
      load_corr[zi][t] = std::clamp(base + dev[t], -0.95, 0.95);
  }
  auto gen_cov = bounded_series(cfg.cov_base_mean, cfg.cov_base_sd,
                                cfg.cov_within_sd, 0.05);
  std::vector<double> gas_coal(T);
  {
    auto dev = ar1_path(rng, T, cfg.gas_coal_ar, cfg.gas_coal_sd);
    for (int t = 0; t < T; ++t)
      gas_coal[t] = std::max(0.2, cfg.gas_coal_mean + dev[t]);
  }

  // Metrics-shaped table, rows sorted by (zone, period).
  PanelInput input;
  input.tech = Tech::wind;
  input.level = Aggregation::monthly;
  for (int zi = 0; zi < n; ++zi) input.zone_ids.push_back(topo.zone(zi).id);
  std::int64_t month0 = month_key(cfg.start_year, 1);
  for (int zi = 0; zi < n; ++zi) {
    for (int t = start[zi]; t < T; ++t) {
      PanelInputRow r;
      r.zone = zi;
      r.period_key = month0 + t;
      r.vf = 0.0;  // placeholder until y is drawn
      r.dom_pen = pen[zi][t];
      r.nbr_pen = lag_of(pen, zi, t);
      r.dom_pen_other = pen_other[zi][t];
      r.nbr_pen_other = lag_of(pen_other, zi, t);
      r.hydro_pump = hydro_pump[zi][t];
      r.hydro_resv = hydro_resv[zi][t];
      r.load_corr = load_corr[zi][t];
      r.gen_cov = gen_cov[zi][t];
      r.gas_coal = gas_coal[t];
      r.ic = ic_by_zone.at(topo.zone(zi).id);
      input.rows.push_back(r);
    }
  }

  PanelTruth truth;
  truth.spec.technology = Tech::wind;
  truth.spec.estimator = Estimator::rewb;
  truth.spec.aggregation = Aggregation::monthly;
  truth.spec.weights = WeightScheme::ic_weighted;
  truth.spec.controls = cfg.controls;
  truth.design = assemble_design(truth.spec, input);

  for (const auto& [key, value] : cfg.beta) {
    if (truth.design.col(key) < 0)
      throw ConfigError("dgp: beta names unknown design column \"" + key +
                        "\"");
    (void)value;
  }
  Eigen::VectorXd beta(truth.design.X.cols());
  for (Eigen::Index c = 0; c < beta.size(); ++c) {
    auto it = cfg.beta.find(truth.design.names[c]);
    beta[c] = it == cfg.beta.end() ? 0.0 : it->second;
    truth.beta[truth.design.names[c]] = beta[c];
  }

  // AR(1) errors per entity over its realized window.
  Eigen::VectorXd eps(truth.design.X.rows());
  {
    double stat_sd = cfg.sigma / std::sqrt(1.0 - cfg.rho * cfg.rho);
    Eigen::Index i = 0;
    while (i < eps.size()) {
      Eigen::Index b = i;
      while (b < eps.size() && truth.design.entity[b] == truth.design.entity[i])
        ++b;
      eps[i] = normal(rng, 0.0, stat_sd);
      for (Eigen::Index t = i + 1; t < b; ++t)
        eps[t] = cfg.rho * eps[t - 1] + normal(rng, 0.0, cfg.sigma);
      i = b;
    }
  }
  truth.design.y = truth.design.X * beta + eps;

  // Write y back into the table; design rows and input rows share the
  // (zone, period) order because the table was built sorted and has no
  // missing values.
  if (std::size_t(truth.design.X.rows()) != input.rows.size())
    throw NumericError("dgp: design row count mismatch");
  for (std::size_t i = 0; i < input.rows.size(); ++i)
    input.rows[i].vf = truth.design.y[Eigen::Index(i)];
  truth.input = std::move(input);
  truth.ic_by_zone = std::move(ic_by_zone);
  return truth;
}

// --- merit-order simulator -------------------------------------------------

void SynthDataset::emit(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  store.emit(dir);
  std::ofstream topo_out(dir / "topology.txt", std::ios::binary);
  if (!topo_out) throw DataError("cannot write topology.txt");
  store.topology().write(topo_out);
  fuel.emit(dir / "fuel_prices.csv");
  hydro.emit(dir / "hydro_capacities.csv");
}

SynthDataset generate_hourly(const MeritOrderConfig& cfg) {
  if (cfg.n_zones < 1) throw ConfigError("merit-order: need at least 1 zone");
  if (cfg.n_days < 1) throw ConfigError("merit-order: need at least 1 day");
  Rng rng(cfg.seed);
  const int n = cfg.n_zones;
  const int days = cfg.n_days;
  const int hours = days * 24;

  auto edge_set = n >= 2 ? ring_with_chords(rng, n, cfg.extra_edges)
                         : std::set<std::pair<int, int>>{};

  EpochDay from = parse_date(std::to_string(cfg.start_year) + "-01-01");
  EpochDay to = from + days - 1;
  std::vector<ZoneInfo> zones;
  for (int i = 0; i < n; ++i)
    zones.push_back({zone_name(i), from, to, cfg.start_year});
  ZoneTopology topo(zones, edge_set);
  EpochHour hour0 = from * 24;

  SynthDataset out;
  for (int i = 0; i < n; ++i) out.zone_ids.push_back(zone_name(i));

  // Zone parameters.
  std::vector<double> base_load(n), wind_cap(n), solar_cap(n);
  out.supply_intercept.resize(n);
  out.supply_slope.resize(n);
  for (int i = 0; i < n; ++i) {
    base_load[i] = uniform(rng, cfg.base_load_lo, cfg.base_load_hi);
    out.supply_intercept[i] =
        uniform(rng, cfg.supply_intercept_lo, cfg.supply_intercept_hi);
    out.supply_slope[i] = uniform(rng, cfg.supply_slope_lo, cfg.supply_slope_hi);
    wind_cap[i] = base_load[i] * uniform(rng, cfg.wind_cap_frac_lo,
                                         cfg.wind_cap_frac_hi);
    solar_cap[i] = base_load[i] * uniform(rng, cfg.solar_cap_frac_lo,
                                          cfg.solar_cap_frac_hi);
  }
  struct Edge {
    int a, b;
    double cap;
    double flow = 0;  // signed, positive a -> b
  };
  std::vector<Edge> lines;
  for (const auto& [a, b] : edge_set) {
    double cap = std::min(base_load[a], base_load[b]) *
                 uniform(rng, cfg.ic_frac_lo, cfg.ic_frac_hi);
    lines.push_back({a, b, cap, 0.0});
  }

  // Day-scale weather factors: one continental factor per technology plus
  // zone-specific remainders, mixed to hit the configured cross-zone
  // correlation weight.
  auto wind_common = ar1_path(rng, days, cfg.wind_day_ar, 1.0);
  auto solar_common = ar1_path(rng, days, cfg.solar_day_ar, 1.0);
  std::vector<std::vector<double>> wind_zone(n), solar_zone(n);
  for (int i = 0; i < n; ++i) {
    wind_zone[i] = ar1_path(rng, days, cfg.wind_day_ar, 1.0);
    solar_zone[i] = ar1_path(rng, days, cfg.solar_day_ar, 1.0);
  }
  double ww = cfg.wind_common_weight;
  double sw = cfg.solar_common_weight;
  double ww_rem = std::sqrt(std::max(0.0, 1.0 - ww * ww));
  double sw_rem = std::sqrt(std::max(0.0, 1.0 - sw * sw));

  std::map<std::string, ZoneSeries> series;
  for (int i = 0; i < n; ++i) {
    ZoneSeries zs;
    zs.hours.reserve(hours);
    series.emplace(zone_name(i), std::move(zs));
  }
  std::map<std::pair<std::string, std::string>, BorderSeries> borders;
  for (const auto& l : lines)
    borders[{zone_name(l.a), zone_name(l.b)}] = {};

  const double pi = std::numbers::pi;
  std::vector<double> load_h(n), wind_h(n), solar_h(n), residual(n), price(n),
      net_export(n);

  for (int h = 0; h < hours; ++h) {
    int day = h / 24;
    int hod = h % 24;
    int dow = int((from + day) % 7);
    double bell = std::sin(pi * (hod - 6) / 12.0);
    bell = hod >= 6 && hod <= 18 ? std::pow(std::max(0.0, bell), 1.5) : 0.0;
    int doy = day % 365;
    double season = 0.75 + 0.25 * std::cos(2.0 * pi * (doy - 172) / 365.0);

    for (int i = 0; i < n; ++i) {
      double shape = cfg.load_daily_amp * std::sin(2.0 * pi * (hod - 6) / 24.0) +
                     (dow >= 5 ? -cfg.load_weekly_amp : 0.0);
      load_h[i] =
          base_load[i] * (1.0 + shape + normal(rng, 0.0, cfg.load_noise));
      double wcf = std::clamp(
          0.35 + 0.22 * (ww * wind_common[day] + ww_rem * wind_zone[i][day]) +
              normal(rng, 0.0, cfg.wind_hour_sd),
          0.0, 1.0);
      double cloud = std::clamp(
          0.70 + 0.25 * (sw * solar_common[day] + sw_rem * solar_zone[i][day]),
          0.0, 1.0);
      wind_h[i] = wind_cap[i] * wcf;
      solar_h[i] = solar_cap[i] * bell * season * cloud;
      residual[i] = load_h[i] - wind_h[i] - solar_h[i];
      net_export[i] = 0.0;
    }
    for (auto& l : lines) l.flow = 0.0;

    // Coordinate descent on edge flows: each pass equalizes the two zone
    // prices subject to the line limit; converges on the convex dispatch.
    auto price_of = [&](int i) {
      return out.supply_intercept[i] +
             out.supply_slope[i] * (residual[i] + net_export[i]);
    };
    if (!lines.empty()) {
      for (int sweep = 0; sweep < 400; ++sweep) {
        double moved = 0.0;
        for (auto& l : lines) {
          double pa = price_of(l.a), pb = price_of(l.b);
          double q = (pb - pa) / (out.supply_slope[l.a] + out.supply_slope[l.b]);
          double target = std::clamp(l.flow + q, -l.cap, l.cap);
          double delta = target - l.flow;
          if (delta != 0.0) {
            l.flow = target;
            net_export[l.a] += delta;
            net_export[l.b] -= delta;
            moved = std::max(moved, std::abs(delta));
          }
        }
        if (moved < 1e-10) break;
      }
    }

    for (int i = 0; i < n; ++i) {
      double conv = residual[i] + net_export[i];
      if (cfg.max_supply_frac) {
        double cap = *cfg.max_supply_frac * base_load[i];
        if (conv > cap + 1e-9) {
          if (topo.neighbors(i).empty())
            throw NumericError("merit-order: isolated zone " + zone_name(i) +
                               " infeasible: load exceeds max supply");
          throw NumericError("merit-order: zone " + zone_name(i) +
                             " exceeds max supply after clearing");
        }
      }
      price[i] = out.supply_intercept[i] + out.supply_slope[i] * conv;
      if (cfg.price_floor) price[i] = std::max(*cfg.price_floor, price[i]);
      ZoneSeries& zs = series[zone_name(i)];
      zs.hours.push_back(hour0 + h);
      zs.price.push_back(price[i]);
      zs.wind.push_back(wind_h[i]);
      zs.solar.push_back(solar_h[i]);
      zs.load.push_back(load_h[i]);
    }
    for (const auto& l : lines) {
      BorderSeries& bs = borders[{zone_name(l.a), zone_name(l.b)}];
      bs.hours.push_back(hour0 + h);
      bs.net_export.push_back(l.flow);
    }
  }

  out.store = HourlyStore::from_parts(topo, std::move(series), std::move(borders));

  // Exogenous fuel prices: smooth seasonal series, identical for all zones.
  {
    std::int64_t m0 = month_key(cfg.start_year, 1);
    std::int64_t m1 = period_of(hour0 + hours - 1, Aggregation::monthly).key;
    for (std::int64_t m = m0; m <= m1; ++m) {
      double phase = 2.0 * pi * double(m - m0) / 12.0;
      out.fuel.month_keys.push_back(m);
      out.fuel.gas.push_back(cfg.gas_mean * (1.0 + 0.15 * std::sin(phase)));
      out.fuel.coal.push_back(cfg.coal_mean * (1.0 + 0.05 * std::cos(phase)));
      out.fuel.eua.push_back(cfg.eua_mean *
                             (1.0 + 0.02 * double(m - m0)));
    }
  }
  // Annual hydro capacities with mild growth.
  {
    int y0 = cfg.start_year;
    int y1 = year_of_hour(hour0 + hours - 1);
    for (int i = 0; i < n; ++i) {
      double pumped = base_load[i] * uniform(rng, 0.0, cfg.hydro_frac_hi);
      double resv = base_load[i] * uniform(rng, 0.0, cfg.hydro_frac_hi);
      double growth = uniform(rng, 0.0, 0.05);
      for (int y = y0; y <= y1; ++y) {
        double k = 1.0 + growth * (y - y0);
        out.hydro.rows[{zone_name(i), y}] = {pumped * k, resv * k};
      }
    }
  }
  return out;
}

}  // namespace vfp
