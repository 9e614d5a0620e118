#include "vfp/pipeline.hpp"

#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "vfp/common.hpp"

namespace vfp {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

int year_of_period(const Period& p) {
  switch (p.level) {
    case Aggregation::hourly: return year_of_hour(p.key);
    case Aggregation::daily: return year_of_day(p.key);
    case Aggregation::monthly: return int(p.key / 12);
    case Aggregation::annual: return int(p.key);
  }
  return 0;
}
}  // namespace

PanelInput build_panel_input(const MetricsTable& metrics,
                             const SpatialWeightsSet& weights, Tech tech) {
  PanelInput input;
  input.tech = tech;
  input.level = metrics.level;
  input.zone_ids = metrics.zone_ids;
  const auto& pen_own = metrics.penetration_all[int(tech)];
  const auto& pen_other = metrics.penetration_all[int(other_tech(tech))];

  std::int64_t missing_lag = 0;
  for (const auto& row : metrics.rows) {
    if (row.tech != tech) continue;
    PanelInputRow r;
    r.zone = row.zone;
    r.period_key = row.period.key;
    r.vf = row.vf;
    r.dom_pen = row.penetration;
    r.load_corr = row.load_corr;
    r.gen_cov = row.cov;

    const SpatialWeights& w = weights.by_zone[row.zone];
    auto own_lag = spatial_lag(w, pen_own, row.period.key);
    auto other_lag = spatial_lag(w, pen_other, row.period.key);
    if (!own_lag || !other_lag) ++missing_lag;
    r.nbr_pen = own_lag.value_or(kNaN);
    r.nbr_pen_other = other_lag.value_or(kNaN);

    auto po = pen_other.find({row.zone, row.period.key});
    r.dom_pen_other = po == pen_other.end() ? kNaN : po->second;

    int year = year_of_period(row.period);
    auto hp = metrics.hydro_pumped_norm.find({row.zone, year});
    r.hydro_pump = hp == metrics.hydro_pumped_norm.end() ? kNaN : hp->second;
    auto hr = metrics.hydro_reservoir_norm.find({row.zone, year});
    r.hydro_resv = hr == metrics.hydro_reservoir_norm.end() ? kNaN : hr->second;

    auto fr = metrics.fuel_ratio.find(row.period.key);
    r.gas_coal = fr == metrics.fuel_ratio.end() ? kNaN : fr->second;

    auto ic = metrics.ic.zone_normalized.find(metrics.zone_ids[row.zone]);
    r.ic = ic == metrics.ic.zone_normalized.end() ? kNaN : ic->second;

    input.rows.push_back(r);
  }
  if (missing_lag > 0)
    input.warnings.push_back(
        std::to_string(missing_lag) +
        " observations lack a neighbor penetration value; spatial lag left "
        "missing");
  for (const auto& z : weights.flagged)
    input.warnings.push_back("zone " + z +
                             " has no usable neighbors; spatial lag undefined");
  return input;
}

PipelineResult run_pipeline(const Dataset& data, const ModelSpec& spec,
                            unsigned threads) {
  PipelineResult out;
  out.metrics = build_metrics(data.store, data.fuel, data.hydro,
                              spec.aggregation, spec.thresholds, threads);
  out.weights =
      build_weights(data.store.topology(), out.metrics.ic, spec.weights);
  out.input = build_panel_input(out.metrics, out.weights, spec.technology);
  return out;
}

nlohmann::json spec_to_json(const ModelSpec& spec) {
  return nlohmann::json{
      {"technology", tech_name(spec.technology)},
      {"estimator", estimator_name(spec.estimator)},
      {"aggregation", aggregation_name(spec.aggregation)},
      {"weights_scheme", weight_scheme_name(spec.weights)},
      {"hac_lags", spec.hac_lags},
      {"controls", control_set_name(spec.controls)},
      {"min_coverage", spec.thresholds.min_coverage},
      {"min_gen_share", spec.thresholds.min_gen_share},
      {"min_avg_penetration", spec.thresholds.min_avg_penetration},
      {"carbon_gas", spec.thresholds.carbon_gas},
      {"carbon_coal", spec.thresholds.carbon_coal},
  };
}

ModelSpec spec_from_json(const nlohmann::json& j) {
  ModelSpec spec;
  auto get = [&](const char* key, auto& out) {
    if (j.contains(key)) out = j.at(key);
  };
  if (j.contains("technology"))
    spec.technology = parse_tech(j.at("technology").get<std::string>());
  if (j.contains("estimator"))
    spec.estimator = parse_estimator(j.at("estimator").get<std::string>());
  if (j.contains("aggregation"))
    spec.aggregation =
        parse_aggregation(j.at("aggregation").get<std::string>());
  if (j.contains("weights_scheme"))
    spec.weights =
        parse_weight_scheme(j.at("weights_scheme").get<std::string>());
  if (j.contains("controls"))
    spec.controls = parse_control_set(j.at("controls").get<std::string>());
  get("hac_lags", spec.hac_lags);
  get("min_coverage", spec.thresholds.min_coverage);
  get("min_gen_share", spec.thresholds.min_gen_share);
  get("min_avg_penetration", spec.thresholds.min_avg_penetration);
  get("carbon_gas", spec.thresholds.carbon_gas);
  get("carbon_coal", spec.thresholds.carbon_coal);
  return spec;
}

}  // namespace vfp
