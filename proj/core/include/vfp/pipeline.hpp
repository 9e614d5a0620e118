#pragma once

#include "vfp/ingest.hpp"
#include "vfp/metrics.hpp"
#include "vfp/panel.hpp"
#include "vfp/spatial.hpp"

namespace vfp {

struct Dataset {
  HourlyStore store;
  FuelPriceSeries fuel;
  HydroCapacityTable hydro;
};

/// Joins per-period metrics, spatial lags, and zone-level statics into the
/// per-technology regression table. Missing pieces become NaN and fall to
/// the complete-case filter downstream.
PanelInput build_panel_input(const MetricsTable& metrics,
                             const SpatialWeightsSet& weights, Tech tech);

struct PipelineResult {
  MetricsTable metrics;
  SpatialWeightsSet weights;
  PanelInput input;
};

/// store -> metrics at spec.aggregation -> weights under spec.weights ->
/// panel input for spec.technology.
PipelineResult run_pipeline(const Dataset& data, const ModelSpec& spec,
                            unsigned threads = 1);

nlohmann::json spec_to_json(const ModelSpec& spec);
ModelSpec spec_from_json(const nlohmann::json& j);

}  // namespace vfp
