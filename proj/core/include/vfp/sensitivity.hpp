#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "vfp/effects.hpp"
#include "vfp/pipeline.hpp"

namespace vfp {

/// The coefficients tracked across every sensitivity harness: domestic and
/// neighboring penetration and their interconnector interactions, where
/// estimated.
std::vector<std::string> coefficients_of_interest(const ModelResult& result);

struct LooRun {
  std::string omitted_zone;
  bool ok = false;
  std::string error;
  std::int64_t n_obs = 0;
  std::map<std::string, double> coef;
  std::map<std::string, double> se;
};

struct LooResult {
  ModelResult full;
  std::vector<std::string> coef_names;
  std::vector<LooRun> runs;

  void emit(const std::filesystem::path& path) const;
};

/// Refits once per omitted zone. Omitted zones stay inside other zones'
/// spatial lags: neighboring penetration measures physical cross-border
/// exposure, not sample membership, so the input table is filtered by zone
/// after the lags were computed. Failed refits are recorded and the sweep
/// continues.
LooResult leave_one_out(const ModelSpec& spec, const PanelInput& input,
                        unsigned threads = 1);

struct AggregationRun {
  Aggregation level = Aggregation::monthly;
  bool ok = false;
  std::string error;
  std::int64_t n_obs = 0;
  std::map<std::string, double> coef;
  std::map<std::string, double> se;
  std::vector<std::string> warnings;
};

struct HourlyNullCheck {
  double max_vf_deviation = 0.0;  // max |vf - 1| across observations
  double pen_coef_abs = 0.0;      // |fitted domestic penetration slope|
  std::int64_t n_obs = 0;
};

struct AggregationResult {
  std::vector<AggregationRun> runs;
  HourlyNullCheck hourly;

  void emit(const std::filesystem::path& path) const;
};

/// Recomputes all metrics from the hourly store at each level and refits.
/// Annual runs drop entities with fewer than two years. The hourly
/// degenerate case is verified separately with a penetration-only model:
/// single-hour windows force the value factor to one, so the fitted
/// penetration slope must vanish.
AggregationResult aggregation_sweep(const Dataset& data, const ModelSpec& spec,
                                    const std::vector<Aggregation>& levels,
                                    unsigned threads = 1);

struct WeightsVariantResult {
  ModelResult weighted;  // ic_weighted
  ModelResult uniform;   // binary_uniform
  std::vector<std::string> coef_names;

  void emit(const std::filesystem::path& path) const;
};

WeightsVariantResult weights_variant(const Dataset& data,
                                     const ModelSpec& spec,
                                     unsigned threads = 1);

struct EstimatorComparison {
  ModelResult rewb;
  ModelResult fe;
  struct Row {
    std::string name;
    double rewb = 0, fe = 0, rel_dev = 0;
  };
  std::vector<Row> rows;          // within-type columns
  double max_rel_dev = 0.0;

  void emit(const std::filesystem::path& path) const;
};

EstimatorComparison estimator_comparison(const ModelSpec& spec,
                                         const PanelInput& input);

}  // namespace vfp
