#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vfp/metrics.hpp"
#include "vfp/topology.hpp"

namespace vfp {

enum class WeightScheme { ic_weighted, binary_uniform };
WeightScheme parse_weight_scheme(std::string_view s);
std::string_view weight_scheme_name(WeightScheme s);

/// Row-normalized spatial weights of one focal zone over its direct
/// neighbors. Empty for zones without neighbors (spatial lag undefined).
struct SpatialWeights {
  int zone = -1;
  std::vector<std::pair<int, double>> weights;  // (neighbor index, weight)
  WeightScheme scheme = WeightScheme::ic_weighted;
};

struct SpatialWeightsSet {
  std::vector<SpatialWeights> by_zone;  // indexed by topology zone index
  std::vector<std::string> zone_ids;
  WeightScheme scheme = WeightScheme::ic_weighted;
  std::vector<std::string> flagged;  // zones with undefined spatial lag

  void emit(const std::filesystem::path& path) const;
};

/// ic_weighted: w_ij = IC_ij / sum_j IC_ij over direct neighbors;
/// binary_uniform: w_ij = 1/J. A neighbor with zero IC keeps weight zero
/// but does not block the row.
SpatialWeightsSet build_weights(const ZoneTopology& topo,
                                const InterconnectorProxy& ic,
                                WeightScheme scheme);

/// Weighted average of neighbor values: sum_j w_ij * value_j. Returns
/// nullopt when any positively weighted neighbor is missing (the focal
/// observation is excluded for that period; no imputation).
std::optional<double> spatial_lag(
    const SpatialWeights& w,
    const std::map<std::pair<int, std::int64_t>, double>& neighbor_values,
    std::int64_t period_key);

}  // namespace vfp
