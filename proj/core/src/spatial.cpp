#include "vfp/spatial.hpp"

#include "vfp/common.hpp"
#include "vfp/csv.hpp"

namespace vfp {

WeightScheme parse_weight_scheme(std::string_view s) {
  if (s == "ic_weighted") return WeightScheme::ic_weighted;
  if (s == "binary_uniform") return WeightScheme::binary_uniform;
  throw ConfigError("unknown weight scheme: " + std::string(s));
}

std::string_view weight_scheme_name(WeightScheme s) {
  return s == WeightScheme::ic_weighted ? "ic_weighted" : "binary_uniform";
}

void SpatialWeightsSet::emit(const std::filesystem::path& path) const {
  CsvWriter w(path);
  w.raw_line("zone,neighbor,weight,scheme");
  for (const auto& sw : by_zone) {
    for (const auto& [nj, wt] : sw.weights) {
      w.field(zone_ids[sw.zone]);
      w.field(zone_ids[nj]);
      w.field(wt);
      w.field(weight_scheme_name(scheme));
      w.end_row();
    }
  }
}

SpatialWeightsSet build_weights(const ZoneTopology& topo,
                                const InterconnectorProxy& ic,
                                WeightScheme scheme) {
  SpatialWeightsSet out;
  out.scheme = scheme;
  for (const auto& z : topo.zones()) out.zone_ids.push_back(z.id);
  out.by_zone.resize(topo.size());
  for (int zi = 0; zi < int(topo.size()); ++zi) {
    SpatialWeights& sw = out.by_zone[zi];
    sw.zone = zi;
    sw.scheme = scheme;
    const auto& neighbors = topo.neighbors(zi);
    if (neighbors.empty()) {
      out.flagged.push_back(topo.zone(zi).id);
      continue;
    }
    if (scheme == WeightScheme::binary_uniform) {
      double w = 1.0 / double(neighbors.size());
      for (int nj : neighbors) sw.weights.emplace_back(nj, w);
    } else {
      double total = 0.0;
      std::vector<double> raw;
      raw.reserve(neighbors.size());
      for (int nj : neighbors) {
        double v = ic.edge_mw(topo.zone(zi).id, topo.zone(nj).id);
        raw.push_back(v);
        total += v;
      }
      if (!(total > 0)) {
        // All-zero IC: no observed exchange on any border, lag undefined.
        out.flagged.push_back(topo.zone(zi).id);
        continue;
      }
      for (std::size_t k = 0; k < neighbors.size(); ++k)
        sw.weights.emplace_back(neighbors[k], raw[k] / total);
    }
  }
  return out;
}

std::optional<double> spatial_lag(
    const SpatialWeights& w,
    const std::map<std::pair<int, std::int64_t>, double>& neighbor_values,
    std::int64_t period_key) {
  if (w.weights.empty()) return std::nullopt;
  double acc = 0.0;
  for (const auto& [nj, wt] : w.weights) {
    if (wt == 0.0) continue;
    auto it = neighbor_values.find({nj, period_key});
    if (it == neighbor_values.end()) return std::nullopt;
    acc += wt * it->second;
  }
  return acc;
}

}  // namespace vfp
