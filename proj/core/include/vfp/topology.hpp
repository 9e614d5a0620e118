#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "vfp/timeutil.hpp"

namespace vfp {

struct ZoneInfo {
  std::string id;
  EpochDay active_from = 0;  // inclusive calendar days
  EpochDay active_to = 0;
  int first_sample_year = 0;
};

/// Bidding-zone topology: zone lifecycles, neighbor adjacency, and the first
/// sample year used for the time-invariant interconnector proxy. Declarative
/// config, never inferred from flows.
class ZoneTopology {
 public:
  ZoneTopology() = default;
  ZoneTopology(std::vector<ZoneInfo> zones, std::set<std::pair<int, int>> edges);

  /// Text format, whitespace separated, '#' comments:
  ///   zone <id> <active_from> <active_to> <first_sample_year>
  ///   edge <zone_a> <zone_b>
  static ZoneTopology parse(std::istream& in, const std::string& name);
  static ZoneTopology parse_file(const std::filesystem::path& path);

  void write(std::ostream& out) const;

  std::size_t size() const { return zones_.size(); }
  const std::vector<ZoneInfo>& zones() const { return zones_; }
  const ZoneInfo& zone(int idx) const { return zones_[idx]; }

  /// Index of a zone id, or -1.
  int index_of(std::string_view id) const;
  bool contains(std::string_view id) const { return index_of(id) >= 0; }

  /// Neighbor indices of zone idx, ascending.
  const std::vector<int>& neighbors(int idx) const { return adjacency_[idx]; }
  bool adjacent(int a, int b) const;
  const std::set<std::pair<int, int>>& edges() const { return edges_; }

  bool in_lifecycle(int idx, EpochHour hour) const;

 private:
  void build_index();
  void validate() const;

  std::vector<ZoneInfo> zones_;                // sorted by id
  std::map<std::string, int, std::less<>> index_;
  std::set<std::pair<int, int>> edges_;        // first < second
  std::vector<std::vector<int>> adjacency_;
};

}  // namespace vfp
