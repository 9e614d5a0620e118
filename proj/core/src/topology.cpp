#include "vfp/topology.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "vfp/common.hpp"

namespace vfp {

ZoneTopology::ZoneTopology(std::vector<ZoneInfo> zones,
                           std::set<std::pair<int, int>> edges)
    : zones_(std::move(zones)), edges_(std::move(edges)) {
  std::sort(zones_.begin(), zones_.end(),
            [](const ZoneInfo& a, const ZoneInfo& b) { return a.id < b.id; });
  build_index();
  validate();
}

ZoneTopology ZoneTopology::parse(std::istream& in, const std::string& name) {
  std::vector<ZoneInfo> zones;
  std::vector<std::pair<std::string, std::string>> raw_edges;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ss(line);
    std::string kind;
    if (!(ss >> kind)) continue;
    auto ctx = [&] { return name + ":" + std::to_string(lineno) + ": "; };
    if (kind == "zone") {
      ZoneInfo z;
      std::string from, to;
      if (!(ss >> z.id >> from >> to >> z.first_sample_year))
        throw DataError(ctx() + "malformed zone line");
      z.active_from = parse_date(from);
      z.active_to = parse_date(to);
      zones.push_back(std::move(z));
    } else if (kind == "edge") {
      std::string a, b;
      if (!(ss >> a >> b)) throw DataError(ctx() + "malformed edge line");
      raw_edges.emplace_back(std::move(a), std::move(b));
    } else {
      throw DataError(ctx() + "unknown directive: " + kind);
    }
  }

  std::sort(zones.begin(), zones.end(),
            [](const ZoneInfo& a, const ZoneInfo& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < zones.size(); ++i)
    if (zones[i].id == zones[i - 1].id)
      throw DataError(name + ": duplicate zone id: " + zones[i].id);

  std::map<std::string, int, std::less<>> index;
  for (std::size_t i = 0; i < zones.size(); ++i)
    index.emplace(zones[i].id, int(i));

  std::set<std::pair<int, int>> edges;
  for (const auto& [a, b] : raw_edges) {
    auto ia = index.find(a);
    auto ib = index.find(b);
    if (ia == index.end()) throw DataError(name + ": edge names unknown zone: " + a);
    if (ib == index.end()) throw DataError(name + ": edge names unknown zone: " + b);
    if (ia->second == ib->second)
      throw DataError(name + ": self-pair edge: " + a);
    edges.emplace(std::min(ia->second, ib->second),
                  std::max(ia->second, ib->second));
  }

  ZoneTopology topo;
  topo.zones_ = std::move(zones);
  topo.edges_ = std::move(edges);
  topo.build_index();
  topo.validate();
  return topo;
}

ZoneTopology ZoneTopology::parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open topology file: " + path.string());
  return parse(in, path.string());
}

void ZoneTopology::write(std::ostream& out) const {
  out << "# zone <id> <active_from> <active_to> <first_sample_year>\n";
  for (const auto& z : zones_)
    out << "zone " << z.id << ' ' << format_date(z.active_from) << ' '
        << format_date(z.active_to) << ' ' << z.first_sample_year << '\n';
  out << "# edge <zone_a> <zone_b>\n";
  for (const auto& [a, b] : edges_)
    out << "edge " << zones_[a].id << ' ' << zones_[b].id << '\n';
}

void ZoneTopology::build_index() {
  index_.clear();
  for (std::size_t i = 0; i < zones_.size(); ++i)
    index_.emplace(zones_[i].id, int(i));
  adjacency_.assign(zones_.size(), {});
  for (const auto& [a, b] : edges_) {
    adjacency_[a].push_back(b);
    adjacency_[b].push_back(a);
  }
  for (auto& nb : adjacency_) std::sort(nb.begin(), nb.end());
}

void ZoneTopology::validate() const {
  for (const auto& z : zones_) {
    if (z.active_to < z.active_from)
      throw DataError("zone " + z.id + ": lifecycle end precedes start");
    int y0 = year_of_day(z.active_from);
    int y1 = year_of_day(z.active_to);
    if (z.first_sample_year < y0 || z.first_sample_year > y1)
      throw DataError("zone " + z.id + ": first_sample_year " +
                      std::to_string(z.first_sample_year) +
                      " outside lifecycle " + format_date(z.active_from) +
                      " .. " + format_date(z.active_to));
  }
  for (const auto& [a, b] : edges_)
    if (a == b) throw DataError("self-pair edge in topology");
}

int ZoneTopology::index_of(std::string_view id) const {
  auto it = index_.find(id);
  return it == index_.end() ? -1 : it->second;
}

bool ZoneTopology::adjacent(int a, int b) const {
  return edges_.count({std::min(a, b), std::max(a, b)}) > 0;
}

bool ZoneTopology::in_lifecycle(int idx, EpochHour hour) const {
  const ZoneInfo& z = zones_[idx];
  return hour >= z.active_from * 24 && hour < (z.active_to + 1) * 24;
}

}  // namespace vfp
