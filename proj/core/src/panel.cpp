#include "vfp/panel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "vfp/common.hpp"
#include "vfp/csv.hpp"

namespace vfp {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

Estimator parse_estimator(std::string_view s) {
  if (s == "rewb") return Estimator::rewb;
  if (s == "fe") return Estimator::fe;
  throw ConfigError("unknown estimator: " + std::string(s));
}

std::string_view estimator_name(Estimator e) {
  return e == Estimator::rewb ? "rewb" : "fe";
}

ControlSet parse_control_set(std::string_view s) {
  if (s == "full") return ControlSet::full;
  if (s == "penetration_only") return ControlSet::penetration_only;
  throw ConfigError("unknown control set: " + std::string(s));
}

std::string_view control_set_name(ControlSet c) {
  return c == ControlSet::full ? "full" : "penetration_only";
}

std::string_view column_kind_name(ColumnKind k) {
  switch (k) {
    case ColumnKind::within: return "within";
    case ColumnKind::between: return "between";
    case ColumnKind::time_invariant: return "time_invariant";
    case ColumnKind::interaction: return "interaction";
    case ColumnKind::intercept: return "intercept";
  }
  return "";
}

void PanelInput::emit(const std::filesystem::path& path) const {
  CsvWriter w(path);
  w.raw_line(
      "tech,aggregation,zone,period_key,period,vf,dom_pen,nbr_pen,"
      "dom_pen_other,nbr_pen_other,hydro_pump,hydro_resv,load_corr,gen_cov,"
      "gas_coal,ic");
  for (const auto& r : rows) {
    w.field(tech_name(tech));
    w.field(aggregation_name(level));
    w.field(zone_ids[r.zone]);
    w.field(r.period_key);
    w.field(period_label({level, r.period_key}));
    w.field(r.vf);
    w.field(r.dom_pen);
    w.field(r.nbr_pen);
    w.field(r.dom_pen_other);
    w.field(r.nbr_pen_other);
    w.field(r.hydro_pump);
    w.field(r.hydro_resv);
    w.field(r.load_corr);
    w.field(r.gen_cov);
    w.field(r.gas_coal);
    w.field(r.ic);
    w.end_row();
  }
}

PanelInput PanelInput::load_csv(const std::filesystem::path& path) {
  PanelInput out;
  CsvReader reader(path);
  reader.expect_header(
      "tech,aggregation,zone,period_key,period,vf,dom_pen,nbr_pen,"
      "dom_pen_other,nbr_pen_other,hydro_pump,hydro_resv,load_corr,gen_cov,"
      "gas_coal,ic");
  std::vector<std::string_view> f;
  struct RawRow {
    std::string zone;
    PanelInputRow row;
  };
  std::vector<RawRow> raw;
  bool first = true;
  while (reader.next(f)) {
    if (f.size() != 16)
      throw DataError(path.string() + ":" + std::to_string(reader.line()) +
                      ": malformed row: want 16 fields");
    if (first) {
      out.tech = parse_tech(f[0]);
      out.level = parse_aggregation(f[1]);
      first = false;
    } else if (f[0] != tech_name(out.tech) ||
               f[1] != aggregation_name(out.level)) {
      throw DataError(path.string() + ":" + std::to_string(reader.line()) +
                      ": mixed tech or aggregation in panel input");
    }
    RawRow rr;
    rr.zone = std::string(f[2]);
    auto num = [&](std::string_view s) {
      if (s.empty()) return kNaN;
      double v;
      if (!try_parse_double(s, v))
        throw DataError(path.string() + ":" + std::to_string(reader.line()) +
                        ": malformed number \"" + std::string(s) + "\"");
      return v;
    };
    rr.row.period_key = std::int64_t(num(f[3]));
    rr.row.vf = num(f[5]);
    rr.row.dom_pen = num(f[6]);
    rr.row.nbr_pen = num(f[7]);
    rr.row.dom_pen_other = num(f[8]);
    rr.row.nbr_pen_other = num(f[9]);
    rr.row.hydro_pump = num(f[10]);
    rr.row.hydro_resv = num(f[11]);
    rr.row.load_corr = num(f[12]);
    rr.row.gen_cov = num(f[13]);
    rr.row.gas_coal = num(f[14]);
    rr.row.ic = num(f[15]);
    raw.push_back(std::move(rr));
  }
  std::set<std::string> ids;
  for (const auto& rr : raw) ids.insert(rr.zone);
  out.zone_ids.assign(ids.begin(), ids.end());
  for (auto& rr : raw) {
    rr.row.zone = int(std::lower_bound(out.zone_ids.begin(), out.zone_ids.end(),
                                       rr.zone) -
                      out.zone_ids.begin());
    out.rows.push_back(rr.row);
  }
  return out;
}

int DesignMatrix::col(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return int(i);
  return -1;
}

void DesignMatrix::emit(const std::filesystem::path& path) const {
  CsvWriter w(path);
  std::string header = "zone,period_key,y";
  for (const auto& n : names) header += "," + n;
  w.raw_line(header);
  for (Eigen::Index r = 0; r < X.rows(); ++r) {
    w.field(entity_ids[entity[r]]);
    w.field(period_keys[r]);
    w.field(y[r]);
    for (Eigen::Index c = 0; c < X.cols(); ++c) w.field(X(r, c));
    w.end_row();
  }
}

WithinBetween within_between(std::span<const double> x,
                             std::span<const int> entity, int n_entities) {
  WithinBetween out;
  std::vector<double> mean(n_entities, 0.0);
  std::vector<std::int64_t> count(n_entities, 0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    mean[entity[i]] += x[i];
    count[entity[i]]++;
  }
  for (int e = 0; e < n_entities; ++e)
    if (count[e] > 0) mean[e] /= double(count[e]);
  // Refinement pass: pushes per-entity within sums to the rounding floor.
  std::vector<double> corr(n_entities, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i)
    corr[entity[i]] += x[i] - mean[entity[i]];
  for (int e = 0; e < n_entities; ++e) {
    if (count[e] > 0) mean[e] += corr[e] / double(count[e]);
    if (count[e] == 1)
      out.warnings.push_back("entity " + std::to_string(e) +
                             " has a single period; within component is zero");
  }
  out.within.resize(x.size());
  out.between.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out.between[i] = mean[entity[i]];
    out.within[i] = x[i] - out.between[i];
  }
  return out;
}

std::vector<double> lower_level_interaction(std::span<const double> x_within,
                                            std::span<const double> z_within,
                                            std::span<const int> entity,
                                            int n_entities) {
  std::vector<double> w(x_within.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = x_within[i] * z_within[i];
  auto wb = within_between(w, entity, n_entities);
  return std::move(wb.within);
}

std::vector<double> cross_level_interaction(std::span<const double> x_within,
                                            std::span<const double> m_centered) {
  std::vector<double> out(x_within.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = x_within[i] * m_centered[i];
  return out;
}

namespace {

using FieldGetter = double PanelInputRow::*;

struct VariablePlan {
  std::string name;      // base name, e.g. "dom_pen"
  FieldGetter field;
  bool between = true;   // emit a between column
};

double grand_center(std::vector<double>& v) {
  double g = refined_mean(v.data(), v.size());
  for (double& x : v) x -= g;
  return g;
}

}  // namespace

DesignMatrix assemble_design(const ModelSpec& spec, const PanelInput& input) {
  const bool full = spec.controls == ControlSet::full;

  // Base variables, in the documented column order. The gas-coal ratio is
  // common to all zones: its entity means differ only through sample-window
  // composition, so it enters within-only and interacts on the lower level.
  std::vector<VariablePlan> vars;
  vars.push_back({"dom_pen", &PanelInputRow::dom_pen, true});
  if (full) {
    vars.push_back({"nbr_pen", &PanelInputRow::nbr_pen, true});
    vars.push_back({"dom_pen_other", &PanelInputRow::dom_pen_other, true});
    vars.push_back({"nbr_pen_other", &PanelInputRow::nbr_pen_other, true});
    vars.push_back({"hydro_pump", &PanelInputRow::hydro_pump, true});
    vars.push_back({"hydro_resv", &PanelInputRow::hydro_resv, true});
    vars.push_back({"load_corr", &PanelInputRow::load_corr, true});
    vars.push_back({"gen_cov", &PanelInputRow::gen_cov, true});
    vars.push_back({"gas_coal", &PanelInputRow::gas_coal, false});
  }
  // Moderators of domestic penetration: lower-level (within*within) and
  // cross-level (within*entity average); time-invariant IC is cross-level
  // only for both domestic and neighboring penetration.
  const std::vector<std::string> lower_level_mods = {
      "hydro_pump", "hydro_resv", "gas_coal", "load_corr", "gen_cov"};
  const std::vector<std::string> cross_level_mods = {
      "hydro_pump", "hydro_resv", "load_corr", "gen_cov"};

  // Complete-case rows: every referenced regressor and y present.
  std::vector<PanelInputRow> rows;
  for (const auto& r : input.rows) {
    bool ok = !std::isnan(r.vf);
    for (const auto& v : vars) ok = ok && !std::isnan(r.*(v.field));
    if (full) ok = ok && !std::isnan(r.ic);
    if (ok) rows.push_back(r);
  }
  if (rows.empty())
    throw DataError("assemble_design: no complete-case observations");

  std::sort(rows.begin(), rows.end(),
            [](const PanelInputRow& a, const PanelInputRow& b) {
              if (a.zone != b.zone) return a.zone < b.zone;
              return a.period_key < b.period_key;
            });

  DesignMatrix d;
  const std::size_t n = rows.size();
  d.entity.resize(n);
  d.period_keys.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (i == 0 || rows[i].zone != rows[i - 1].zone)
      d.entity_ids.push_back(input.zone_ids[rows[i].zone]);
    d.entity[i] = int(d.entity_ids.size()) - 1;
    d.period_keys[i] = rows[i].period_key;
  }
  const int n_entities = int(d.entity_ids.size());

  d.y.resize(Eigen::Index(n));
  for (std::size_t i = 0; i < n; ++i) d.y[Eigen::Index(i)] = rows[i].vf;

  // Decompose every base variable once.
  std::map<std::string, WithinBetween> parts;
  bool warned_single = false;
  for (const auto& v : vars) {
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = rows[i].*(v.field);
    auto wb = within_between(x, d.entity, n_entities);
    if (!warned_single && !wb.warnings.empty()) {
      d.warnings.push_back(
          std::to_string(wb.warnings.size()) +
          " single-period entities: within components are zero");
      warned_single = true;
    }
    parts[v.name] = std::move(wb);
  }

  struct PendingColumn {
    std::string name;
    ColumnKind kind;
    std::vector<double> values;
  };
  std::vector<PendingColumn> cols;

  for (const auto& v : vars) {
    auto& wb = parts[v.name];
    cols.push_back({"w_" + v.name, ColumnKind::within, wb.within});
    if (v.between) {
      std::vector<double> centered = wb.between;
      double g = grand_center(centered);
      d.centering["b_" + v.name] = g;
      cols.push_back({"b_" + v.name, ColumnKind::between, std::move(centered)});
    }
  }

  std::vector<double> ic_centered;
  if (full) {
    ic_centered.resize(n);
    for (std::size_t i = 0; i < n; ++i) ic_centered[i] = rows[i].ic;
    double g = grand_center(ic_centered);
    d.centering["b_ic"] = g;
    cols.push_back({"b_ic", ColumnKind::time_invariant, ic_centered});
  }

  if (full) {
    const auto& dom_within = parts["dom_pen"].within;
    for (const auto& mod : lower_level_mods) {
      cols.push_back({"wx_dom_pen." + mod, ColumnKind::interaction,
                      lower_level_interaction(dom_within, parts[mod].within,
                                              d.entity, n_entities)});
    }
    for (const auto& mod : cross_level_mods) {
      // Centered entity average of the moderator, constant per entity.
      std::vector<double> centered = parts[mod].between;
      double g = refined_mean(centered.data(), centered.size());
      for (double& x : centered) x -= g;
      cols.push_back({"cx_dom_pen." + mod, ColumnKind::interaction,
                      cross_level_interaction(dom_within, centered)});
    }
    cols.push_back({"cx_dom_pen.ic", ColumnKind::interaction,
                    cross_level_interaction(dom_within, ic_centered)});
    cols.push_back({"cx_nbr_pen.ic", ColumnKind::interaction,
                    cross_level_interaction(parts["nbr_pen"].within,
                                            ic_centered)});
  }

  // Degenerate columns (no variation on the realized sample) are dropped,
  // not reported as collinearity.
  std::vector<PendingColumn> kept;
  for (auto& c : cols) {
    double lo = c.values[0], hi = c.values[0], amax = 0.0;
    for (double v : c.values) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      amax = std::max(amax, std::abs(v));
    }
    if (hi - lo <= 1e-12 * std::max(1.0, amax)) {
      d.warnings.push_back("dropping zero-variance column " + c.name);
      continue;
    }
    kept.push_back(std::move(c));
  }

  d.X.resize(Eigen::Index(n), Eigen::Index(kept.size() + 1));
  for (std::size_t c = 0; c < kept.size(); ++c) {
    d.names.push_back(kept[c].name);
    d.kinds.push_back(kept[c].kind);
    for (std::size_t i = 0; i < n; ++i)
      d.X(Eigen::Index(i), Eigen::Index(c)) = kept[c].values[i];
  }
  d.names.push_back("intercept");
  d.kinds.push_back(ColumnKind::intercept);
  d.X.col(Eigen::Index(kept.size())).setOnes();

  // Rank check with column names in the error message.
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(d.X);
  if (qr.rank() < d.X.cols()) {
    std::string msg = "assemble_design: rank-deficient design; collinear columns:";
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index k = qr.rank(); k < d.X.cols(); ++k)
      msg += " " + d.names[perm[k]];
    throw NumericError(msg);
  }

  return d;
}

}  // namespace vfp
