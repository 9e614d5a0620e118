#include "vfp/effects.hpp"

#include <algorithm>
#include <cmath>

#include "vfp/common.hpp"
#include "vfp/csv.hpp"

namespace vfp {

namespace {
constexpr double kZ95 = 1.96;
}

ConditionalEffect conditional_effect(const ModelResult& result,
                                     const std::string& base,
                                     const std::string& interaction,
                                     double m) {
  ConditionalEffect ce;
  ce.variable = base;
  ce.moderator = interaction;
  ce.m = m;
  double b = result.coef(base);
  double g = result.coef(interaction);
  ce.effect = b + g * m;
  double var = result.covariance(base, base) +
               m * m * result.covariance(interaction, interaction) +
               2.0 * m * result.covariance(base, interaction);
  ce.std_error = std::sqrt(std::max(0.0, var));
  ce.ci_low = ce.effect - kZ95 * ce.std_error;
  ce.ci_high = ce.effect + kZ95 * ce.std_error;
  return ce;
}

void ZoneEffectsResult::emit(const std::filesystem::path& path) const {
  CsvWriter w(path);
  w.raw_line(
      "zone,ic_centered,domestic_effect,domestic_se,neighboring_effect,"
      "neighboring_se,combined,combined_se,ci_low,ci_high");
  for (const auto& z : zones) {
    w.field(z.zone);
    w.field(z.ic_centered);
    w.field(z.domestic.effect);
    w.field(z.domestic.std_error);
    w.field(z.neighboring.effect);
    w.field(z.neighboring.std_error);
    w.field(z.combined);
    w.field(z.combined_se);
    w.field(z.ci_low);
    w.field(z.ci_high);
    w.end_row();
  }
}

ZoneEffectsResult zone_effects(
    const ModelResult& result, const std::map<std::string, double>& ic_by_zone) {
  ZoneEffectsResult out;
  auto centering = result.centering.find("b_ic");
  if (centering == result.centering.end())
    throw NumericError("zone_effects: design carries no IC centering");
  const double ic_mean = centering->second;

  const std::string dom = "w_dom_pen", nbr = "w_nbr_pen";
  const std::string dom_ic = "cx_dom_pen.ic", nbr_ic = "cx_nbr_pen.ic";

  // Combined effect d(VF)/d(joint penetration) = g' beta with
  // g = 1[dom] + 1[nbr] + m 1[dom_ic] + m 1[nbr_ic]; var = g' V g.
  auto combined = [&](double m, double& eff, double& se) {
    eff = result.coef(dom) + result.coef(nbr) +
          m * (result.coef(dom_ic) + result.coef(nbr_ic));
    double var =
        result.covariance(dom, dom) + result.covariance(nbr, nbr) +
        2.0 * result.covariance(dom, nbr) +
        m * m *
            (result.covariance(dom_ic, dom_ic) +
             result.covariance(nbr_ic, nbr_ic) +
             2.0 * result.covariance(dom_ic, nbr_ic)) +
        2.0 * m *
            (result.covariance(dom, dom_ic) + result.covariance(dom, nbr_ic) +
             result.covariance(nbr, dom_ic) + result.covariance(nbr, nbr_ic));
    se = std::sqrt(std::max(0.0, var));
  };

  combined(0.0, out.combined_at_mean, out.combined_at_mean_se);

  for (const auto& [zone, ic] : ic_by_zone) {
    if (std::isnan(ic)) {
      out.warnings.push_back("zone " + zone + " lacks IC; omitted");
      continue;
    }
    ZoneEffect ze;
    ze.zone = zone;
    ze.ic_centered = ic - ic_mean;
    ze.domestic = conditional_effect(result, dom, dom_ic, ze.ic_centered);
    ze.neighboring = conditional_effect(result, nbr, nbr_ic, ze.ic_centered);
    combined(ze.ic_centered, ze.combined, ze.combined_se);
    ze.ci_low = ze.combined - kZ95 * ze.combined_se;
    ze.ci_high = ze.combined + kZ95 * ze.combined_se;
    out.zones.push_back(std::move(ze));
  }
  return out;
}

ModeratorCurve moderator_curve(const ModelResult& result,
                               const std::string& base,
                               const std::string& interaction, double m_lo,
                               double m_hi, int grid_points) {
  if (grid_points < 1) throw ConfigError("moderator_curve: empty grid");
  ModeratorCurve curve;
  curve.variable = base;
  curve.moderator = interaction;
  for (int i = 0; i < grid_points; ++i) {
    double m = grid_points == 1
                   ? m_lo
                   : m_lo + (m_hi - m_lo) * double(i) / double(grid_points - 1);
    ConditionalEffect ce = conditional_effect(result, base, interaction, m);
    curve.points.push_back({m, ce.effect, ce.std_error, ce.ci_low, ce.ci_high});
  }
  double g = result.coef(interaction);
  if (g != 0.0) {
    double root = -result.coef(base) / g;
    if (root >= std::min(m_lo, m_hi) && root <= std::max(m_lo, m_hi))
      curve.zero_crossing = root;
  }
  return curve;
}

std::vector<ModeratorCurve> moderator_curves(const ModelResult& result,
                                             const DesignMatrix& design,
                                             int grid_points) {
  std::vector<ModeratorCurve> out;
  for (std::size_t i = 0; i < result.names.size(); ++i) {
    const std::string& name = result.names[i];
    std::string base;
    std::string mod_col;
    if (name.starts_with("cx_dom_pen.")) {
      base = "w_dom_pen";
      std::string mod = name.substr(std::string("cx_dom_pen.").size());
      mod_col = mod == "ic" ? "b_ic" : "b_" + mod;
    } else if (name.starts_with("cx_nbr_pen.")) {
      base = "w_nbr_pen";
      mod_col = "b_ic";
    } else {
      continue;
    }
    // Grid over the observed centered moderator range.
    int c = design.col(mod_col);
    double lo = -1.0, hi = 1.0;
    if (c >= 0) {
      lo = design.X.col(c).minCoeff();
      hi = design.X.col(c).maxCoeff();
    }
    out.push_back(moderator_curve(result, base, name, lo, hi, grid_points));
  }
  return out;
}

void emit_curves(const std::vector<ModeratorCurve>& curves,
                 const std::filesystem::path& path) {
  CsvWriter w(path);
  w.raw_line("variable,moderator,m,effect,se,ci_low,ci_high");
  for (const auto& c : curves) {
    for (const auto& p : c.points) {
      w.field(c.variable);
      w.field(c.moderator);
      w.field(p.m);
      w.field(p.effect);
      w.field(p.std_error);
      w.field(p.ci_low);
      w.field(p.ci_high);
      w.end_row();
    }
  }
}

}  // namespace vfp
