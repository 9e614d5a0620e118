#include "vfp/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

#include "vfp/common.hpp"

namespace vfp {

OlsFit ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
           const std::vector<std::string>* names) {
  if (X.rows() <= X.cols())
    throw NumericError("ols: need more observations than columns (" +
                       std::to_string(X.rows()) + " x " +
                       std::to_string(X.cols()) + ")");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  if (qr.rank() < X.cols()) {
    std::string msg = "ols: rank-deficient design";
    if (names) {
      msg += "; collinear columns:";
      const auto& perm = qr.colsPermutation().indices();
      for (Eigen::Index k = qr.rank(); k < X.cols(); ++k)
        msg += " " + (*names)[perm[k]];
    }
    throw NumericError(msg);
  }
  OlsFit out;
  out.beta = qr.solve(y);
  out.residuals = y - X * out.beta;
  const auto& R = qr.matrixR();
  double dmax = std::abs(R(0, 0));
  double dmin = std::abs(R(X.cols() - 1, X.cols() - 1));
  out.condition = dmin > 0 ? dmax / dmin : std::numeric_limits<double>::infinity();
  if (out.condition > 1e10)
    out.warnings.push_back("near-singular design: condition estimate " +
                           format_double(out.condition));
  return out;
}

namespace {

struct EntityBlocks {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> blocks;  // [begin, end)
  Eigen::Index min_len = 0;
};

EntityBlocks entity_blocks(std::span<const int> entity) {
  EntityBlocks out;
  Eigen::Index n = Eigen::Index(entity.size());
  Eigen::Index start = 0;
  for (Eigen::Index i = 1; i <= n; ++i) {
    if (i == n || entity[i] != entity[start]) {
      out.blocks.emplace_back(start, i);
      start = i;
    }
  }
  for (Eigen::Index i = 1; i < n; ++i)
    if (entity[i] < entity[i - 1])
      throw NumericError("rows not grouped by entity");
  out.min_len = n;
  for (auto& [a, b] : out.blocks) out.min_len = std::min(out.min_len, b - a);
  return out;
}

}  // namespace

Eigen::MatrixXd newey_west(const Eigen::MatrixXd& X,
                           const Eigen::VectorXd& residuals,
                           std::span<const int> entity, int lags) {
  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();
  if (residuals.size() != n || Eigen::Index(entity.size()) != n)
    throw NumericError("newey_west: size mismatch");
  if (lags < 0) throw NumericError("newey_west: negative lag count");
  EntityBlocks blocks = entity_blocks(entity);
  if (lags >= blocks.min_len)
    throw NumericError("newey_west: lag count " + std::to_string(lags) +
                       " not below shortest entity length " +
                       std::to_string(blocks.min_len));

  // Score rows u_t = e_t * x_t; S = sum_t u u' plus Bartlett-weighted
  // within-entity autocovariances.
  Eigen::MatrixXd U = X.array().colwise() * residuals.array();
  Eigen::MatrixXd S = U.transpose() * U;
  for (const auto& [a, b] : blocks.blocks) {
    Eigen::Index T = b - a;
    for (Eigen::Index l = 1; l <= std::min<Eigen::Index>(lags, T - 1); ++l) {
      double w = 1.0 - double(l) / double(lags + 1);
      Eigen::MatrixXd A =
          U.middleRows(a + l, T - l).transpose() * U.middleRows(a, T - l);
      S.noalias() += w * (A + A.transpose());
    }
  }

  // Sandwich through the R factor of X = QR: (X'X)^-1 = R^-1 R^-T.
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(X);
  Eigen::MatrixXd R = qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();
  auto solve_xtx = [&](const Eigen::MatrixXd& M) {
    Eigen::MatrixXd t = R.transpose().triangularView<Eigen::Lower>().solve(M);
    return Eigen::MatrixXd(R.triangularView<Eigen::Upper>().solve(t));
  };
  Eigen::MatrixXd half = solve_xtx(S);                      // (X'X)^-1 S
  Eigen::MatrixXd cov = solve_xtx(half.transpose());        // (X'X)^-1 S' ...
  cov = 0.5 * (cov + cov.transpose()).eval();
  return cov;
}

double durbin_watson(const Eigen::VectorXd& residuals,
                     std::span<const int> entity) {
  EntityBlocks blocks = entity_blocks(entity);
  double num = 0, den = 0;
  for (Eigen::Index i = 0; i < residuals.size(); ++i)
    den += residuals[i] * residuals[i];
  for (const auto& [a, b] : blocks.blocks)
    for (Eigen::Index t = a + 1; t < b; ++t) {
      double d = residuals[t] - residuals[t - 1];
      num += d * d;
    }
  return den > 0 ? num / den : 0.0;
}

int default_hac_lags(std::span<const int> entity) {
  EntityBlocks blocks = entity_blocks(entity);
  double t_mean = double(entity.size()) / double(blocks.blocks.size());
  int lags = int(std::floor(4.0 * std::pow(t_mean / 100.0, 2.0 / 9.0)));
  lags = std::min<int>(lags, int(blocks.min_len) - 1);
  return std::max(lags, 0);
}

double adjusted_r2(double r2, std::int64_t n, int p_excluding_intercept) {
  if (n <= p_excluding_intercept + 1)
    throw NumericError("adjusted_r2: need n_obs > n_params + 1");
  return 1.0 - (1.0 - r2) * double(n - 1) /
                   double(n - p_excluding_intercept - 1);
}

double normal_p_value(double t) {
  return std::erfc(std::abs(t) / std::sqrt(2.0));
}

std::string significance_stars(double p) {
  if (p < 0.01) return "***";
  if (p < 0.05) return "**";
  if (p < 0.10) return "*";
  return "";
}

int ModelResult::col(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return int(i);
  return -1;
}

double ModelResult::coef(std::string_view name) const {
  int c = col(name);
  if (c < 0)
    throw NumericError("coefficient not in model: " + std::string(name));
  return beta[c];
}

double ModelResult::covariance(std::string_view a, std::string_view b) const {
  int ca = col(a), cb = col(b);
  if (ca < 0 || cb < 0)
    throw NumericError("covariance entry missing: " + std::string(a) + ", " +
                       std::string(b));
  return hac(ca, cb);
}

nlohmann::json ModelResult::to_json() const {
  nlohmann::json j;
  j["technology"] = tech_name(technology);
  j["estimator"] = estimator_name(estimator);
  j["aggregation"] = aggregation_name(aggregation);
  j["weights_scheme"] = weight_scheme_name(weights);
  j["n_obs"] = n_obs;
  j["n_params"] = n_params;
  j["hac_lags"] = hac_lags;
  j["r2"] = r2;
  j["adjusted_r2"] = adj_r2;
  j["durbin_watson"] = durbin_watson;
  j["condition"] = condition;
  nlohmann::json coefs = nlohmann::json::array();
  for (std::size_t i = 0; i < names.size(); ++i) {
    coefs.push_back({{"name", names[i]},
                     {"kind", std::string(column_kind_name(kinds[i]))},
                     {"estimate", beta[Eigen::Index(i)]},
                     {"se", se[Eigen::Index(i)]},
                     {"p", p_values[i]},
                     {"stars", stars[i]}});
  }
  j["coefficients"] = coefs;
  nlohmann::json cj = nlohmann::json::object();
  for (const auto& [k, v] : centering) cj[k] = v;
  j["centering"] = cj;
  j["warnings"] = warnings;
  return j;
}

void ModelResult::write_json(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << to_json().dump(2) << '\n';
}

namespace {

std::string base_label(std::string_view base, Tech tech) {
  std::string own(tech_name(tech));
  std::string other(tech_name(other_tech(tech)));
  own[0] = char(std::toupper(own[0]));
  std::string own_cap = own;
  if (base == "dom_pen") return "Domestic " + std::string(tech_name(tech));
  if (base == "nbr_pen") return "Neighboring " + std::string(tech_name(tech));
  if (base == "dom_pen_other") return "Domestic " + other;
  if (base == "nbr_pen_other") return "Neighboring " + other;
  if (base == "hydro_pump") return "Hydro pumped storage capacity";
  if (base == "hydro_resv") return "Hydro reservoir capacity";
  if (base == "load_corr") return own_cap + "-load correlation";
  if (base == "gen_cov") return own_cap + " coefficient of variation";
  if (base == "gas_coal") return "Clean gas-coal price ratio";
  if (base == "ic") return "Interconnector capacity";
  return std::string(base);
}

std::string column_label(const std::string& name, Tech tech) {
  if (name == "intercept") return "Intercept";
  auto strip = [&](std::string_view prefix) {
    return name.substr(prefix.size());
  };
  if (name.starts_with("wx_dom_pen.")) {
    return base_label("dom_pen", tech) + "*" +
           base_label(strip("wx_dom_pen."), tech);
  }
  if (name.starts_with("cx_dom_pen.")) {
    return base_label("dom_pen", tech) + "*" +
           base_label(strip("cx_dom_pen."), tech) + " (zone average)";
  }
  if (name.starts_with("cx_nbr_pen.")) {
    return base_label("nbr_pen", tech) + "*" +
           base_label(strip("cx_nbr_pen."), tech) + " (zone average)";
  }
  if (name.starts_with("w_")) return base_label(strip("w_"), tech);
  if (name.starts_with("b_")) return base_label(strip("b_"), tech) + " (zone average)";
  return name;
}

std::string fmt3(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

}  // namespace

std::string ModelResult::to_table() const {
  std::string out;
  auto line = [&](std::size_t i) {
    out += "  " + column_label(names[i], technology) + "  " +
           fmt3(beta[Eigen::Index(i)]) + stars[i] + " (" +
           fmt3(se[Eigen::Index(i)]) + ")\n";
  };
  out += "WITHIN EFFECTS\n";
  for (std::size_t i = 0; i < names.size(); ++i)
    if (kinds[i] == ColumnKind::within ||
        (kinds[i] == ColumnKind::interaction && names[i].starts_with("wx_")))
      line(i);
  bool any_between = false;
  for (auto k : kinds)
    any_between |= (k == ColumnKind::between || k == ColumnKind::time_invariant);
  if (any_between) {
    out += "BETWEEN EFFECTS\n";
    for (std::size_t i = 0; i < names.size(); ++i)
      if (kinds[i] == ColumnKind::between ||
          kinds[i] == ColumnKind::time_invariant)
        line(i);
  }
  bool any_cross = false;
  for (std::size_t i = 0; i < names.size(); ++i)
    any_cross |= names[i].starts_with("cx_");
  if (any_cross) {
    out += "CROSS-LEVEL INTERACTIONS\n";
    for (std::size_t i = 0; i < names.size(); ++i)
      if (kinds[i] == ColumnKind::interaction && names[i].starts_with("cx_"))
        line(i);
  }
  for (std::size_t i = 0; i < names.size(); ++i)
    if (kinds[i] == ColumnKind::intercept) line(i);
  out += "Adjusted R2  " + fmt3(adj_r2) + "\n";
  out += "Observations  " + std::to_string(n_obs) + "\n";
  out += "Durbin-Watson  " + fmt3(durbin_watson) + "\n";
  out += "HAC lags  " + std::to_string(hac_lags) + "\n";
  return out;
}

ModelResult fit(const ModelSpec& spec, const DesignMatrix& design) {
  ModelResult r;
  r.estimator = spec.estimator;
  r.technology = spec.technology;
  r.aggregation = spec.aggregation;
  r.weights = spec.weights;
  r.centering = design.centering;
  r.warnings = design.warnings;
  r.entity = design.entity;

  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  double sst = 0.0;
  if (spec.estimator == Estimator::rewb) {
    X = design.X;
    y = design.y;
    r.names = design.names;
    r.kinds = design.kinds;
    double ybar = y.mean();
    sst = (y.array() - ybar).square().sum();
    r.n_params = int(X.cols()) - 1;
  } else {
    // Entity demeaning absorbs between and time-invariant columns; within
    // and interaction columns already have zero entity means by
    // construction, so they carry over unchanged.
    std::vector<Eigen::Index> keep;
    for (std::size_t i = 0; i < design.kinds.size(); ++i)
      if (is_within_type(design.kinds[i])) keep.push_back(Eigen::Index(i));
    if (keep.empty())
      throw NumericError("fe estimator: no within-type columns in design");
    X.resize(design.X.rows(), Eigen::Index(keep.size()));
    for (std::size_t k = 0; k < keep.size(); ++k) {
      X.col(Eigen::Index(k)) = design.X.col(keep[k]);
      r.names.push_back(design.names[keep[k]]);
      r.kinds.push_back(design.kinds[keep[k]]);
    }
    std::vector<double> yv(design.y.data(), design.y.data() + design.y.size());
    auto wb = within_between(yv, design.entity, int(design.entity_ids.size()));
    y.resize(design.y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = wb.within[i];
    sst = y.squaredNorm();
    r.n_params = int(X.cols());
  }

  OlsFit f = ols(X, y, &r.names);
  for (auto& w : f.warnings) r.warnings.push_back(w);
  r.beta = f.beta;
  r.residuals = f.residuals;
  r.condition = f.condition;
  r.n_obs = X.rows();

  int lags = spec.hac_lags >= 0 ? spec.hac_lags : default_hac_lags(design.entity);
  r.hac_lags = lags;
  r.hac = newey_west(X, f.residuals, design.entity, lags);
  r.se.resize(r.beta.size());
  for (Eigen::Index i = 0; i < r.beta.size(); ++i)
    r.se[i] = std::sqrt(std::max(0.0, r.hac(i, i)));
  for (Eigen::Index i = 0; i < r.beta.size(); ++i) {
    double p = r.se[i] > 0 ? normal_p_value(r.beta[i] / r.se[i]) : 0.0;
    r.p_values.push_back(p);
    r.stars.push_back(significance_stars(p));
  }

  double ssr = f.residuals.squaredNorm();
  r.r2 = sst > 0 ? 1.0 - ssr / sst : 0.0;
  r.adj_r2 = adjusted_r2(r.r2, r.n_obs, r.n_params);
  r.durbin_watson = vfp::durbin_watson(f.residuals, design.entity);
  return r;
}

}  // namespace vfp
