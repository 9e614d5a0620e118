#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "vfp/panel.hpp"

namespace vfp {

struct OlsFit {
  Eigen::VectorXd beta;
  Eigen::VectorXd residuals;
  double condition = 0.0;  // R-diagonal ratio estimate from pivoted QR
  std::vector<std::string> warnings;
};

/// Least squares by Householder QR. Hard error on rank deficiency (listing
/// offending columns when names are supplied); warning when the condition
/// estimate exceeds 1e10.
OlsFit ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
           const std::vector<std::string>* names = nullptr);

/// Panel Newey-West covariance: sandwich (X'X)^-1 S (X'X)^-1 with Bartlett
/// weights w_l = 1 - l/(L+1) and autocovariance terms accumulated within
/// entities only. Rows must be grouped and time-ordered per entity. lags = 0
/// reduces to the White heteroskedasticity-robust estimator. Hard error when
/// lags >= the shortest entity length.
Eigen::MatrixXd newey_west(const Eigen::MatrixXd& X,
                           const Eigen::VectorXd& residuals,
                           std::span<const int> entity, int lags);

/// Within-entity squared first differences over total squared residuals;
/// differences never span entity boundaries.
double durbin_watson(const Eigen::VectorXd& residuals,
                     std::span<const int> entity);

/// floor(4*(T_mean/100)^(2/9)), clamped to the shortest entity length - 1.
int default_hac_lags(std::span<const int> entity);

/// 1 - (1-R2)(n-1)/(n-p-1), p excluding the intercept.
double adjusted_r2(double r2, std::int64_t n, int p_excluding_intercept);

/// Two-sided p-value from the standard normal approximation.
double normal_p_value(double t);
/// "***" p<1%, "**" p<5%, "*" p<10%, "" otherwise.
std::string significance_stars(double p);

struct ModelResult {
  std::vector<std::string> names;
  std::vector<ColumnKind> kinds;
  Eigen::VectorXd beta;
  Eigen::MatrixXd hac;  // symmetric PSD
  Eigen::VectorXd se;   // sqrt(diag(hac))
  std::vector<double> p_values;
  std::vector<std::string> stars;
  double r2 = 0, adj_r2 = 0, durbin_watson = 0, condition = 0;
  std::int64_t n_obs = 0;
  int n_params = 0;  // excluding intercept
  int hac_lags = 0;
  Estimator estimator = Estimator::rewb;
  Tech technology = Tech::wind;
  Aggregation aggregation = Aggregation::monthly;
  WeightScheme weights = WeightScheme::ic_weighted;
  Eigen::VectorXd residuals;
  std::vector<int> entity;
  std::map<std::string, double> centering;  // from the design
  std::vector<std::string> warnings;

  int col(std::string_view name) const;
  double coef(std::string_view name) const;       // hard error if absent
  double covariance(std::string_view a, std::string_view b) const;

  nlohmann::json to_json() const;
  /// Sectioned text table: within, between, cross-level, fit statistics.
  std::string to_table() const;
  void write_json(const std::filesystem::path& path) const;
};

/// rewb: pooled OLS on the within+between-augmented design. fe: drops
/// between/time-invariant columns and the intercept, entity-demeans y, and
/// keeps within and interaction columns. Both use newey_west errors.
ModelResult fit(const ModelSpec& spec, const DesignMatrix& design);

}  // namespace vfp
