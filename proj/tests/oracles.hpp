// Test-only reference implementations, written independently of the library
// code paths they check: long-double brute-force accumulation for window
// statistics, naive Gaussian elimination for least squares, and a direct
// sandwich build for robust covariances.
#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

inline double dot_over_sum(std::span<const double> p, std::span<const double> g) {
  long double num = 0.0L, den = 0.0L;
  for (std::size_t i = 0; i < p.size(); ++i) {
    num += static_cast<long double>(p[i]) * static_cast<long double>(g[i]);
    den += static_cast<long double>(g[i]);
  }
  return double(num / den);
}

inline double mean(std::span<const double> x) {
  long double s = 0.0L;
  for (double v : x) s += v;
  return double(s / static_cast<long double>(x.size()));
}

inline double sum_ratio(std::span<const double> a, std::span<const double> b) {
  long double sa = 0.0L, sb = 0.0L;
  for (double v : a) sa += v;
  for (double v : b) sb += v;
  return double(sa / sb);
}

inline double cov_of_variation(std::span<const double> x) {
  long double m = 0.0L;
  for (double v : x) m += v;
  m /= static_cast<long double>(x.size());
  long double ss = 0.0L;
  for (double v : x) ss += (v - m) * (v - m);
  long double var = ss / static_cast<long double>(x.size());
  return double(sqrtl(var) / m);
}

inline double pearson(std::span<const double> x, std::span<const double> y) {
  long double mx = 0.0L, my = 0.0L;
  for (double v : x) mx += v;
  for (double v : y) my += v;
  mx /= static_cast<long double>(x.size());
  my /= static_cast<long double>(y.size());
  long double sxx = 0.0L, syy = 0.0L, sxy = 0.0L;
  for (std::size_t i = 0; i < x.size(); ++i) {
    long double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  return double(sxy / sqrtl(sxx * syy));
}

/// Sort-and-interpolate quantile, written against the order-statistic
/// definition h = q(n-1).
inline double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  long double h = static_cast<long double>(q) * (v.size() - 1);
  std::size_t lo = std::size_t(h);
  long double frac = h - static_cast<long double>(lo);
  if (lo + 1 >= v.size()) return v.back();
  return double(v[lo] + frac * (static_cast<long double>(v[lo + 1]) - v[lo]));
}

/// Least squares via normal equations and Gaussian elimination with partial
/// pivoting; no shared code with the QR route under test.
inline Eigen::VectorXd normal_equations(const Eigen::MatrixXd& X,
                                        const Eigen::VectorXd& y) {
  const int p = int(X.cols());
  std::vector<std::vector<long double>> a(p, std::vector<long double>(p + 1, 0.0L));
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) {
      long double s = 0.0L;
      for (int r = 0; r < X.rows(); ++r)
        s += static_cast<long double>(X(r, i)) * X(r, j);
      a[i][j] = s;
    }
    long double s = 0.0L;
    for (int r = 0; r < X.rows(); ++r)
      s += static_cast<long double>(X(r, i)) * y(r);
    a[i][p] = s;
  }
  for (int col = 0; col < p; ++col) {
    int piv = col;
    for (int r = col + 1; r < p; ++r)
      if (fabsl(a[r][col]) > fabsl(a[piv][col])) piv = r;
    std::swap(a[piv], a[col]);
    for (int r = 0; r < p; ++r) {
      if (r == col) continue;
      long double f = a[r][col] / a[col][col];
      for (int c = col; c <= p; ++c) a[r][c] -= f * a[col][c];
    }
  }
  Eigen::VectorXd beta(p);
  for (int i = 0; i < p; ++i) beta(i) = double(a[i][p] / a[i][i]);
  return beta;
}

/// Dense (X'X)^-1 S (X'X)^-1 with S = sum_t e_t^2 x_t x_t' — the White
/// covariance, built elementwise.
inline Eigen::MatrixXd white_covariance(const Eigen::MatrixXd& X,
                                        const Eigen::VectorXd& e) {
  const int p = int(X.cols());
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(p, p);
  for (int t = 0; t < X.rows(); ++t)
    for (int i = 0; i < p; ++i)
      for (int j = 0; j < p; ++j) S(i, j) += e(t) * e(t) * X(t, i) * X(t, j);
  Eigen::MatrixXd xtx = Eigen::MatrixXd::Zero(p, p);
  for (int t = 0; t < X.rows(); ++t)
    for (int i = 0; i < p; ++i)
      for (int j = 0; j < p; ++j) xtx(i, j) += X(t, i) * X(t, j);
  Eigen::MatrixXd inv = xtx.fullPivLu().inverse();
  return inv * S * inv;
}

/// Classical homoskedastic OLS covariance s^2 (X'X)^-1.
inline Eigen::MatrixXd classical_covariance(const Eigen::MatrixXd& X,
                                            const Eigen::VectorXd& e) {
  double s2 = e.squaredNorm() / double(X.rows() - X.cols());
  Eigen::MatrixXd xtx = X.transpose() * X;
  return s2 * xtx.fullPivLu().inverse();
}

}  // namespace oracle
