#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "runnerdna/error.hpp"

namespace runnerdna::stats {

inline double mean(std::span<const double> v) {
  if (v.empty()) raise(Errc::EmptyData, "mean of empty sequence");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Population variance (divide by n).
inline double variance(std::span<const double> v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size());
}

inline double stddev(std::span<const double> v) { return std::sqrt(variance(v)); }

// k-th central moment, population normalization.
inline double central_moment(std::span<const double> v, int k) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += std::pow(x - m, k);
  return s / static_cast<double>(v.size());
}

// Zero-variance series is defined as skewness 0 (idle segments stay finite).
inline double skewness(std::span<const double> v) {
  const double m2 = central_moment(v, 2);
  if (m2 <= 0.0) return 0.0;
  return central_moment(v, 3) / std::pow(m2, 1.5);
}

inline double excess_kurtosis(std::span<const double> v) {
  const double m2 = central_moment(v, 2);
  if (m2 <= 0.0) return 0.0;
  return central_moment(v, 4) / (m2 * m2) - 3.0;
}

// Linear-interpolated quantile (the R-7 / NumPy default).
inline double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) raise(Errc::EmptyData, "quantile of empty sequence");
  if (sorted.size() == 1) return sorted[0];
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

inline double quantile(std::span<const double> v, double q) {
  std::vector<double> s(v.begin(), v.end());
  std::sort(s.begin(), s.end());
  return quantile_sorted(s, q);
}

inline double median(std::span<const double> v) { return quantile(v, 0.5); }

// Sample autocorrelation at the given lag; zero-variance series -> 0.
inline double autocorrelation(std::span<const double> v, std::size_t lag) {
  if (lag >= v.size()) return 0.0;
  const double m = mean(v);
  double denom = 0.0;
  for (double x : v) denom += (x - m) * (x - m);
  if (denom <= 0.0) return 0.0;
  double num = 0.0;
  for (std::size_t i = 0; i + lag < v.size(); ++i)
    num += (v[i] - m) * (v[i + lag] - m);
  return num / denom;
}

inline std::vector<double> first_differences(std::span<const double> v) {
  std::vector<double> d;
  if (v.size() < 2) return d;
  d.reserve(v.size() - 1);
  for (std::size_t i = 1; i < v.size(); ++i) d.push_back(v[i] - v[i - 1]);
  return d;
}

// Least-squares slope of value against sample index 0..n-1.
inline double index_slope(std::span<const double> v) {
  const std::size_t n = v.size();
  if (n < 2) raise(Errc::TooShort, "slope needs >= 2 samples");
  const double mx = static_cast<double>(n - 1) / 2.0;
  const double my = mean(v);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = static_cast<double>(i) - mx;
    sxy += dx * (v[i] - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

}  // namespace runnerdna::stats
