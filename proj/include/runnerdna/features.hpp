#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "runnerdna/csv.hpp"
#include "runnerdna/error.hpp"
#include "runnerdna/polyfit.hpp"
#include "runnerdna/stats.hpp"
#include "runnerdna/types.hpp"

namespace runnerdna {

// Fraction of adjacent pairs with strictly opposite sign after subtracting
// the series mean. Exact zeros after centering never count as a crossing.
inline double zero_crossing_rate(std::span<const double> values) {
  if (values.size() < 2) raise(Errc::TooShort, "zero_crossing_rate needs >= 2");
  const double m = stats::mean(values);
  std::size_t crossings = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    const double a = values[i - 1] - m;
    const double b = values[i] - m;
    if (a * b < 0.0) ++crossings;
  }
  return static_cast<double>(crossings) / static_cast<double>(values.size() - 1);
}

// Histogram entropy in nats over equal-width bins spanning [min, max]; the
// max value lands in the last bin. A constant series is defined as 0.
inline double shannon_entropy(std::span<const double> values, int bins = 10) {
  if (values.size() < 2) raise(Errc::TooShort, "shannon_entropy needs >= 2");
  if (bins < 2) raise(Errc::InvalidArgument, "shannon_entropy needs >= 2 bins");
  const auto [min_it, max_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *min_it, hi = *max_it;
  if (!(hi > lo)) return 0.0;
  std::vector<std::size_t> counts(static_cast<std::size_t>(bins), 0);
  for (double v : values) {
    auto idx = static_cast<std::size_t>((v - lo) / (hi - lo) *
                                        static_cast<double>(bins));
    if (idx >= counts.size()) idx = counts.size() - 1;
    ++counts[idx];
  }
  const double n = static_cast<double>(values.size());
  double h = 0.0;
  for (std::size_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    h -= p * std::log(p);
  }
  return h;
}

// The per-series feature menu, in this fixed order. 18 series x 30 features
// makes the 540-dimensional record vector.
inline constexpr std::array<const char*, 30> kSeriesFeatureNames = {
    "mean",
    "variance",
    "stddev",
    "min",
    "max",
    "range",
    "median",
    "q1",
    "q3",
    "iqr",
    "skewness",
    "kurtosis",
    "rms",
    "mad",
    "energy",
    "entropy",
    "zero_crossing_rate",
    "diff_mean_crossing_rate",
    "autocorr_lag1",
    "autocorr_lag2",
    "autocorr_lag3",
    "autocorr_lag4",
    "autocorr_lag5",
    "local_maxima_rate",
    "diff_abs_mean",
    "diff_abs_max",
    "trend_slope",
    "trend_rmse",
    "dominant_lag",
    "frac_beyond_1sd",
};

inline constexpr std::size_t kFeaturesPerSeries = kSeriesFeatureNames.size();
inline constexpr std::size_t kFeatureVectorSize =
    18 * kFeaturesPerSeries;  // 540

inline std::array<double, kFeaturesPerSeries> summary_features(
    std::span<const double> values) {
  if (values.size() < ActivityRecord::kMinSamples)
    raise(Errc::TooShort, "summary_features needs >= 30 samples");
  const double n = static_cast<double>(values.size());

  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double vmin = sorted.front();
  const double vmax = sorted.back();

  const double mean = stats::mean(values);
  const double var = stats::variance(values);
  const double sd = std::sqrt(var);

  double sum_sq = 0.0, sum_abs_dev = 0.0;
  std::size_t beyond_sd = 0;
  for (double v : values) {
    sum_sq += v * v;
    sum_abs_dev += std::fabs(v - mean);
    if (std::fabs(v - mean) > sd) ++beyond_sd;
  }
  const double energy = sum_sq / n;

  const std::vector<double> diffs = stats::first_differences(values);
  double diff_abs_sum = 0.0, diff_abs_max = 0.0;
  for (double d : diffs) {
    diff_abs_sum += std::fabs(d);
    diff_abs_max = std::max(diff_abs_max, std::fabs(d));
  }

  std::size_t maxima = 0;
  for (std::size_t i = 1; i + 1 < values.size(); ++i)
    if (values[i] > values[i - 1] && values[i] > values[i + 1]) ++maxima;

  std::array<double, 10> acf{};
  for (std::size_t lag = 1; lag <= 10; ++lag)
    acf[lag - 1] = stats::autocorrelation(values, lag);
  std::size_t dominant = 0;
  for (std::size_t lag = 1; lag < 10; ++lag)
    if (acf[lag] > acf[dominant]) dominant = lag;

  return {
      mean,
      var,
      sd,
      vmin,
      vmax,
      vmax - vmin,
      stats::quantile_sorted(sorted, 0.5),
      stats::quantile_sorted(sorted, 0.25),
      stats::quantile_sorted(sorted, 0.75),
      stats::quantile_sorted(sorted, 0.75) - stats::quantile_sorted(sorted, 0.25),
      stats::skewness(values),
      stats::excess_kurtosis(values),
      std::sqrt(energy),
      sum_abs_dev / n,
      energy,
      shannon_entropy(values, 10),
      zero_crossing_rate(values),
      zero_crossing_rate(diffs),
      acf[0],
      acf[1],
      acf[2],
      acf[3],
      acf[4],
      static_cast<double>(maxima) / n,
      diff_abs_sum / static_cast<double>(diffs.size()),
      diff_abs_max,
      stats::index_slope(values),
      fit_polynomial_rmse(values, 1),
      static_cast<double>(dominant + 1),
      static_cast<double>(beyond_sd) / n,
  };
}

// Canonical 540 feature keys: sensor-major, then axis, then menu order.
// Key strings look like "acc_x_mean".
inline const std::vector<std::string>& feature_vector_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    k.reserve(kFeatureVectorSize);
    for (Sensor s : kAllSensors)
      for (Axis a : kAllAxes)
        for (const char* name : kSeriesFeatureNames)
          k.push_back(series_code(s, a) + "_" + name);
    return k;
  }();
  return keys;
}

struct FeatureVector {
  std::string record_id;
  ActivityLabel label = ActivityLabel::Walking;
  std::string volunteer_id;
  std::vector<double> values;  // canonical key order, 540 entries

  double at(Sensor s, Axis a, const std::string& feature_name) const {
    std::size_t series_index = 0;
    for (Sensor ss : kAllSensors)
      for (Axis aa : kAllAxes) {
        if (ss == s && aa == a) {
          for (std::size_t f = 0; f < kFeaturesPerSeries; ++f)
            if (feature_name == kSeriesFeatureNames[f])
              return values[series_index * kFeaturesPerSeries + f];
          raise(Errc::KeyMismatch, "unknown feature '" + feature_name + "'");
        }
        ++series_index;
      }
    raise(Errc::KeyMismatch, "unknown series");
  }
};

inline FeatureVector extract_feature_vector(const ActivityRecord& record) {
  FeatureVector fv;
  fv.record_id = record.record_id;
  fv.label = record.label;
  fv.volunteer_id = record.volunteer.volunteer_id;
  fv.values.reserve(kFeatureVectorSize);
  for (Sensor s : kAllSensors) {
    for (Axis a : kAllAxes) {
      const auto block = summary_features(record.at(s, a).values);
      fv.values.insert(fv.values.end(), block.begin(), block.end());
    }
  }
  for (double v : fv.values)
    if (!std::isfinite(v))
      raise(Errc::NonFiniteValue, record.record_id + ": non-finite feature");
  return fv;
}

// One row per record: record_id, label, volunteer_id, then the 540 features
// (plus any extra named columns the caller appends, e.g. GPS kinematics).
inline std::string write_feature_csv(
    const std::vector<FeatureVector>& vectors,
    const std::vector<std::string>& extra_names = {},
    const std::vector<std::vector<double>>& extra_values = {}) {
  if (!extra_names.empty() && extra_values.size() != vectors.size())
    raise(Errc::LengthMismatch, "extra kinematic columns don't match rows");
  std::string out = "record_id,label,volunteer_id";
  for (const std::string& k : feature_vector_keys()) out += "," + k;
  for (const std::string& k : extra_names) out += "," + k;
  out += "\n";
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    const FeatureVector& fv = vectors[i];
    out += fv.record_id + "," + label_name(fv.label) + "," + fv.volunteer_id;
    for (double v : fv.values) out += "," + csv::format_double(v);
    if (!extra_names.empty()) {
      if (extra_values[i].size() != extra_names.size())
        raise(Errc::LengthMismatch, "extra kinematic row width mismatch");
      for (double v : extra_values[i]) out += "," + csv::format_double(v);
    }
    out += "\n";
  }
  return out;
}

}  // namespace runnerdna
