#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "runnerdna/error.hpp"
#include "runnerdna/stats.hpp"
#include "runnerdna/types.hpp"

namespace runnerdna {

inline constexpr double kEarthRadiusMeters = 6371000.0;

// Consecutive fixes implying a speed above this are positioning glitches and
// get dropped before kinematics are computed.
inline constexpr double kGpsSpeedOutlierMs = 70.0;

// Great-circle speed between two fixes:
//   v = 2 R asin sqrt(sin^2(dlat/2) + cos(lat1) cos(lat2) sin^2(dlon/2)) / dt
inline double haversine_velocity(const GpsPoint& p1, const GpsPoint& p2) {
  p1.validate();
  p2.validate();
  if (p2.timestamp <= p1.timestamp)
    raise(Errc::NonPositiveInterval, "GPS fixes not forward in time");
  constexpr double kDegToRad = 3.141592653589793238462643383279502884 / 180.0;
  const double lat1 = p1.lat * kDegToRad;
  const double lat2 = p2.lat * kDegToRad;
  const double dlat = (p2.lat - p1.lat) * kDegToRad;
  const double dlon = (p2.lon - p1.lon) * kDegToRad;
  const double s1 = std::sin(dlat / 2.0);
  const double s2 = std::sin(dlon / 2.0);
  const double h = s1 * s1 + std::cos(lat1) * std::cos(lat2) * s2 * s2;
  const double arc = 2.0 * kEarthRadiusMeters * std::asin(std::min(1.0, std::sqrt(h)));
  return arc / static_cast<double>(p2.timestamp - p1.timestamp);
}

inline double point_acceleration(double v1, double v2, std::int64_t t1,
                                 std::int64_t t2) {
  if (t2 <= t1) raise(Errc::NonPositiveInterval, "acceleration interval <= 0");
  return (v2 - v1) / static_cast<double>(t2 - t1);
}

struct KinematicSample {
  std::int64_t timestamp = 0;
  double value = 0.0;
};

// Pairwise speeds and accelerations along a (filtered) track. Each speed is
// stamped with the later fix of its pair, each acceleration with the later
// speed sample.
struct KinematicSeries {
  std::vector<KinematicSample> velocities;
  std::vector<KinematicSample> accelerations;
  double earth_radius = kEarthRadiusMeters;
};

struct KinematicFeatures {
  double mean_velocity = 0.0;
  double max_velocity = 0.0;
  double velocity_sd = 0.0;
  double mean_abs_acceleration = 0.0;
  double max_abs_acceleration = 0.0;
};

inline constexpr std::array<const char*, 5> kKinematicFeatureNames = {
    "mean_velocity", "max_velocity", "velocity_sd", "mean_abs_accel",
    "max_abs_accel"};

inline std::array<double, 5> kinematic_feature_array(const KinematicFeatures& f) {
  return {f.mean_velocity, f.max_velocity, f.velocity_sd,
          f.mean_abs_acceleration, f.max_abs_acceleration};
}

inline std::pair<KinematicSeries, KinematicFeatures> track_kinematics(
    std::span<const GpsPoint> track) {
  if (track.size() < 3) raise(Errc::TooShort, "GPS track needs >= 3 fixes");
  for (std::size_t i = 1; i < track.size(); ++i) {
    if (track[i].timestamp <= track[i - 1].timestamp)
      raise(Errc::NonPositiveInterval, "GPS timestamps not strictly increasing");
  }

  // Outlier guard: drop fixes whose implied speed from the last kept fix
  // exceeds the threshold.
  std::vector<GpsPoint> kept;
  kept.reserve(track.size());
  kept.push_back(track[0]);
  for (std::size_t i = 1; i < track.size(); ++i) {
    if (haversine_velocity(kept.back(), track[i]) <= kGpsSpeedOutlierMs)
      kept.push_back(track[i]);
  }
  if (kept.size() < 3)
    raise(Errc::TooShort, "GPS track too short after outlier filtering");

  KinematicSeries series;
  series.velocities.reserve(kept.size() - 1);
  for (std::size_t i = 1; i < kept.size(); ++i) {
    series.velocities.push_back(
        {kept[i].timestamp, haversine_velocity(kept[i - 1], kept[i])});
  }
  series.accelerations.reserve(series.velocities.size() - 1);
  for (std::size_t i = 1; i < series.velocities.size(); ++i) {
    const auto& a = series.velocities[i - 1];
    const auto& b = series.velocities[i];
    series.accelerations.push_back(
        {b.timestamp, point_acceleration(a.value, b.value, a.timestamp, b.timestamp)});
  }

  std::vector<double> v;
  v.reserve(series.velocities.size());
  for (const auto& s : series.velocities) v.push_back(s.value);
  std::vector<double> abs_a;
  abs_a.reserve(series.accelerations.size());
  for (const auto& s : series.accelerations) abs_a.push_back(std::fabs(s.value));

  KinematicFeatures features;
  features.mean_velocity = stats::mean(v);
  features.max_velocity = *std::max_element(v.begin(), v.end());
  features.velocity_sd = stats::stddev(v);
  features.mean_abs_acceleration = stats::mean(abs_a);
  features.max_abs_acceleration = *std::max_element(abs_a.begin(), abs_a.end());
  return {std::move(series), features};
}

}  // namespace runnerdna
