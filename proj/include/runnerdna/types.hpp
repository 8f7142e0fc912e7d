#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "runnerdna/error.hpp"

namespace runnerdna {

// Table-1 sensor set, 1 Hz, three axes each.
enum class Sensor : std::uint8_t {
  Accelerometer,
  LinearAcceleration,
  Gravity,
  Magnetic,
  Orientation,
  Gyroscope,
};

enum class Axis : std::uint8_t { X, Y, Z };

inline constexpr std::array<Sensor, 6> kAllSensors = {
    Sensor::Accelerometer, Sensor::LinearAcceleration, Sensor::Gravity,
    Sensor::Magnetic,      Sensor::Orientation,        Sensor::Gyroscope};

inline constexpr std::array<Axis, 3> kAllAxes = {Axis::X, Axis::Y, Axis::Z};

// Short codes double as CSV column prefixes: acc_x, lacc_y, ...
inline const char* sensor_code(Sensor s) {
  switch (s) {
    case Sensor::Accelerometer: return "acc";
    case Sensor::LinearAcceleration: return "lacc";
    case Sensor::Gravity: return "grav";
    case Sensor::Magnetic: return "mag";
    case Sensor::Orientation: return "ori";
    case Sensor::Gyroscope: return "gyr";
  }
  return "?";
}

inline const char* axis_code(Axis a) {
  switch (a) {
    case Axis::X: return "x";
    case Axis::Y: return "y";
    case Axis::Z: return "z";
  }
  return "?";
}

inline std::string series_code(Sensor s, Axis a) {
  return std::string(sensor_code(s)) + "_" + axis_code(a);
}

enum class ActivityLabel : std::uint8_t { Biking, EBikeRiding, Walking, Running };

inline constexpr std::array<ActivityLabel, 4> kAllLabels = {
    ActivityLabel::Biking, ActivityLabel::EBikeRiding, ActivityLabel::Walking,
    ActivityLabel::Running};

inline const char* label_name(ActivityLabel l) {
  switch (l) {
    case ActivityLabel::Biking: return "biking";
    case ActivityLabel::EBikeRiding: return "ebike";
    case ActivityLabel::Walking: return "walking";
    case ActivityLabel::Running: return "running";
  }
  return "?";
}

inline ActivityLabel label_from_name(const std::string& name) {
  for (ActivityLabel l : kAllLabels) {
    if (name == label_name(l)) return l;
  }
  raise(Errc::UnknownLabel, "unknown activity label '" + name + "'");
}

enum class Sex : std::uint8_t { Male, Female };

inline const char* sex_name(Sex s) { return s == Sex::Male ? "male" : "female"; }

inline Sex sex_from_name(const std::string& name) {
  if (name == "male") return Sex::Male;
  if (name == "female") return Sex::Female;
  raise(Errc::ParseFailure, "unknown sex '" + name + "'");
}

struct VolunteerProfile {
  std::string volunteer_id;
  Sex sex = Sex::Male;
  double height_cm = 0.0;
  double weight_kg = 0.0;

  void validate() const {
    if (volunteer_id.empty())
      raise(Errc::InvalidArgument, "volunteer_id empty");
    if (!(height_cm >= 100.0 && height_cm <= 250.0))
      raise(Errc::InvalidArgument, "height out of [100, 250] cm");
    if (!(weight_kg >= 30.0 && weight_kg <= 200.0))
      raise(Errc::InvalidArgument, "weight out of [30, 200] kg");
  }
};

// One axis of one sensor: parallel (timestamp, value) arrays, timestamps in
// epoch seconds, nondecreasing (strictly increasing once aligned to the 1 Hz
// grid).
struct SensorAxisSeries {
  Sensor sensor = Sensor::Accelerometer;
  Axis axis = Axis::X;
  std::vector<std::int64_t> timestamps;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }

  void validate(bool require_strict = false) const {
    if (timestamps.size() != values.size())
      raise(Errc::LengthMismatch, series_code(sensor, axis) +
                                      ": timestamps/values length mismatch");
    if (values.size() < 2)
      raise(Errc::TooShort, series_code(sensor, axis) + ": fewer than 2 samples");
    for (double v : values) {
      if (!std::isfinite(v))
        raise(Errc::NonFiniteValue, series_code(sensor, axis) + ": non-finite value");
    }
    for (std::size_t i = 1; i < timestamps.size(); ++i) {
      if (timestamps[i] < timestamps[i - 1])
        raise(Errc::InvalidArgument,
              series_code(sensor, axis) + ": timestamps decrease");
      if (require_strict && timestamps[i] == timestamps[i - 1])
        raise(Errc::InvalidArgument,
              series_code(sensor, axis) + ": duplicate timestamp after alignment");
    }
  }
};

struct GpsPoint {
  double lat = 0.0;  // degrees
  double lon = 0.0;  // degrees
  std::int64_t timestamp = 0;

  void validate() const {
    if (!(std::isfinite(lat) && lat >= -90.0 && lat <= 90.0))
      raise(Errc::InvalidArgument, "latitude out of [-90, 90]");
    if (!(std::isfinite(lon) && lon >= -180.0 && lon <= 180.0))
      raise(Errc::InvalidArgument, "longitude out of [-180, 180]");
  }
};

using SeriesKey = std::pair<Sensor, Axis>;

// One labeled movement session: all 18 sensor-axis series plus an optional
// GPS track and the volunteer the session belongs to.
struct ActivityRecord {
  std::string record_id;
  ActivityLabel label = ActivityLabel::Walking;
  VolunteerProfile volunteer;
  std::map<SeriesKey, SensorAxisSeries> series;
  std::optional<std::vector<GpsPoint>> gps;

  static constexpr std::size_t kSeriesCount = 18;
  static constexpr std::size_t kMinSamples = 30;

  const SensorAxisSeries& at(Sensor s, Axis a) const {
    auto it = series.find({s, a});
    if (it == series.end())
      raise(Errc::MissingColumn, "series " + series_code(s, a) + " absent");
    return it->second;
  }

  void validate(bool aligned = false) const {
    if (series.size() != kSeriesCount)
      raise(Errc::MissingColumn,
            "record " + record_id + ": expected 18 series, have " +
                std::to_string(series.size()));
    volunteer.validate();
    std::int64_t min_start = INT64_MAX, max_start = INT64_MIN;
    std::int64_t min_end = INT64_MAX, max_end = INT64_MIN;
    for (Sensor s : kAllSensors) {
      for (Axis a : kAllAxes) {
        const SensorAxisSeries& sa = at(s, a);
        sa.validate(aligned);
        if (sa.size() < kMinSamples)
          raise(Errc::TooShort, "record " + record_id + ": series " +
                                    series_code(s, a) + " has " +
                                    std::to_string(sa.size()) + " samples (< 30)");
        min_start = std::min(min_start, sa.timestamps.front());
        max_start = std::max(max_start, sa.timestamps.front());
        min_end = std::min(min_end, sa.timestamps.back());
        max_end = std::max(max_end, sa.timestamps.back());
      }
    }
    // All 18 series must cover the same span within +-2 s.
    if (max_start - min_start > 2 || max_end - min_end > 2)
      raise(Errc::InvalidArgument,
            "record " + record_id + ": series time spans differ by more than 2 s");
    if (gps) {
      for (const GpsPoint& p : *gps) p.validate();
    }
  }
};

// --- civil time <-> epoch seconds -------------------------------------------
// Howard Hinnant's days-from-civil algorithm; proleptic Gregorian, UTC.

inline std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

inline void civil_from_days(std::int64_t z, int& y, unsigned& m, unsigned& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp < 10 ? mp + 3 : mp - 9;
  y = static_cast<int>(yy + (m <= 2));
}

inline std::int64_t civil_to_epoch(int y, unsigned mo, unsigned d, unsigned h,
                                   unsigned mi, unsigned s) {
  return days_from_civil(y, mo, d) * 86400 + h * 3600 + mi * 60 + s;
}

}  // namespace runnerdna
