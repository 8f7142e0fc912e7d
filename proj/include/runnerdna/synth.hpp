#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "runnerdna/error.hpp"
#include "runnerdna/gps.hpp"
#include "runnerdna/ingest.hpp"
#include "runnerdna/rng.hpp"
#include "runnerdna/types.hpp"

namespace runnerdna {

struct ActivityProfile {
  double gait_frequency_hz = 1.0;
  double vertical_amplitude = 1.0;   // m/s^2 scale of acceleration oscillation
  double sway_amplitude_deg = 1.0;   // degree scale of orientation oscillation
  std::array<double, kAllSensors.size()> noise_sd{};  // indexed by Sensor
  double base_speed_ms = 1.0;
  double speed_jitter_sd = 0.0;

  double noise_for(Sensor s) const { return noise_sd[static_cast<std::size_t>(s)]; }

  void validate() const {
    auto nonneg = [](double v, const char* what) {
      if (!(v >= 0.0)) raise(Errc::InvalidArgument, std::string(what) + " must be >= 0");
    };
    nonneg(gait_frequency_hz, "gait_frequency_hz");
    nonneg(vertical_amplitude, "vertical_amplitude");
    nonneg(sway_amplitude_deg, "sway_amplitude_deg");
    for (double sd : noise_sd) nonneg(sd, "noise_sd");
    nonneg(base_speed_ms, "base_speed_ms");
    nonneg(speed_jitter_sd, "speed_jitter_sd");
  }
};

// Per-volunteer multiplicative perturbations, stable across all of that
// volunteer's records.
struct StyleOffset {
  double amplitude = 1.0;
  double sway = 1.0;
  double frequency = 1.0;
  double noise = 1.0;
  double speed = 1.0;

  void validate() const {
    for (double m : {amplitude, sway, frequency, noise, speed})
      if (m < 0.5 || m > 2.0)
        raise(Errc::InvalidArgument, "style multiplier outside [0.5, 2.0]");
  }
};

inline StyleOffset draw_style(Rng& rng) {
  StyleOffset s;
  s.amplitude = rng.uniform(0.80, 1.25);
  s.sway = rng.uniform(0.80, 1.25);
  s.frequency = rng.uniform(0.92, 1.10);
  s.noise = rng.uniform(0.85, 1.20);
  s.speed = rng.uniform(0.92, 1.10);
  return s;
}

inline ActivityProfile default_profile(ActivityLabel label) {
  auto noise = [](double acc, double lacc, double grav, double mag, double ori,
                  double gyr) {
    return std::array<double, 6>{acc, lacc, grav, mag, ori, gyr};
  };
  ActivityProfile p;
  switch (label) {
    case ActivityLabel::Biking:
      p.gait_frequency_hz = 1.2;
      p.vertical_amplitude = 0.8;
      p.sway_amplitude_deg = 3.5;
      p.noise_sd = noise(0.18, 0.16, 0.04, 0.7, 0.8, 0.12);
      p.base_speed_ms = 5.0;
      p.speed_jitter_sd = 0.12;
      break;
    case ActivityLabel::EBikeRiding:
      p.gait_frequency_hz = 0.3;
      p.vertical_amplitude = 0.35;
      p.sway_amplitude_deg = 2.0;
      p.noise_sd = noise(0.10, 0.09, 0.03, 0.6, 0.5, 0.07);
      p.base_speed_ms = 7.0;
      p.speed_jitter_sd = 0.15;
      break;
    case ActivityLabel::Walking:
      p.gait_frequency_hz = 1.8;
      p.vertical_amplitude = 1.2;
      p.sway_amplitude_deg = 6.0;
      p.noise_sd = noise(0.25, 0.22, 0.05, 0.8, 1.2, 0.20);
      p.base_speed_ms = 1.4;
      p.speed_jitter_sd = 0.06;
      break;
    case ActivityLabel::Running:
      p.gait_frequency_hz = 2.8;
      p.vertical_amplitude = 3.2;
      p.sway_amplitude_deg = 10.0;
      p.noise_sd = noise(0.45, 0.40, 0.08, 1.0, 2.0, 0.45);
      p.base_speed_ms = 3.3;
      p.speed_jitter_sd = 0.10;
      break;
  }
  return p;
}

namespace detail {

// How each of the 18 series is shaped: a constant offset plus one sinusoid
// whose amplitude tracks the vertical (A), sway (S), or rate (A*f) scale.
enum class AmpSource { Vertical, Sway, VerticalTimesFreq };

struct SeriesShape {
  double offset;
  AmpSource source;
  double amp_coef;
  double freq_scale;
};

inline constexpr std::array<SeriesShape, 18> kSeriesShapes{{
    {0.00, AmpSource::Vertical, 0.45, 1.0},             // acc x
    {9.81, AmpSource::Vertical, 1.00, 1.0},             // acc y
    {0.30, AmpSource::Vertical, 0.60, 1.0},             // acc z
    {0.00, AmpSource::Vertical, 0.50, 1.0},             // lacc x
    {0.00, AmpSource::Vertical, 0.95, 1.0},             // lacc y
    {0.00, AmpSource::Vertical, 0.55, 1.0},             // lacc z
    {0.00, AmpSource::Sway, 0.08, 0.25},                // grav x
    {9.75, AmpSource::Sway, 0.05, 0.25},                // grav y
    {0.80, AmpSource::Sway, 0.08, 0.25},                // grav z
    {21.0, AmpSource::Sway, 0.15, 0.125},               // mag x
    {-14.0, AmpSource::Sway, 0.15, 0.125},              // mag y
    {38.0, AmpSource::Sway, 0.20, 0.125},               // mag z
    {182.0, AmpSource::Sway, 1.00, 0.5},                // ori x
    {63.0, AmpSource::Sway, 0.40, 0.5},                 // ori y
    {3.50, AmpSource::Sway, 1.00, 1.0},                 // ori z
    {0.00, AmpSource::VerticalTimesFreq, 0.30, 1.0},    // gyr x
    {0.00, AmpSource::VerticalTimesFreq, 0.50, 1.0},    // gyr y
    {0.00, AmpSource::VerticalTimesFreq, 0.25, 1.0},    // gyr z
}};

inline std::int64_t synth_start_epoch(std::uint64_t seed) {
  const std::int64_t base = civil_to_epoch(2019, 12, 20, 0, 0, 0);
  return base + static_cast<std::int64_t>(seed % 31536000ull);
}

}  // namespace detail

inline ActivityRecord generate_record(const std::string& record_id,
                                      const VolunteerProfile& volunteer,
                                      ActivityLabel label,
                                      const ActivityProfile& profile,
                                      const StyleOffset& style, int duration_s,
                                      std::uint64_t seed) {
  profile.validate();
  style.validate();
  volunteer.validate();
  if (duration_s < 60) raise(Errc::DurationTooShort, "duration must be >= 60 s");

  const std::int64_t t0 = detail::synth_start_epoch(seed);
  const int n = duration_s;

  Rng record_rng(derive_seed(seed, 99));
  const double amp_jitter = record_rng.uniform(0.95, 1.05);
  const double sway_jitter = record_rng.uniform(0.95, 1.05);
  const double speed_jitter = record_rng.uniform(0.97, 1.03);

  const double amp_vertical = profile.vertical_amplitude * style.amplitude * amp_jitter;
  const double amp_sway = profile.sway_amplitude_deg * style.sway * sway_jitter;
  const double freq = profile.gait_frequency_hz * style.frequency;

  ActivityRecord record;
  record.record_id = record_id;
  record.label = label;
  record.volunteer = volunteer;

  std::size_t shape_index = 0;
  for (Sensor sensor : kAllSensors) {
    for (Axis axis : kAllAxes) {
      const detail::SeriesShape& shape = detail::kSeriesShapes[shape_index];
      Rng rng(derive_seed(seed, shape_index));
      double amplitude = 0.0;
      switch (shape.source) {
        case detail::AmpSource::Vertical:
          amplitude = shape.amp_coef * amp_vertical;
          break;
        case detail::AmpSource::Sway:
          amplitude = shape.amp_coef * amp_sway;
          break;
        case detail::AmpSource::VerticalTimesFreq:
          amplitude = shape.amp_coef * amp_vertical * freq;
          break;
      }
      const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
      const double noise = profile.noise_for(sensor) * style.noise;
      SensorAxisSeries series;
      series.sensor = sensor;
      series.axis = axis;
      series.timestamps.resize(static_cast<std::size_t>(n));
      series.values.resize(static_cast<std::size_t>(n));
      for (int t = 0; t < n; ++t) {
        series.timestamps[static_cast<std::size_t>(t)] = t0 + t;
        double v = shape.offset +
                   amplitude * std::sin(2.0 * std::numbers::pi * freq *
                                            shape.freq_scale * t +
                                        phase);
        if (noise > 0.0) v += rng.normal(0.0, noise);
        series.values[static_cast<std::size_t>(t)] = v;
      }
      record.series[SeriesKey{sensor, axis}] = std::move(series);
      shape_index++;
    }
  }

  Rng gps_rng(derive_seed(seed, 100));
  const double speed = profile.base_speed_ms * style.speed * speed_jitter;
  double lat = 31.05 + gps_rng.uniform(-0.05, 0.05);
  double lon = 121.30 + gps_rng.uniform(-0.05, 0.05);
  double heading = gps_rng.uniform(0.0, 2.0 * std::numbers::pi);
  std::vector<GpsPoint> track;
  track.reserve(static_cast<std::size_t>(n));
  constexpr double kDegPerRad = 180.0 / std::numbers::pi;
  for (int t = 0; t < n; ++t) {
    track.push_back(GpsPoint{lat, lon, t0 + t});
    double v = speed;
    if (profile.speed_jitter_sd > 0.0) v += gps_rng.normal(0.0, profile.speed_jitter_sd);
    if (v < 0.0) v = 0.0;
    heading += gps_rng.normal(0.0, 0.02);
    const double arc = v / kEarthRadiusMeters;
    lat += arc * std::cos(heading) * kDegPerRad;
    lon += arc * std::sin(heading) * kDegPerRad /
           std::cos(lat * std::numbers::pi / 180.0);
  }
  record.gps = std::move(track);
  record.validate(true);
  return record;
}

struct CohortSpec {
  std::array<int, kAllLabels.size()> counts{};  // indexed by ActivityLabel
  int n_volunteers = 2;
  int n_runners = 1;
  int duration_s = 120;

  static CohortSpec paper_shape() {
    CohortSpec spec;
    spec.counts = {32, 55, 45, 139};
    spec.n_volunteers = 33;
    spec.n_runners = 20;
    spec.duration_s = 120;
    return spec;
  }

  void validate() const {
    for (int c : counts)
      if (c < 1) raise(Errc::InvalidSpec, "every activity count must be positive");
    if (n_volunteers < 2) raise(Errc::InvalidSpec, "need at least 2 volunteers");
    if (n_runners < 1 || n_runners > n_volunteers)
      raise(Errc::InvalidSpec, "runner count must be in [1, n_volunteers]");
    if (duration_s < 60) raise(Errc::InvalidSpec, "duration must be >= 60 s");
  }
};

namespace detail {

inline std::string padded_id(char prefix, int index, int width) {
  std::string digits = std::to_string(index);
  std::string out(1, prefix);
  for (int i = static_cast<int>(digits.size()); i < width; ++i) out += '0';
  out += digits;
  return out;
}

}  // namespace detail

// Deterministic cohort: volunteers get persistent styles, running records
// cycle through the runner subset, everything else cycles through everyone.
inline std::vector<ActivityRecord> generate_cohort(const CohortSpec& spec,
                                                   std::uint64_t seed) {
  spec.validate();

  Rng volunteer_rng(derive_seed(seed, 0xC0C0));
  std::vector<VolunteerProfile> volunteers;
  std::vector<StyleOffset> styles;
  const int vol_width = spec.n_volunteers >= 100 ? 3 : 2;
  for (int i = 0; i < spec.n_volunteers; ++i) {
    VolunteerProfile v;
    v.volunteer_id = detail::padded_id('v', i + 1, vol_width);
    v.sex = i % 2 == 0 ? Sex::Female : Sex::Male;
    v.height_cm = volunteer_rng.uniform(155.0, 192.0);
    v.weight_kg = volunteer_rng.uniform(52.0, 95.0);
    volunteers.push_back(v);
    styles.push_back(draw_style(volunteer_rng));
  }

  int total = 0;
  for (int c : spec.counts) total += c;
  const int rec_width = total >= 1000 ? 5 : 4;

  std::vector<ActivityRecord> records;
  records.reserve(static_cast<std::size_t>(total));
  int record_counter = 0;
  for (std::size_t a = 0; a < kAllLabels.size(); ++a) {
    const ActivityLabel label = kAllLabels[a];
    const ActivityProfile profile = default_profile(label);
    const int pool = label == ActivityLabel::Running ? spec.n_runners
                                                     : spec.n_volunteers;
    for (int k = 0; k < spec.counts[a]; ++k) {
      const int vol_index = k % pool;
      const std::string record_id =
          detail::padded_id('r', record_counter + 1, rec_width);
      records.push_back(generate_record(
          record_id, volunteers[static_cast<std::size_t>(vol_index)], label,
          profile, styles[static_cast<std::size_t>(vol_index)], spec.duration_s,
          derive_seed(seed, static_cast<std::uint64_t>(record_counter) + 1)));
      record_counter++;
    }
  }
  return records;
}

}  // namespace runnerdna
