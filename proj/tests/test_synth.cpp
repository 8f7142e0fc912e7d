#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "runnerdna/gps.hpp"
#include "runnerdna/indicators.hpp"
#include "runnerdna/stats.hpp"
#include "runnerdna/synth.hpp"

using namespace runnerdna;
using Catch::Approx;

namespace {

const VolunteerProfile kVol{"v01", Sex::Female, 168.0, 60.0};

ActivityRecord walking_record(std::uint64_t seed, int duration = 90) {
  return generate_record("r0001", kVol, ActivityLabel::Walking,
                         default_profile(ActivityLabel::Walking), StyleOffset{},
                         duration, seed);
}

}  // namespace

TEST_CASE("identical arguments reproduce a record bit for bit") {
  const ActivityRecord a = walking_record(31337);
  const ActivityRecord b = walking_record(31337);
  for (Sensor s : kAllSensors)
    for (Axis ax : kAllAxes) {
      REQUIRE(a.at(s, ax).values == b.at(s, ax).values);
      REQUIRE(a.at(s, ax).timestamps == b.at(s, ax).timestamps);
    }
  REQUIRE(a.gps.has_value());
  REQUIRE(b.gps.has_value());
  for (std::size_t i = 0; i < a.gps->size(); ++i) {
    REQUIRE((*a.gps)[i].lat == (*b.gps)[i].lat);
    REQUIRE((*a.gps)[i].lon == (*b.gps)[i].lon);
  }

  const ActivityRecord c = walking_record(31338);
  REQUIRE(a.at(Sensor::Accelerometer, Axis::Y).values !=
          c.at(Sensor::Accelerometer, Axis::Y).values);
}

TEST_CASE("generated series run at 1 Hz for the requested duration") {
  const ActivityRecord rec = walking_record(5, 75);
  for (Sensor s : kAllSensors)
    for (Axis ax : kAllAxes) {
      const auto& series = rec.at(s, ax);
      REQUIRE(series.values.size() == 75);
      for (std::size_t i = 1; i < series.timestamps.size(); ++i)
        REQUIRE(series.timestamps[i] == series.timestamps[i - 1] + 1);
    }
  REQUIRE(rec.gps->size() == 75);
  for (std::size_t i = 1; i < rec.gps->size(); ++i)
    REQUIRE((*rec.gps)[i].timestamp == (*rec.gps)[i - 1].timestamp + 1);
  REQUIRE(rec.record_id == "r0001");
  REQUIRE(rec.label == ActivityLabel::Walking);
  REQUIRE(rec.volunteer.volunteer_id == "v01");
}

TEST_CASE("durations under a minute are rejected") {
  try {
    walking_record(1, 59);
    FAIL("expected DurationTooShort");
  } catch (const Error& e) {
    REQUIRE(e.code() == Errc::DurationTooShort);
  }
}

TEST_CASE("zero sway and zero noise produce flat orientation and zero indicators") {
  ActivityProfile profile = default_profile(ActivityLabel::Walking);
  profile.sway_amplitude_deg = 0.0;
  profile.noise_sd.fill(0.0);
  const ActivityRecord rec = generate_record("r0001", kVol, ActivityLabel::Walking,
                                             profile, StyleOffset{}, 80, 9);

  const auto& ori_z = rec.at(Sensor::Orientation, Axis::Z).values;
  REQUIRE(*std::min_element(ori_z.begin(), ori_z.end()) ==
          *std::max_element(ori_z.begin(), ori_z.end()));
  // vertical motion still present on the accelerometer
  const auto& acc_y = rec.at(Sensor::Accelerometer, Axis::Y).values;
  REQUIRE(stats::stddev(acc_y) > 0.1);

  const RawDna raw = compute_dna_raw(rec, DnaParams{});
  REQUIRE(raw.balance_rmse == Approx(0.0).margin(1e-12));
  REQUIRE(raw.stride_apen == 0.0);
}

TEST_CASE("walking GPS tracks move at roughly walking speed") {
  const ActivityRecord rec = walking_record(77, 120);
  const KinematicFeatures feats = track_kinematics(*rec.gps).second;
  REQUIRE_THAT(feats.mean_velocity, Catch::Matchers::WithinAbs(1.4, 0.14));
  REQUIRE(feats.max_velocity < kGpsSpeedOutlierMs);

  const ActivityProfile running = default_profile(ActivityLabel::Running);
  const ActivityRecord run = generate_record("r0002", kVol, ActivityLabel::Running,
                                             running, StyleOffset{}, 120, 78);
  REQUIRE(track_kinematics(*run.gps).second.mean_velocity > feats.mean_velocity);
}

TEST_CASE("style multipliers stay inside their documented ranges") {
  Rng rng(2020);
  for (int i = 0; i < 100; ++i) {
    const StyleOffset style = draw_style(rng);
    REQUIRE(style.amplitude >= 0.80);
    REQUIRE(style.amplitude <= 1.25);
    REQUIRE(style.sway >= 0.80);
    REQUIRE(style.sway <= 1.25);
    REQUIRE(style.frequency >= 0.92);
    REQUIRE(style.frequency <= 1.10);
    REQUIRE(style.noise >= 0.85);
    REQUIRE(style.noise <= 1.20);
    REQUIRE(style.speed >= 0.92);
    REQUIRE(style.speed <= 1.10);
    style.validate();
  }
  StyleOffset bad;
  bad.amplitude = 0.4;
  REQUIRE_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("the default cohort shape yields 271 records over 33 volunteers") {
  const CohortSpec spec = CohortSpec::paper_shape();
  const auto records = generate_cohort(spec, 4);
  REQUIRE(records.size() == 271);

  std::map<ActivityLabel, int> label_counts;
  std::set<std::string> ids, volunteers, runners;
  std::map<std::string, int> runs_per_volunteer;
  for (const auto& rec : records) {
    label_counts[rec.label]++;
    ids.insert(rec.record_id);
    volunteers.insert(rec.volunteer.volunteer_id);
    if (rec.label == ActivityLabel::Running) {
      runners.insert(rec.volunteer.volunteer_id);
      runs_per_volunteer[rec.volunteer.volunteer_id]++;
    }
    REQUIRE(rec.at(Sensor::Accelerometer, Axis::X).values.size() == 120);
  }
  REQUIRE(label_counts[ActivityLabel::Biking] == 32);
  REQUIRE(label_counts[ActivityLabel::EBikeRiding] == 55);
  REQUIRE(label_counts[ActivityLabel::Walking] == 45);
  REQUIRE(label_counts[ActivityLabel::Running] == 139);
  REQUIRE(ids.size() == 271);
  REQUIRE(volunteers.size() == 33);
  REQUIRE(runners.size() == 20);
  // 139 running records cycle the 20 runners: 19 volunteers get 7, one gets 6
  for (const auto& [vol, n] : runs_per_volunteer) REQUIRE((n == 6 || n == 7));

  REQUIRE(records.front().record_id == "r0001");
  REQUIRE(records.back().record_id == "r0271");

  // volunteers alternate sex starting with female
  for (const auto& rec : records) {
    const int index = std::stoi(rec.volunteer.volunteer_id.substr(1));
    REQUIRE(rec.volunteer.sex == (index % 2 == 1 ? Sex::Female : Sex::Male));
    REQUIRE(rec.volunteer.height_cm >= 155.0);
    REQUIRE(rec.volunteer.height_cm <= 192.0);
  }
}

TEST_CASE("cohort seeds change the data but not the shape") {
  CohortSpec spec;
  spec.counts = {2, 2, 2, 3};
  spec.n_volunteers = 3;
  spec.n_runners = 2;
  spec.duration_s = 60;
  const auto a = generate_cohort(spec, 1);
  const auto b = generate_cohort(spec, 2);
  REQUIRE(a.size() == 9);
  REQUIRE(b.size() == 9);
  for (std::size_t i = 0; i < a.size(); ++i) {
    REQUIRE(a[i].record_id == b[i].record_id);
    REQUIRE(a[i].label == b[i].label);
    REQUIRE(a[i].at(Sensor::Gyroscope, Axis::X).values !=
            b[i].at(Sensor::Gyroscope, Axis::X).values);
  }

  const auto a2 = generate_cohort(spec, 1);
  for (std::size_t i = 0; i < a.size(); ++i)
    REQUIRE(a[i].at(Sensor::Gyroscope, Axis::X).values ==
            a2[i].at(Sensor::Gyroscope, Axis::X).values);
}

TEST_CASE("bad cohort specs are rejected") {
  CohortSpec spec;
  spec.counts = {1, 1, 1, 1};
  spec.n_volunteers = 2;
  spec.n_runners = 1;
  spec.duration_s = 60;
  REQUIRE_NOTHROW(spec.validate());

  CohortSpec zero = spec;
  zero.counts[0] = 0;
  REQUIRE_THROWS_AS(zero.validate(), Error);

  CohortSpec lonely = spec;
  lonely.n_volunteers = 1;
  REQUIRE_THROWS_AS(lonely.validate(), Error);

  CohortSpec no_runner = spec;
  no_runner.n_runners = 0;
  REQUIRE_THROWS_AS(no_runner.validate(), Error);

  CohortSpec too_many = spec;
  too_many.n_runners = 3;
  REQUIRE_THROWS_AS(too_many.validate(), Error);

  CohortSpec brief = spec;
  brief.duration_s = 59;
  try {
    generate_cohort(brief, 1);
    FAIL("expected InvalidSpec");
  } catch (const Error& e) {
    REQUIRE(e.code() == Errc::InvalidSpec);
  }
}

TEST_CASE("activity profiles order speeds and cadences sensibly") {
  const ActivityProfile biking = default_profile(ActivityLabel::Biking);
  const ActivityProfile ebike = default_profile(ActivityLabel::EBikeRiding);
  const ActivityProfile walking = default_profile(ActivityLabel::Walking);
  const ActivityProfile running = default_profile(ActivityLabel::Running);

  REQUIRE(running.gait_frequency_hz > walking.gait_frequency_hz);
  REQUIRE(walking.gait_frequency_hz > biking.gait_frequency_hz);
  REQUIRE(biking.gait_frequency_hz > ebike.gait_frequency_hz);

  REQUIRE(running.vertical_amplitude > walking.vertical_amplitude);
  REQUIRE(ebike.base_speed_ms > biking.base_speed_ms);
  REQUIRE(biking.base_speed_ms > running.base_speed_ms);
  REQUIRE(running.base_speed_ms > walking.base_speed_ms);

  for (const auto& p : {biking, ebike, walking, running}) REQUIRE_NOTHROW(p.validate());
}
