#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "runnerdna/csv.hpp"
#include "runnerdna/error.hpp"
#include "runnerdna/types.hpp"

namespace runnerdna {

// --- timestamps --------------------------------------------------------------
// Log timestamps look like "20191220 18:14:37"; ISO-8601
// ("2019-12-20 18:14:37" or with 'T') is accepted as a fallback.

namespace detail {

inline bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isdigit(c) != 0;
  });
}

inline int digits_to_int(std::string_view s) {
  int v = 0;
  for (char c : s) v = v * 10 + (c - '0');
  return v;
}

}  // namespace detail

inline std::int64_t parse_timestamp(std::string_view text) {
  using detail::all_digits;
  using detail::digits_to_int;

  int y = 0;
  unsigned mo = 0, d = 0, h = 0, mi = 0, s = 0;
  bool ok = false;
  if (text.size() == 17 && text[8] == ' ') {
    // YYYYMMDD HH:MM:SS
    std::string_view date = text.substr(0, 8), time = text.substr(9);
    if (all_digits(date) && time[2] == ':' && time[5] == ':' &&
        all_digits(time.substr(0, 2)) && all_digits(time.substr(3, 2)) &&
        all_digits(time.substr(6, 2))) {
      y = digits_to_int(date.substr(0, 4));
      mo = digits_to_int(date.substr(4, 2));
      d = digits_to_int(date.substr(6, 2));
      h = digits_to_int(time.substr(0, 2));
      mi = digits_to_int(time.substr(3, 2));
      s = digits_to_int(time.substr(6, 2));
      ok = true;
    }
  } else if (text.size() == 19 && text[4] == '-' && text[7] == '-' &&
             (text[10] == ' ' || text[10] == 'T')) {
    // YYYY-MM-DD HH:MM:SS
    if (all_digits(text.substr(0, 4)) && all_digits(text.substr(5, 2)) &&
        all_digits(text.substr(8, 2)) && text[13] == ':' && text[16] == ':' &&
        all_digits(text.substr(11, 2)) && all_digits(text.substr(14, 2)) &&
        all_digits(text.substr(17, 2))) {
      y = digits_to_int(text.substr(0, 4));
      mo = digits_to_int(text.substr(5, 2));
      d = digits_to_int(text.substr(8, 2));
      h = digits_to_int(text.substr(11, 2));
      mi = digits_to_int(text.substr(14, 2));
      s = digits_to_int(text.substr(17, 2));
      ok = true;
    }
  }
  if (!ok || mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || s > 59)
    raise(Errc::MalformedTimestamp, "bad timestamp '" + std::string(text) + "'");
  return civil_to_epoch(y, mo, d, h, mi, s);
}

inline std::string format_timestamp(std::int64_t epoch) {
  std::int64_t days = epoch / 86400;
  std::int64_t rem = epoch % 86400;
  if (rem < 0) {
    rem += 86400;
    --days;
  }
  int y = 0;
  unsigned mo = 0, d = 0;
  civil_from_days(days, y, mo, d);
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%04d%02u%02u %02lld:%02lld:%02lld", y, mo, d,
                static_cast<long long>(rem / 3600),
                static_cast<long long>((rem / 60) % 60),
                static_cast<long long>(rem % 60));
  return buf;
}

// --- sensor CSV ----------------------------------------------------------------

inline const std::vector<std::string>& sensor_csv_columns() {
  static const std::vector<std::string> cols = [] {
    std::vector<std::string> c{"time"};
    for (Sensor s : kAllSensors)
      for (Axis a : kAllAxes) c.push_back(series_code(s, a));
    return c;
  }();
  return cols;
}

struct RecordMeta {
  std::string record_id;
  ActivityLabel label = ActivityLabel::Walking;
  VolunteerProfile volunteer;
};

// Parses one sensor log into an ActivityRecord. Rows may arrive out of order
// (they are stable-sorted by time) and may share a second; alignment to the
// 1 Hz grid is a separate step.
inline ActivityRecord parse_activity_csv(const std::string& text,
                                         const RecordMeta& meta) {
  const csv::Table table = csv::parse(text);
  if (table.header.empty())
    raise(Errc::MissingColumn, meta.record_id + ": empty sensor CSV");

  std::map<std::string, std::size_t> col_index;
  for (std::size_t i = 0; i < table.header.size(); ++i)
    col_index[table.header[i]] = i;

  const auto& wanted = sensor_csv_columns();
  std::vector<std::size_t> col_of(wanted.size());
  for (std::size_t i = 0; i < wanted.size(); ++i) {
    auto it = col_index.find(wanted[i]);
    if (it == col_index.end())
      raise(Errc::MissingColumn,
            meta.record_id + ": column '" + wanted[i] + "' absent");
    col_of[i] = it->second;
  }

  struct Row {
    std::int64_t t;
    std::array<double, 18> v;
  };
  std::vector<Row> rows;
  rows.reserve(table.rows.size());
  for (const auto& fields : table.rows) {
    if (fields.size() < table.header.size())
      raise(Errc::ParseFailure, meta.record_id + ": short CSV row");
    Row row{};
    row.t = parse_timestamp(fields[col_of[0]]);
    for (std::size_t k = 0; k < 18; ++k) {
      const double v = csv::parse_double(fields[col_of[k + 1]],
                                         meta.record_id + "/" + wanted[k + 1]);
      if (!std::isfinite(v))
        raise(Errc::NonFiniteValue,
              meta.record_id + ": non-finite " + wanted[k + 1]);
      row.v[k] = v;
    }
    rows.push_back(row);
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const Row& a, const Row& b) { return a.t < b.t; });

  std::size_t distinct = 0;
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (i == 0 || rows[i].t != rows[i - 1].t) ++distinct;
  if (distinct < ActivityRecord::kMinSamples)
    raise(Errc::TooShort, meta.record_id + ": only " + std::to_string(distinct) +
                              " distinct seconds (< 30)");

  ActivityRecord record;
  record.record_id = meta.record_id;
  record.label = meta.label;
  record.volunteer = meta.volunteer;
  std::size_t k = 0;
  for (Sensor s : kAllSensors) {
    for (Axis a : kAllAxes) {
      SensorAxisSeries series;
      series.sensor = s;
      series.axis = a;
      series.timestamps.reserve(rows.size());
      series.values.reserve(rows.size());
      for (const Row& row : rows) {
        series.timestamps.push_back(row.t);
        series.values.push_back(row.v[k]);
      }
      record.series[{s, a}] = std::move(series);
      ++k;
    }
  }
  return record;
}

enum class AlignPolicy { MeanPerSecond, FirstPerSecond };

// Collapses duplicate-second samples onto a strictly increasing grid. Gaps
// over 5 s are an error: interpolating would fabricate motion signal.
inline ActivityRecord align_series(const ActivityRecord& record,
                                   AlignPolicy policy = AlignPolicy::MeanPerSecond) {
  constexpr std::int64_t kMaxGapSeconds = 5;
  ActivityRecord out = record;
  for (auto& [key, series] : out.series) {
    if (series.values.empty())
      raise(Errc::TooShort, record.record_id + ": empty series");
    std::vector<std::int64_t> ts;
    std::vector<double> vs;
    std::size_t i = 0;
    const std::size_t n = series.values.size();
    while (i < n) {
      std::size_t j = i;
      double sum = 0.0;
      while (j < n && series.timestamps[j] == series.timestamps[i]) {
        sum += series.values[j];
        ++j;
      }
      if (!ts.empty()) {
        const std::int64_t gap = series.timestamps[i] - ts.back();
        if (gap > kMaxGapSeconds)
          raise(Errc::GapTooLarge,
                record.record_id + ": " + std::to_string(gap) + " s gap at " +
                    format_timestamp(series.timestamps[i]));
      }
      ts.push_back(series.timestamps[i]);
      vs.push_back(policy == AlignPolicy::MeanPerSecond
                       ? sum / static_cast<double>(j - i)
                       : series.values[i]);
      i = j;
    }
    if (vs.size() < ActivityRecord::kMinSamples)
      raise(Errc::TooShort, record.record_id + ": " + std::to_string(vs.size()) +
                                " aligned samples (< 30)");
    series.timestamps = std::move(ts);
    series.values = std::move(vs);
  }
  return out;
}

// --- GPS CSV -------------------------------------------------------------------

inline std::vector<GpsPoint> parse_gps_csv(const std::string& text,
                                           const std::string& context) {
  const csv::Table table = csv::parse(text);
  const std::vector<std::string> expected{"time", "lat", "lon"};
  if (table.header != expected)
    raise(Errc::MissingColumn, context + ": GPS header must be time,lat,lon");
  std::vector<GpsPoint> points;
  points.reserve(table.rows.size());
  for (const auto& fields : table.rows) {
    if (fields.size() != 3)
      raise(Errc::ParseFailure, context + ": short GPS row");
    GpsPoint p;
    p.timestamp = parse_timestamp(fields[0]);
    p.lat = csv::parse_double(fields[1], context + "/lat");
    p.lon = csv::parse_double(fields[2], context + "/lon");
    p.validate();
    points.push_back(p);
  }
  std::stable_sort(points.begin(), points.end(),
                   [](const GpsPoint& a, const GpsPoint& b) {
                     return a.timestamp < b.timestamp;
                   });
  // 1 Hz schema: keep the first fix of any duplicated second.
  std::vector<GpsPoint> dedup;
  dedup.reserve(points.size());
  for (const GpsPoint& p : points)
    if (dedup.empty() || p.timestamp != dedup.back().timestamp)
      dedup.push_back(p);
  return dedup;
}

// --- metadata sidecar ----------------------------------------------------------

inline RecordMeta parse_record_meta(const std::string& json_text,
                                    const std::string& context) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    raise(Errc::ParseFailure, context + ": bad metadata JSON: " + e.what());
  }
  try {
    RecordMeta meta;
    meta.record_id = j.at("record_id").get<std::string>();
    meta.label = label_from_name(j.at("label").get<std::string>());
    const auto& v = j.at("volunteer");
    meta.volunteer.volunteer_id = v.at("volunteer_id").get<std::string>();
    meta.volunteer.sex = sex_from_name(v.at("sex").get<std::string>());
    meta.volunteer.height_cm = v.at("height_cm").get<double>();
    meta.volunteer.weight_kg = v.at("weight_kg").get<double>();
    meta.volunteer.validate();
    return meta;
  } catch (const nlohmann::json::exception& e) {
    raise(Errc::ParseFailure, context + ": metadata field missing: " + e.what());
  }
}

inline std::string serialize_record_meta(const RecordMeta& meta) {
  nlohmann::json j;
  j["record_id"] = meta.record_id;
  j["label"] = label_name(meta.label);
  j["volunteer"] = {{"volunteer_id", meta.volunteer.volunteer_id},
                    {"sex", sex_name(meta.volunteer.sex)},
                    {"height_cm", meta.volunteer.height_cm},
                    {"weight_kg", meta.volunteer.weight_kg}};
  return j.dump(2) + "\n";
}

// --- record files ----------------------------------------------------------------
// A record on disk is <id>.meta.json + <id>.sensors.csv [+ <id>.gps.csv].

inline std::string serialize_sensor_csv(const ActivityRecord& record) {
  std::string out;
  const auto& cols = sensor_csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i)
    out += (i ? "," : "") + cols[i];
  out += "\n";
  const SensorAxisSeries& first = record.at(Sensor::Accelerometer, Axis::X);
  for (std::size_t row = 0; row < first.size(); ++row) {
    out += format_timestamp(first.timestamps[row]);
    for (Sensor s : kAllSensors)
      for (Axis a : kAllAxes)
        out += "," + csv::format_double(record.at(s, a).values[row]);
    out += "\n";
  }
  return out;
}

inline std::string serialize_gps_csv(std::span<const GpsPoint> track) {
  std::string out = "time,lat,lon\n";
  for (const GpsPoint& p : track) {
    out += format_timestamp(p.timestamp) + "," + csv::format_double(p.lat) + "," +
           csv::format_double(p.lon) + "\n";
  }
  return out;
}

inline void write_record_files(const std::filesystem::path& dir,
                               const ActivityRecord& record) {
  std::filesystem::create_directories(dir);
  RecordMeta meta{record.record_id, record.label, record.volunteer};
  csv::write_file((dir / (record.record_id + ".meta.json")).string(),
                  serialize_record_meta(meta));
  csv::write_file((dir / (record.record_id + ".sensors.csv")).string(),
                  serialize_sensor_csv(record));
  if (record.gps)
    csv::write_file((dir / (record.record_id + ".gps.csv")).string(),
                    serialize_gps_csv(*record.gps));
}

inline ActivityRecord load_record(const std::filesystem::path& dir,
                                  const std::string& record_id,
                                  AlignPolicy policy = AlignPolicy::MeanPerSecond) {
  const RecordMeta meta = parse_record_meta(
      csv::read_file((dir / (record_id + ".meta.json")).string()), record_id);
  ActivityRecord record = parse_activity_csv(
      csv::read_file((dir / (record_id + ".sensors.csv")).string()), meta);
  const auto gps_path = dir / (record_id + ".gps.csv");
  if (std::filesystem::exists(gps_path))
    record.gps = parse_gps_csv(csv::read_file(gps_path.string()), record_id);
  record = align_series(record, policy);
  record.validate(/*aligned=*/true);
  return record;
}

// Loads every record in a directory (one per *.meta.json), sorted by id so
// downstream outputs are order-stable.
inline std::vector<ActivityRecord> load_records(
    const std::filesystem::path& dir,
    AlignPolicy policy = AlignPolicy::MeanPerSecond) {
  if (!std::filesystem::is_directory(dir))
    raise(Errc::IoFailure, "not a directory: " + dir.string());
  std::vector<std::string> ids;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    constexpr std::string_view suffix = ".meta.json";
    if (name.size() > suffix.size() &&
        name.substr(name.size() - suffix.size()) == suffix)
      ids.push_back(name.substr(0, name.size() - suffix.size()));
  }
  std::sort(ids.begin(), ids.end());
  if (ids.empty()) raise(Errc::EmptyData, "no records in " + dir.string());
  std::vector<ActivityRecord> records;
  records.reserve(ids.size());
  for (const std::string& id : ids) records.push_back(load_record(dir, id, policy));
  return records;
}

}  // namespace runnerdna
