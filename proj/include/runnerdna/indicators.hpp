#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "runnerdna/csv.hpp"
#include "runnerdna/error.hpp"
#include "runnerdna/polyfit.hpp"
#include "runnerdna/stats.hpp"
#include "runnerdna/types.hpp"

namespace runnerdna {

// Approximate entropy (Pincus 1991): phi^m - phi^{m+1} over Chebyshev
// matches of embedded windows, self-match included, natural log.
inline double approximate_entropy(std::span<const double> values, int m, double r) {
  const std::size_t n = values.size();
  if (m < 1) raise(Errc::InvalidArgument, "ApEn window m must be >= 1");
  if (n < static_cast<std::size_t>(m) + 2)
    raise(Errc::TooShort, "ApEn needs at least m + 2 samples");
  if (!(r > 0.0)) raise(Errc::NonPositiveThreshold, "ApEn threshold r must be > 0");

  auto phi = [&](int window) {
    const std::size_t k = n - static_cast<std::size_t>(window) + 1;
    double sum_log = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      std::size_t matches = 0;
      for (std::size_t j = 0; j < k; ++j) {
        double dist = 0.0;
        for (int t = 0; t < window; ++t)
          dist = std::max(dist, std::fabs(values[i + t] - values[j + t]));
        if (dist <= r) ++matches;
      }
      sum_log += std::log(static_cast<double>(matches) / static_cast<double>(k));
    }
    return sum_log / static_cast<double>(k);
  };

  const double apen = phi(m) - phi(m + 1);
  return std::max(apen, 0.0);  // guards tiny negative float residue
}

// Negative log-likelihood of the series under the Gaussian fitted to itself
// (mu = sample mean, sigma^2 = population variance):
//   sum_i [ 0.5 ln(2 pi) + ln sigma + (x_i - mu)^2 / (2 sigma^2) ]
inline double gaussian_nll(std::span<const double> values) {
  if (values.size() < 2) raise(Errc::TooShort, "NLL needs >= 2 samples");
  const double mu = stats::mean(values);
  const double var = stats::variance(values);
  if (!(var > 0.0)) raise(Errc::DegenerateSeries, "zero variance");
  const double sigma = std::sqrt(var);
  constexpr double kHalfLog2Pi = 0.91893853320467274178;  // 0.5 * ln(2*pi)
  double nll = 0.0;
  for (double x : values)
    nll += kHalfLog2Pi + std::log(sigma) + (x - mu) * (x - mu) / (2.0 * var);
  return nll;
}

inline constexpr std::array<const char*, 5> kIndicatorNames = {
    "balance", "stride", "steer", "stability", "amplitude"};

// Raw indicator statistics, before cohort normalization.
struct RawDna {
  double balance_rmse = 0.0;   // linear-fit RMSE of orientation z, degrees
  double stride_apen = 0.0;    // ApEn of orientation x
  double steer_rmse = 0.0;     // cubic-fit RMSE of linear-acceleration x, m/s^2
  double stability_nll = 0.0;  // per-sample Gaussian NLL of linear-acceleration z
  double amplitude_nll = 0.0;  // per-sample Gaussian NLL of the amplitude series

  std::array<double, 5> as_array() const {
    return {balance_rmse, stride_apen, steer_rmse, stability_nll, amplitude_nll};
  }
};

struct RunnerDna {
  std::string record_id;
  RawDna raw;
  std::array<double, 5> normalized{};  // each in [0, 5]
};

enum class AmplitudeSource { Accelerometer, LinearAcceleration };

inline const char* amplitude_source_name(AmplitudeSource s) {
  return s == AmplitudeSource::Accelerometer ? "accelerometer"
                                             : "linear_acceleration";
}

inline AmplitudeSource amplitude_source_from_name(const std::string& name) {
  if (name == "accelerometer") return AmplitudeSource::Accelerometer;
  if (name == "linear_acceleration") return AmplitudeSource::LinearAcceleration;
  raise(Errc::InvalidArgument, "amplitude_source must be accelerometer or "
                               "linear_acceleration, got '" + name + "'");
}

struct DnaParams {
  int apen_m = 2;             // Pincus default
  double apen_r_factor = 0.2; // r = 0.2 * SD of the stride series
  AmplitudeSource amplitude_source = AmplitudeSource::Accelerometer;
};

// The five indicator statistics from their designated sensor axes. NLL
// indicators are reported per sample so session length does not leak into
// the value.
inline RawDna compute_dna_raw(const ActivityRecord& record,
                              const DnaParams& params = {}) {
  if (params.apen_m < 1) raise(Errc::InvalidArgument, "ApEn m must be >= 1");
  if (!(params.apen_r_factor > 0.0))
    raise(Errc::NonPositiveThreshold, "r_factor must be > 0");

  auto indicator_guard = [&](const char* name, auto&& fn) -> double {
    try {
      return fn();
    } catch (const Error& e) {
      if (e.code() == Errc::DegenerateSeries)
        raise(Errc::DegenerateSeries,
              std::string(name) + " (record " + record.record_id + ")");
      throw;
    }
  };

  RawDna dna;
  dna.balance_rmse =
      fit_polynomial_rmse(record.at(Sensor::Orientation, Axis::Z).values, 1);

  const auto& stride_series = record.at(Sensor::Orientation, Axis::X).values;
  const double stride_sd = stats::stddev(stride_series);
  if (stride_sd > 0.0) {
    dna.stride_apen = approximate_entropy(stride_series, params.apen_m,
                                          params.apen_r_factor * stride_sd);
  } else {
    dna.stride_apen = 0.0;  // constant series: every window matches, ApEn = 0
  }

  dna.steer_rmse =
      fit_polynomial_rmse(record.at(Sensor::LinearAcceleration, Axis::X).values, 3);

  const auto& stability_series =
      record.at(Sensor::LinearAcceleration, Axis::Z).values;
  dna.stability_nll = indicator_guard("stability", [&] {
    return gaussian_nll(stability_series) /
           static_cast<double>(stability_series.size());
  });

  const Sensor amp_sensor = params.amplitude_source == AmplitudeSource::Accelerometer
                                ? Sensor::Accelerometer
                                : Sensor::LinearAcceleration;
  const auto& amplitude_series = record.at(amp_sensor, Axis::Y).values;
  dna.amplitude_nll = indicator_guard("amplitude", [&] {
    return gaussian_nll(amplitude_series) /
           static_cast<double>(amplitude_series.size());
  });
  return dna;
}

// Min-max map of each indicator onto [0, 5] across the cohort. A flat
// indicator (max == min) pins everyone at the midpoint 2.5.
inline std::vector<RunnerDna> normalize_dna(
    const std::vector<std::pair<std::string, RawDna>>& cohort) {
  if (cohort.empty()) raise(Errc::EmptyCohort, "normalize_dna on empty cohort");

  std::array<double, 5> lo{}, hi{};
  lo.fill(std::numeric_limits<double>::infinity());
  hi.fill(-std::numeric_limits<double>::infinity());
  for (const auto& [id, raw] : cohort) {
    const auto a = raw.as_array();
    for (std::size_t k = 0; k < 5; ++k) {
      lo[k] = std::min(lo[k], a[k]);
      hi[k] = std::max(hi[k], a[k]);
    }
  }

  std::vector<RunnerDna> out;
  out.reserve(cohort.size());
  for (const auto& [id, raw] : cohort) {
    RunnerDna d;
    d.record_id = id;
    d.raw = raw;
    const auto a = raw.as_array();
    for (std::size_t k = 0; k < 5; ++k) {
      d.normalized[k] =
          hi[k] > lo[k] ? 5.0 * (a[k] - lo[k]) / (hi[k] - lo[k]) : 2.5;
    }
    out.push_back(std::move(d));
  }
  return out;
}

// --- dna.csv -----------------------------------------------------------------

struct DnaRow {
  std::string record_id;
  std::string label;
  std::string sex;
  RawDna raw;
  std::array<double, 5> normalized{};
};

inline std::string dna_csv_header() {
  std::string h = "record_id,label,sex";
  for (const char* name : kIndicatorNames) h += ",raw_" + std::string(name);
  for (const char* name : kIndicatorNames) h += "," + std::string(name);
  return h;
}

inline std::string write_dna_csv(const std::vector<DnaRow>& rows) {
  std::string out = dna_csv_header() + "\n";
  for (const DnaRow& r : rows) {
    out += r.record_id + "," + r.label + "," + r.sex;
    for (double v : r.raw.as_array()) out += "," + csv::format_double(v);
    for (double v : r.normalized) out += "," + csv::format_double(v);
    out += "\n";
  }
  return out;
}

inline std::vector<DnaRow> read_dna_csv(const std::string& text) {
  const csv::Table t = csv::parse(text);
  if (t.header != csv::split(dna_csv_header()))
    raise(Errc::ParseFailure, "unexpected dna.csv header");
  std::vector<DnaRow> rows;
  rows.reserve(t.rows.size());
  for (const auto& fields : t.rows) {
    if (fields.size() != 13)
      raise(Errc::ParseFailure, "dna.csv row has wrong field count");
    DnaRow r;
    r.record_id = fields[0];
    r.label = fields[1];
    r.sex = fields[2];
    std::array<double, 5> raw{};
    for (std::size_t k = 0; k < 5; ++k)
      raw[k] = csv::parse_double(fields[3 + k], "dna.csv");
    r.raw = {raw[0], raw[1], raw[2], raw[3], raw[4]};
    for (std::size_t k = 0; k < 5; ++k)
      r.normalized[k] = csv::parse_double(fields[8 + k], "dna.csv");
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace runnerdna
