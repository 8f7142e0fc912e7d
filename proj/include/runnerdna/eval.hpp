#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "runnerdna/csv.hpp"
#include "runnerdna/error.hpp"

namespace runnerdna {

// counts[i][j] holds rows whose true class is j and predicted class is i,
// so each column sums to the per-class truth count.
struct ConfusionMatrix {
  std::vector<std::string> classes;
  std::vector<std::vector<std::size_t>> counts;

  std::size_t total() const {
    std::size_t n = 0;
    for (const auto& row : counts)
      for (std::size_t c : row) n += c;
    return n;
  }

  std::size_t column_total(std::size_t j) const {
    std::size_t n = 0;
    for (const auto& row : counts) n += row[j];
    return n;
  }

  std::size_t row_total(std::size_t i) const {
    std::size_t n = 0;
    for (std::size_t c : counts[i]) n += c;
    return n;
  }

  // Per-column fractions; an empty column stays all zero.
  std::vector<std::vector<double>> column_normalized() const {
    std::vector<std::vector<double>> out(classes.size(),
                                         std::vector<double>(classes.size(), 0.0));
    for (std::size_t j = 0; j < classes.size(); ++j) {
      std::size_t col = column_total(j);
      if (col == 0) continue;
      for (std::size_t i = 0; i < classes.size(); ++i)
        out[i][j] = static_cast<double>(counts[i][j]) / static_cast<double>(col);
    }
    return out;
  }
};

inline ConfusionMatrix confusion_matrix(const std::vector<std::string>& truth,
                                        const std::vector<std::string>& predicted,
                                        const std::vector<std::string>& classes) {
  if (truth.size() != predicted.size())
    raise(Errc::LengthMismatch, "truth/prediction lengths differ");
  ConfusionMatrix cm;
  cm.classes = classes;
  cm.counts.assign(classes.size(), std::vector<std::size_t>(classes.size(), 0));
  auto index_of = [&](const std::string& label) {
    auto it = std::find(classes.begin(), classes.end(), label);
    if (it == classes.end()) raise(Errc::UnknownLabel, "label not in class list: " + label);
    return static_cast<std::size_t>(it - classes.begin());
  };
  for (std::size_t k = 0; k < truth.size(); ++k)
    cm.counts[index_of(predicted[k])][index_of(truth[k])]++;
  return cm;
}

inline double accuracy(const ConfusionMatrix& cm) {
  std::size_t n = cm.total();
  if (n == 0) raise(Errc::EmptyMatrix, "confusion matrix has no observations");
  std::size_t diag = 0;
  for (std::size_t i = 0; i < cm.classes.size(); ++i) diag += cm.counts[i][i];
  return static_cast<double>(diag) / static_cast<double>(n);
}

// Chance-corrected agreement. Expected agreement uses row and column
// marginals; if it reaches 1 (all mass in one cell line) kappa is defined
// as 0 here since there is no chance left to correct for.
inline double cohen_kappa(const ConfusionMatrix& cm) {
  std::size_t n = cm.total();
  if (n == 0) raise(Errc::EmptyMatrix, "confusion matrix has no observations");
  // (po - pe) / (1 - pe) scaled by n^2 so all terms are integers and the one
  // division is the only rounding step.
  const double nn = static_cast<double>(n);
  double diag = 0.0, chance = 0.0;
  for (std::size_t i = 0; i < cm.classes.size(); ++i) {
    diag += static_cast<double>(cm.counts[i][i]);
    chance += static_cast<double>(cm.row_total(i)) *
              static_cast<double>(cm.column_total(i));
  }
  if (chance >= nn * nn) return 0.0;
  return (nn * diag - chance) / (nn * nn - chance);
}

namespace detail {

// Continued fraction for the regularized incomplete beta, evaluated with the
// modified Lentz method.
inline double beta_continued_fraction(double a, double b, double x) {
  const int max_iterations = 300;
  const double eps = 1e-16;
  const double tiny = 1e-300;
  double qab = a + b;
  double qap = a + 1.0;
  double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= max_iterations; ++m) {
    int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < eps) break;
  }
  return h;
}

}  // namespace detail

inline double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0))
    raise(Errc::InvalidArgument, "beta parameters must be positive");
  if (!(x >= 0.0 && x <= 1.0))
    raise(Errc::InvalidArgument, "beta argument outside [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                     a * std::log(x) + b * std::log1p(-x);
  double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0))
    return front * detail::beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * detail::beta_continued_fraction(b, a, 1.0 - x) / b;
}

// Two-sided p-value for a t statistic with df degrees of freedom.
inline double t_p_value(double t, double df) {
  if (!(df > 0.0)) raise(Errc::InvalidArgument, "degrees of freedom must be positive");
  if (!std::isfinite(t)) raise(Errc::NonFiniteValue, "t statistic not finite");
  return regularized_incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
}

struct GroupSummary {
  double mean = 0.0;
  double sample_variance = 0.0;  // divisor n-1
  std::size_t n = 0;
};

struct TTestResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;
  GroupSummary group1;
  GroupSummary group2;
};

inline GroupSummary summarize_group(const std::vector<double>& values) {
  GroupSummary g;
  g.n = values.size();
  if (g.n < 2) raise(Errc::TooFewSamples, "group needs at least 2 samples");
  double sum = 0.0;
  for (double v : values) {
    if (!std::isfinite(v)) raise(Errc::NonFiniteValue, "group value not finite");
    sum += v;
  }
  g.mean = sum / static_cast<double>(g.n);
  double ss = 0.0;
  for (double v : values) ss += (v - g.mean) * (v - g.mean);
  g.sample_variance = ss / static_cast<double>(g.n - 1);
  return g;
}

// Pooled-variance two-sample t-test, equal variances assumed.
inline TTestResult students_t(const GroupSummary& g1, const GroupSummary& g2) {
  if (g1.n < 2 || g2.n < 2) raise(Errc::TooFewSamples, "both groups need n >= 2");
  if (g1.sample_variance < 0.0 || g2.sample_variance < 0.0)
    raise(Errc::InvalidArgument, "variances must be nonnegative");
  double df = static_cast<double>(g1.n + g2.n - 2);
  double pooled = ((static_cast<double>(g1.n - 1)) * g1.sample_variance +
                   (static_cast<double>(g2.n - 1)) * g2.sample_variance) /
                  df;
  double scale = pooled * (1.0 / static_cast<double>(g1.n) +
                           1.0 / static_cast<double>(g2.n));
  if (!(scale > 0.0))
    raise(Errc::DegeneratePooledVariance, "pooled variance is zero");
  TTestResult res;
  res.group1 = g1;
  res.group2 = g2;
  res.df = df;
  res.t = (g1.mean - g2.mean) / std::sqrt(scale);
  res.p = t_p_value(res.t, df);
  return res;
}

inline TTestResult students_t(const std::vector<double>& a,
                              const std::vector<double>& b) {
  return students_t(summarize_group(a), summarize_group(b));
}

// confusion.csv layout: a raw-count block then a column-normalized block,
// both with predicted classes as rows and true classes as columns.
inline std::string confusion_csv(const ConfusionMatrix& cm) {
  std::string out = "block,predicted";
  for (const auto& c : cm.classes) out += ",true_" + c;
  out += '\n';
  for (std::size_t i = 0; i < cm.classes.size(); ++i) {
    out += "counts," + cm.classes[i];
    for (std::size_t j = 0; j < cm.classes.size(); ++j)
      out += ',' + std::to_string(cm.counts[i][j]);
    out += '\n';
  }
  auto norm = cm.column_normalized();
  for (std::size_t i = 0; i < cm.classes.size(); ++i) {
    out += "column_fraction," + cm.classes[i];
    for (std::size_t j = 0; j < cm.classes.size(); ++j)
      out += ',' + csv::format_double(norm[i][j]);
    out += '\n';
  }
  return out;
}

inline ConfusionMatrix parse_confusion_csv(const std::string& text) {
  csv::Table table = csv::parse(text);
  if (table.header.size() < 3 || table.header[0] != "block" ||
      table.header[1] != "predicted")
    raise(Errc::ParseFailure, "unexpected confusion header");
  ConfusionMatrix cm;
  for (std::size_t j = 2; j < table.header.size(); ++j) {
    const std::string& h = table.header[j];
    if (h.rfind("true_", 0) != 0)
      raise(Errc::ParseFailure, "unexpected confusion column: " + h);
    cm.classes.push_back(h.substr(5));
  }
  cm.counts.assign(cm.classes.size(), std::vector<std::size_t>(cm.classes.size(), 0));
  std::size_t seen = 0;
  for (const auto& row : table.rows) {
    if (row.size() != cm.classes.size() + 2)
      raise(Errc::ParseFailure, "ragged confusion row");
    if (row[0] != "counts") continue;
    auto it = std::find(cm.classes.begin(), cm.classes.end(), row[1]);
    if (it == cm.classes.end())
      raise(Errc::ParseFailure, "unknown predicted class: " + row[1]);
    std::size_t i = static_cast<std::size_t>(it - cm.classes.begin());
    for (std::size_t j = 0; j < cm.classes.size(); ++j)
      cm.counts[i][j] =
          static_cast<std::size_t>(csv::parse_int(row[j + 2], "confusion.csv"));
    seen++;
  }
  if (seen != cm.classes.size())
    raise(Errc::ParseFailure, "confusion counts block incomplete");
  return cm;
}

}  // namespace runnerdna
