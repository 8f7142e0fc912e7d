#pragma once

#include <algorithm>
#include <array>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "runnerdna/csv.hpp"
#include "runnerdna/error.hpp"
#include "runnerdna/eval.hpp"
#include "runnerdna/indicators.hpp"
#include "runnerdna/types.hpp"

namespace runnerdna {

inline std::size_t indicator_index(const std::string& name) {
  for (std::size_t k = 0; k < kIndicatorNames.size(); ++k)
    if (name == kIndicatorNames[k]) return k;
  raise(Errc::InvalidArgument, "unknown indicator: " + name);
}

struct TTestRow {
  std::string indicator;
  std::string group1;
  std::string group2;
  TTestResult result;
};

namespace detail {

inline std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline std::vector<double> normalized_column(const std::vector<DnaRow>& rows,
                                             std::size_t k,
                                             const std::string& label_filter,
                                             const std::string& sex_filter) {
  std::vector<double> out;
  for (const DnaRow& r : rows) {
    if (!label_filter.empty() && r.label != label_filter) continue;
    if (!sex_filter.empty() && r.sex != sex_filter) continue;
    out.push_back(r.normalized[k]);
  }
  return out;
}

}  // namespace detail

// Explicit two-sided significance tier; the report never prints stars.
inline std::string significance_tier(double p) {
  if (p < 0.01) return "p<0.01";
  if (p < 0.05) return "p<0.05";
  if (p < 0.10) return "p<0.10";
  return "n.s.";
}

// Pairwise activity comparisons of one normalized indicator, activity pairs
// in canonical activity order.
inline std::vector<TTestRow> activity_pair_ttests(const std::vector<DnaRow>& rows,
                                                  const std::string& indicator) {
  const std::size_t k = indicator_index(indicator);
  std::vector<TTestRow> out;
  for (std::size_t a = 0; a < kAllLabels.size(); ++a) {
    for (std::size_t b = a + 1; b < kAllLabels.size(); ++b) {
      auto g1 = detail::normalized_column(rows, k, label_name(kAllLabels[a]), "");
      auto g2 = detail::normalized_column(rows, k, label_name(kAllLabels[b]), "");
      if (g1.size() < 2 || g2.size() < 2) continue;
      TTestRow row;
      row.indicator = indicator;
      row.group1 = label_name(kAllLabels[a]);
      row.group2 = label_name(kAllLabels[b]);
      row.result = students_t(g1, g2);
      out.push_back(std::move(row));
    }
  }
  return out;
}

// Male-vs-female comparison of one normalized indicator, optionally within
// one activity.
inline TTestRow sex_ttest(const std::vector<DnaRow>& rows, const std::string& indicator,
                          const std::string& activity) {
  const std::size_t k = indicator_index(indicator);
  auto male = detail::normalized_column(rows, k, activity, "male");
  auto female = detail::normalized_column(rows, k, activity, "female");
  TTestRow row;
  row.indicator = indicator;
  row.group1 = "male";
  row.group2 = "female";
  row.result = students_t(male, female);
  return row;
}

inline std::string ttest_csv_header() {
  return "indicator,group1,group2,n1,mean1,sd1,n2,mean2,sd2,t,df,p,significance";
}

inline std::string ttest_csv(const std::vector<TTestRow>& rows) {
  std::string out = ttest_csv_header() + "\n";
  for (const TTestRow& r : rows) {
    const TTestResult& t = r.result;
    out += r.indicator + ',' + r.group1 + ',' + r.group2;
    out += ',' + std::to_string(t.group1.n);
    out += ',' + csv::format_double(t.group1.mean);
    out += ',' + csv::format_double(std::sqrt(t.group1.sample_variance));
    out += ',' + std::to_string(t.group2.n);
    out += ',' + csv::format_double(t.group2.mean);
    out += ',' + csv::format_double(std::sqrt(t.group2.sample_variance));
    out += ',' + csv::format_double(t.t);
    out += ',' + csv::format_double(t.df);
    out += ',' + csv::format_double(t.p);
    out += ',' + significance_tier(t.p);
    out += '\n';
  }
  return out;
}

namespace detail {

inline void append_confusion_section(std::string& out, const ConfusionMatrix& cm) {
  out += "Activity recognition, held-out predictions\n";
  out += "(rows: predicted class; columns: true class)\n\n";
  out += "counts:\n";
  auto cell = [](const std::string& s) {
    std::string c = s;
    while (c.size() < 12) c = ' ' + c;
    return c;
  };
  out += cell("");
  for (const auto& c : cm.classes) out += cell(c);
  out += '\n';
  for (std::size_t i = 0; i < cm.classes.size(); ++i) {
    out += cell(cm.classes[i]);
    for (std::size_t j = 0; j < cm.classes.size(); ++j)
      out += cell(std::to_string(cm.counts[i][j]));
    out += '\n';
  }
  out += "\ncolumn-normalized:\n";
  auto norm = cm.column_normalized();
  out += cell("");
  for (const auto& c : cm.classes) out += cell(c);
  out += '\n';
  for (std::size_t i = 0; i < cm.classes.size(); ++i) {
    out += cell(cm.classes[i]);
    for (std::size_t j = 0; j < cm.classes.size(); ++j)
      out += cell(fixed(norm[i][j], 3));
    out += '\n';
  }
  out += "\naccuracy: " + fixed(accuracy(cm), 3) + "\n";
  out += "kappa:    " + fixed(cohen_kappa(cm), 3) + "\n\n";
}

inline void append_summary_section(std::string& out, const std::vector<DnaRow>& rows) {
  out += "Normalized indicators by activity (mean, SD, n)\n\n";
  out += "indicator    activity     n     mean       sd\n";
  for (const char* indicator : kIndicatorNames) {
    const std::size_t k = indicator_index(indicator);
    for (ActivityLabel l : kAllLabels) {
      auto vals = normalized_column(rows, k, label_name(l), "");
      if (vals.size() < 2) continue;
      GroupSummary g = summarize_group(vals);
      char buf[160];
      std::snprintf(buf, sizeof buf, "%-12s %-10s %5zu %8.3f %8.3f\n", indicator,
                    label_name(l), g.n, g.mean, std::sqrt(g.sample_variance));
      out += buf;
    }
  }
  out += '\n';
}

inline void append_ttest_line(std::string& out, const TTestRow& r) {
  const TTestResult& t = r.result;
  char buf[240];
  std::snprintf(buf, sizeof buf,
                "%-12s %-10s (%6.3f +- %5.3f, n=%3zu) vs %-10s (%6.3f +- %5.3f, "
                "n=%3zu)  t=%8.3f  df=%3.0f  p=%.4f  %s\n",
                r.indicator.c_str(), r.group1.c_str(), t.group1.mean,
                std::sqrt(t.group1.sample_variance), t.group1.n, r.group2.c_str(),
                t.group2.mean, std::sqrt(t.group2.sample_variance), t.group2.n,
                t.t, t.df, t.p, significance_tier(t.p).c_str());
  out += buf;
}

}  // namespace detail

// Plaintext summary assembled purely from persisted tables: the confusion
// matrix (optional) plus the per-record DNA table.
inline std::string build_report(const std::vector<DnaRow>& dna_rows,
                                const ConfusionMatrix* confusion) {
  if (dna_rows.empty()) raise(Errc::EmptyData, "report needs at least one DNA row");
  std::string out = "RunnerDNA evaluation report\n";
  out += "===========================\n\n";

  if (confusion != nullptr) detail::append_confusion_section(out, *confusion);

  detail::append_summary_section(out, dna_rows);

  out += "Indicator differences between activities (pooled-variance t)\n\n";
  for (const char* indicator : kIndicatorNames)
    for (const TTestRow& r : activity_pair_ttests(dna_rows, indicator))
      detail::append_ttest_line(out, r);
  out += '\n';

  bool any_sex = false;
  std::string sex_section;
  for (const char* indicator : kIndicatorNames) {
    try {
      TTestRow r = sex_ttest(dna_rows, indicator, "running");
      detail::append_ttest_line(sex_section, r);
      any_sex = true;
    } catch (const Error&) {
      // fewer than two records of a sex among runners: section omitted
      break;
    }
  }
  if (any_sex) {
    out += "Indicator differences by sex, running records only\n\n";
    out += sex_section;
    out += '\n';
  }

  out += "significance tiers (two-sided): p<0.10, p<0.05, p<0.01; others n.s.\n";
  return out;
}

}  // namespace runnerdna
