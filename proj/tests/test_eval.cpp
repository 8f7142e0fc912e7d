#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "runnerdna/eval.hpp"
#include "runnerdna/rng.hpp"

using namespace runnerdna;
using Catch::Approx;

namespace {

ConfusionMatrix from_counts(std::vector<std::string> classes,
                            std::vector<std::vector<std::size_t>> counts) {
  ConfusionMatrix cm;
  cm.classes = std::move(classes);
  cm.counts = std::move(counts);
  return cm;
}

// Student t density for the numerical-integration oracle.
double t_density(double x, double df) {
  const double c = std::exp(std::lgamma((df + 1.0) / 2.0) -
                            std::lgamma(df / 2.0)) /
                   std::sqrt(df * std::acos(-1.0));
  return c * std::pow(1.0 + x * x / df, -(df + 1.0) / 2.0);
}

// Two-sided p via Simpson integration of the density over [-|t|, |t|].
double p_value_by_integration(double t, double df) {
  const double hi = std::fabs(t);
  const int steps = 20000;  // even
  const double h = 2.0 * hi / steps;
  double sum = t_density(-hi, df) + t_density(hi, df);
  for (int i = 1; i < steps; ++i) {
    const double x = -hi + h * i;
    sum += t_density(x, df) * ((i % 2) ? 4.0 : 2.0);
  }
  return 1.0 - sum * h / 3.0;
}

double oracle_pooled_t(const std::vector<double>& a, const std::vector<double>& b) {
  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  auto svar = [&](const std::vector<double>& v) {
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
  };
  const double n1 = static_cast<double>(a.size()), n2 = static_cast<double>(b.size());
  const double sp2 = ((n1 - 1.0) * svar(a) + (n2 - 1.0) * svar(b)) / (n1 + n2 - 2.0);
  return (mean(a) - mean(b)) / std::sqrt(sp2 * (1.0 / n1 + 1.0 / n2));
}

}  // namespace

TEST_CASE("confusion matrix counts predicted rows against true columns") {
  const std::vector<std::string> classes{"a", "b"};
  ConfusionMatrix cm = confusion_matrix({"a", "b", "a"}, {"a", "a", "b"}, classes);
  REQUIRE(cm.counts[0][0] == 1);  // true a, predicted a
  REQUIRE(cm.counts[0][1] == 1);  // true b, predicted a
  REQUIRE(cm.counts[1][0] == 1);  // true a, predicted b
  REQUIRE(cm.counts[1][1] == 0);
  REQUIRE(cm.total() == 3);
  REQUIRE(cm.column_total(0) == 2);
  REQUIRE(cm.row_total(0) == 2);
  REQUIRE(accuracy(cm) == Approx(1.0 / 3.0));

  REQUIRE_THROWS_AS(confusion_matrix({"a"}, {}, classes), Error);
  REQUIRE_THROWS_AS(confusion_matrix({"z"}, {"a"}, classes), Error);
}

TEST_CASE("column normalization yields exact binary fractions") {
  // One true class of 32 records split 20/7/2/3 across predictions.
  ConfusionMatrix cm = from_counts(
      {"w", "x", "y", "z"},
      {{20, 0, 0, 0}, {7, 5, 0, 0}, {2, 0, 6, 0}, {3, 0, 0, 4}});
  const auto norm = cm.column_normalized();
  REQUIRE(norm[0][0] == 0.625);
  REQUIRE(norm[1][0] == 0.21875);
  REQUIRE(norm[2][0] == 0.0625);
  REQUIRE(norm[3][0] == 0.09375);
  REQUIRE(norm[1][1] == 1.0);

  // empty true column stays zero
  ConfusionMatrix sparse = from_counts({"a", "b"}, {{3, 0}, {0, 0}});
  const auto sn = sparse.column_normalized();
  REQUIRE(sn[0][1] == 0.0);
  REQUIRE(sn[1][1] == 0.0);
}

TEST_CASE("accuracy is the weighted trace") {
  ConfusionMatrix cm = from_counts(
      {"a", "b", "c"}, {{50, 3, 1}, {2, 40, 4}, {1, 2, 30}});
  REQUIRE(accuracy(cm) == Approx(120.0 / 133.0));
  ConfusionMatrix empty = from_counts({"a"}, {{0}});
  REQUIRE_THROWS_AS(accuracy(empty), Error);
}

TEST_CASE("kappa hits hand values") {
  ConfusionMatrix diag = from_counts({"a", "b"}, {{5, 0}, {0, 7}});
  REQUIRE(cohen_kappa(diag) == Approx(1.0));
  REQUIRE(accuracy(diag) == Approx(1.0));

  ConfusionMatrix uniform =
      from_counts({"a", "b", "c", "d"},
                  {{5, 5, 5, 5}, {5, 5, 5, 5}, {5, 5, 5, 5}, {5, 5, 5, 5}});
  REQUIRE(accuracy(uniform) == Approx(0.25));
  REQUIRE(cohen_kappa(uniform) == Approx(0.0).margin(1e-15));

  // po = 0.8, pe = 0.5: kappa = 0.6
  ConfusionMatrix mixed = from_counts({"a", "b"}, {{40, 10}, {10, 40}});
  REQUIRE(cohen_kappa(mixed) == Approx(0.6));

  // all mass in one row/column: pe = 1, defined as 0
  ConfusionMatrix degenerate = from_counts({"a", "b"}, {{9, 0}, {0, 0}});
  REQUIRE(cohen_kappa(degenerate) == 0.0);
}

TEST_CASE("kappa of independent labelings is near zero") {
  Rng rng(1234);
  const std::vector<std::string> classes{"a", "b", "c"};
  std::vector<std::string> truth, pred;
  for (int i = 0; i < 10000; ++i) {
    truth.push_back(classes[rng.uniform_index(3)]);
    pred.push_back(classes[rng.uniform_index(3)]);
  }
  ConfusionMatrix cm = confusion_matrix(truth, pred, classes);
  REQUIRE_THAT(cohen_kappa(cm), Catch::Matchers::WithinAbs(0.0, 0.03));
  REQUIRE_THAT(accuracy(cm), Catch::Matchers::WithinAbs(1.0 / 3.0, 0.02));
}

TEST_CASE("accuracy and kappa ignore class ordering") {
  ConfusionMatrix cm = from_counts(
      {"a", "b", "c"}, {{12, 3, 0}, {1, 20, 2}, {0, 4, 9}});
  // reorder classes as c, a, b with rows/columns permuted to match
  ConfusionMatrix perm = from_counts(
      {"c", "a", "b"}, {{9, 0, 4}, {0, 12, 3}, {2, 1, 20}});
  REQUIRE(accuracy(cm) == Approx(accuracy(perm)));
  REQUIRE(cohen_kappa(cm) == Approx(cohen_kappa(perm)));
}

TEST_CASE("regularized incomplete beta matches closed forms") {
  REQUIRE(regularized_incomplete_beta(2.0, 3.0, 0.0) == 0.0);
  REQUIRE(regularized_incomplete_beta(2.0, 3.0, 1.0) == 1.0);
  for (double x : {0.1, 0.25, 0.5, 0.75, 0.9}) {
    REQUIRE(regularized_incomplete_beta(1.0, 1.0, x) == Approx(x).epsilon(1e-12));
    REQUIRE(regularized_incomplete_beta(0.5, 0.5, x) ==
            Approx(2.0 / std::acos(-1.0) * std::asin(std::sqrt(x))).epsilon(1e-10));
    // I_x(a,b) = 1 - I_{1-x}(b,a)
    REQUIRE(regularized_incomplete_beta(2.5, 4.0, x) ==
            Approx(1.0 - regularized_incomplete_beta(4.0, 2.5, 1.0 - x))
                .epsilon(1e-10));
  }
  // I_x(1,b) = 1 - (1-x)^b
  REQUIRE(regularized_incomplete_beta(1.0, 3.0, 0.3) ==
          Approx(1.0 - std::pow(0.7, 3.0)).epsilon(1e-12));
  REQUIRE_THROWS_AS(regularized_incomplete_beta(-1.0, 1.0, 0.5), Error);
  REQUIRE_THROWS_AS(regularized_incomplete_beta(1.0, 1.0, 1.5), Error);
}

TEST_CASE("two-sided p-values match classic table entries") {
  REQUIRE_THAT(t_p_value(2.228, 10.0), Catch::Matchers::WithinAbs(0.05, 0.001));
  REQUIRE_THAT(t_p_value(2.086, 20.0), Catch::Matchers::WithinAbs(0.05, 0.001));
  REQUIRE_THAT(t_p_value(2.845, 20.0), Catch::Matchers::WithinAbs(0.01, 0.001));
  REQUIRE_THAT(t_p_value(1.96, 1e6), Catch::Matchers::WithinAbs(0.05, 0.001));
  REQUIRE_THAT(t_p_value(2.576, 1e6), Catch::Matchers::WithinAbs(0.01, 0.001));
  REQUIRE(t_p_value(0.0, 5.0) == Approx(1.0));
}

TEST_CASE("p-values agree with direct density integration") {
  for (double df : {3.0, 8.0, 25.0, 120.0}) {
    for (double t : {0.5, 1.3, 2.2, 3.7}) {
      REQUIRE_THAT(t_p_value(t, df),
                   Catch::Matchers::WithinAbs(p_value_by_integration(t, df), 1e-6));
    }
  }
}

TEST_CASE("p-values are symmetric in t and monotone in |t|") {
  for (double df : {4.0, 30.0}) {
    REQUIRE(t_p_value(1.7, df) == Approx(t_p_value(-1.7, df)));
    double prev = 1.1;
    for (double t : {0.0, 0.5, 1.0, 2.0, 3.0, 5.0}) {
      const double p = t_p_value(t, df);
      REQUIRE(p < prev);
      prev = p;
    }
  }
  REQUIRE_THROWS_AS(t_p_value(1.0, 0.0), Error);
  REQUIRE_THROWS_AS(t_p_value(std::nan(""), 5.0), Error);
}

TEST_CASE("group summaries compute sample statistics") {
  GroupSummary g = summarize_group({2, 4, 4, 4, 5, 5, 7, 9});
  REQUIRE(g.n == 8);
  REQUIRE(g.mean == Approx(5.0));
  REQUIRE(g.sample_variance == Approx(32.0 / 7.0));
  REQUIRE_THROWS_AS(summarize_group({1.0}), Error);
  REQUIRE_THROWS_AS(summarize_group({1.0, std::nan("")}), Error);
}

TEST_CASE("pooled t-test matches an independent implementation") {
  Rng rng(777);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> a, b;
    const std::size_t n1 = 5 + rng.uniform_index(20);
    const std::size_t n2 = 5 + rng.uniform_index(20);
    for (std::size_t i = 0; i < n1; ++i) a.push_back(rng.normal(1.0, 2.0));
    for (std::size_t i = 0; i < n2; ++i) b.push_back(rng.normal(1.4, 2.0));
    const TTestResult res = students_t(a, b);
    REQUIRE(res.t == Approx(oracle_pooled_t(a, b)).epsilon(1e-12));
    REQUIRE(res.df == Approx(static_cast<double>(n1 + n2 - 2)));
    REQUIRE(res.p == Approx(t_p_value(res.t, res.df)));
    REQUIRE(res.group1.n == n1);
    REQUIRE(res.group2.n == n2);
  }
}

TEST_CASE("identical groups give t = 0 and p = 1") {
  const std::vector<double> g{1.0, 2.0, 3.0, 4.0};
  const TTestResult res = students_t(g, g);
  REQUIRE(res.t == 0.0);
  REQUIRE(res.p == Approx(1.0));

  // swapping groups flips the sign of t but not p
  const std::vector<double> h{2.0, 3.0, 4.0, 6.0};
  const TTestResult ab = students_t(g, h);
  const TTestResult ba = students_t(h, g);
  REQUIRE(ab.t == Approx(-ba.t));
  REQUIRE(ab.p == Approx(ba.p));
}

TEST_CASE("degenerate t-test inputs raise specific errors") {
  try {
    students_t(std::vector<double>{1.0}, std::vector<double>{2.0, 3.0});
    FAIL("expected TooFewSamples");
  } catch (const Error& e) {
    REQUIRE(e.code() == Errc::TooFewSamples);
  }
  try {
    students_t(std::vector<double>{3.0, 3.0, 3.0}, std::vector<double>{3.0, 3.0});
    FAIL("expected DegeneratePooledVariance");
  } catch (const Error& e) {
    REQUIRE(e.code() == Errc::DegeneratePooledVariance);
  }
}

TEST_CASE("confusion CSV round-trips counts and emits fractions") {
  ConfusionMatrix cm = from_counts(
      {"biking", "walking"}, {{20, 3}, {12, 45}});
  const std::string text = confusion_csv(cm);
  csv::Table table = csv::parse(text);
  REQUIRE(table.header ==
          std::vector<std::string>{"block", "predicted", "true_biking",
                                   "true_walking"});
  REQUIRE(table.rows.size() == 4);  // two counts rows, two fraction rows
  REQUIRE(table.rows[0][0] == "counts");
  REQUIRE(table.rows[2][0] == "column_fraction");
  REQUIRE(table.rows[2][2] == "0.625");  // 20 / 32

  ConfusionMatrix back = parse_confusion_csv(text);
  REQUIRE(back.classes == cm.classes);
  REQUIRE(back.counts == cm.counts);

  REQUIRE_THROWS_AS(parse_confusion_csv("nope,nope\n"), Error);
}
