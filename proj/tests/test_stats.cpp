#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "runnerdna/csv.hpp"
#include "runnerdna/rng.hpp"
#include "runnerdna/stats.hpp"

using namespace runnerdna;
using Catch::Approx;

TEST_CASE("mean and population variance on hand data") {
  std::vector<double> v{2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0};
  REQUIRE(stats::mean(v) == Approx(5.0));
  REQUIRE(stats::variance(v) == Approx(4.0));
  REQUIRE(stats::stddev(v) == Approx(2.0));
}

TEST_CASE("skewness and kurtosis against direct moment computation") {
  Rng rng(11);
  std::vector<double> v(500);
  for (auto& x : v) x = rng.normal(1.0, 2.0) + 0.3 * rng.uniform_unit();
  double m = stats::mean(v);
  double s2 = 0, s3 = 0, s4 = 0;
  for (double x : v) {
    double d = x - m;
    s2 += d * d;
    s3 += d * d * d;
    s4 += d * d * d * d;
  }
  double n = static_cast<double>(v.size());
  double sd = std::sqrt(s2 / n);
  REQUIRE(stats::skewness(v) == Approx((s3 / n) / (sd * sd * sd)).margin(1e-12));
  REQUIRE(stats::excess_kurtosis(v) ==
          Approx((s4 / n) / (sd * sd * sd * sd) - 3.0).margin(1e-12));
}

TEST_CASE("constant series has zero skewness and kurtosis by convention") {
  std::vector<double> v(40, 3.25);
  REQUIRE(stats::skewness(v) == 0.0);
  REQUIRE(stats::excess_kurtosis(v) == 0.0);
}

TEST_CASE("quantiles use linear interpolation between order statistics") {
  std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  REQUIRE(stats::quantile(v, 0.0) == Approx(1.0));
  REQUIRE(stats::quantile(v, 1.0) == Approx(4.0));
  REQUIRE(stats::quantile(v, 0.5) == Approx(2.5));
  REQUIRE(stats::quantile(v, 0.25) == Approx(1.75));
  REQUIRE(stats::median(std::vector<double>{5.0, 1.0, 3.0}) == Approx(3.0));
}

TEST_CASE("alternating-series autocorrelation matches the biased estimator") {
  // Numerator keeps n - lag terms while the variance keeps n, so lag 1 on
  // +1/-1/... gives exactly -(n-1)/n, not -1.
  std::vector<double> v;
  for (int i = 0; i < 100; ++i) v.push_back(i % 2 == 0 ? 1.0 : -1.0);
  REQUIRE(stats::autocorrelation(v, 1) == Approx(-99.0 / 100.0).margin(1e-12));
  REQUIRE(stats::autocorrelation(v, 2) == Approx(98.0 / 100.0).margin(1e-12));
}

TEST_CASE("autocorrelation of a constant series is zero by convention") {
  std::vector<double> v(50, 2.0);
  REQUIRE(stats::autocorrelation(v, 1) == 0.0);
}

TEST_CASE("index slope matches closed-form least squares") {
  std::vector<double> v;
  for (int i = 0; i < 30; ++i) v.push_back(0.75 * i + 2.0);
  REQUIRE(stats::index_slope(v) == Approx(0.75).margin(1e-12));
}

TEST_CASE("shortest round-trip double formatting") {
  for (double v : {0.1, 1.0 / 3.0, 30.887654, -11.309281, 1e-300, 6371000.0}) {
    std::string s = csv::format_double(v);
    REQUIRE(csv::parse_double(s, "test") == v);
  }
  Rng rng(99);
  for (int i = 0; i < 2000; ++i) {
    double v = std::ldexp(rng.uniform(-1.0, 1.0), static_cast<int>(rng.uniform_index(80)) - 40);
    REQUIRE(csv::parse_double(csv::format_double(v), "test") == v);
  }
}

TEST_CASE("csv parser splits fields and rejects garbage numerics") {
  csv::Table t = csv::parse("a,b,c\n1, 2 ,3\n4,5,6\n");
  REQUIRE(t.header == std::vector<std::string>{"a", "b", "c"});
  REQUIRE(t.rows.size() == 2);
  REQUIRE(csv::parse_double(t.rows[0][1], "test") == 2.0);
  REQUIRE_THROWS_AS(csv::parse_double("1.2.3", "test"), Error);
  REQUIRE_THROWS_AS(csv::parse_double("", "test"), Error);
  REQUIRE_THROWS_AS(csv::parse_double("nan", "test"), Error);
}

TEST_CASE("derived seeds differ per stream and reproduce") {
  REQUIRE(derive_seed(42, 0) != derive_seed(42, 1));
  REQUIRE(derive_seed(42, 0) != derive_seed(43, 0));
  REQUIRE(derive_seed(42, 7) == derive_seed(42, 7));
}

TEST_CASE("rng uniform_index is within bounds and covers all values") {
  Rng rng(5);
  std::vector<int> hits(7, 0);
  for (int i = 0; i < 7000; ++i) hits[rng.uniform_index(7)]++;
  for (int h : hits) REQUIRE(h > 800);
}

TEST_CASE("rng shuffle produces a permutation") {
  std::vector<std::size_t> v(100);
  std::iota(v.begin(), v.end(), std::size_t{0});
  Rng rng(3);
  rng.shuffle(std::span<std::size_t>(v));
  std::vector<std::size_t> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) REQUIRE(sorted[i] == i);
}

TEST_CASE("rng normal matches requested moments at scale") {
  Rng rng(17);
  std::vector<double> v(200000);
  for (auto& x : v) x = rng.normal(3.0, 2.0);
  REQUIRE(stats::mean(v) == Approx(3.0).margin(0.02));
  REQUIRE(stats::stddev(v) == Approx(2.0).margin(0.02));
}

TEST_CASE("identical seeds give identical streams") {
  Rng a(123), b(123);
  for (int i = 0; i < 100; ++i) REQUIRE(a.next_u64() == b.next_u64());
}
