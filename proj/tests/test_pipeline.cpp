#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <catch2/catch_amalgamated.hpp>
#include <nlohmann/json.hpp>

#include "runnerdna/pipeline.hpp"
#include "runnerdna/synth.hpp"

using namespace runnerdna;
using Catch::Approx;

namespace {

std::vector<ActivityRecord> small_cohort(std::uint64_t seed = 11) {
  CohortSpec spec;
  spec.counts = {3, 3, 3, 6};
  spec.n_volunteers = 3;
  spec.n_runners = 2;
  spec.duration_s = 60;
  return generate_cohort(spec, seed);
}

}  // namespace

TEST_CASE("mode names round-trip") {
  for (FeatureMode m : {FeatureMode::Dna, FeatureMode::DnaGps, FeatureMode::Raw540})
    REQUIRE(feature_mode_from_name(feature_mode_name(m)) == m);
  for (SplitMode m : {SplitMode::Holdout, SplitMode::KFold, SplitMode::OobOnly})
    REQUIRE(split_mode_from_name(split_mode_name(m)) == m);
  for (ModelKind m : {ModelKind::Activity, ModelKind::Identity})
    REQUIRE(model_kind_from_name(model_kind_name(m)) == m);
  REQUIRE_THROWS_AS(feature_mode_from_name("bogus"), Error);
  REQUIRE_THROWS_AS(split_mode_from_name("bogus"), Error);
  REQUIRE_THROWS_AS(model_kind_from_name("bogus"), Error);
}

TEST_CASE("pipeline config serializes and restores every field") {
  PipelineConfig c;
  c.in_dir = "data";
  c.out_dir = "out";
  c.dna.apen_m = 3;
  c.dna.apen_r_factor = 0.25;
  c.dna.amplitude_source = AmplitudeSource::LinearAcceleration;
  c.forest.n_trees = 99;
  c.forest.max_depth = 7;
  c.forest.min_samples_leaf = 2;
  c.forest.features_per_split = 4;
  c.features = FeatureMode::Raw540;
  c.split = SplitMode::KFold;
  c.kfold_k = 7;
  c.test_fraction = 0.3;
  c.seed = 321;

  nlohmann::json j = c;
  PipelineConfig back = j.get<PipelineConfig>();
  REQUIRE(back.in_dir == c.in_dir);
  REQUIRE(back.out_dir == c.out_dir);
  REQUIRE(back.dna.apen_m == 3);
  REQUIRE(back.dna.apen_r_factor == 0.25);
  REQUIRE(back.dna.amplitude_source == AmplitudeSource::LinearAcceleration);
  REQUIRE(back.forest.n_trees == 99);
  REQUIRE(back.forest.max_depth == 7);
  REQUIRE(back.features == FeatureMode::Raw540);
  REQUIRE(back.split == SplitMode::KFold);
  REQUIRE(back.kfold_k == 7);
  REQUIRE(back.test_fraction == 0.3);
  REQUIRE(back.seed == 321);

  // absent keys keep defaults
  PipelineConfig partial =
      nlohmann::json::parse(R"({"seed": 9})").get<PipelineConfig>();
  REQUIRE(partial.seed == 9);
  REQUIRE(partial.features == FeatureMode::DnaGps);
  REQUIRE(partial.kfold_k == 5);

  PipelineConfig bad;
  bad.kfold_k = 1;
  REQUIRE_THROWS_AS(bad.validate(), Error);
  bad = PipelineConfig{};
  bad.test_fraction = 1.0;
  REQUIRE_THROWS_AS(bad.validate(), Error);
  bad = PipelineConfig{};
  bad.in_dir = bad.out_dir = "same";
  REQUIRE_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("cohort indicator table keeps record order and normalized range") {
  const auto records = small_cohort();
  const auto rows = compute_cohort_dna(records);
  REQUIRE(rows.size() == records.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    REQUIRE(rows[i].record_id == records[i].record_id);
    REQUIRE(rows[i].label == label_name(records[i].label));
    for (double v : rows[i].normalized) {
      REQUIRE(v >= 0.0);
      REQUIRE(v <= 5.0);
    }
  }
  // min-max scaling pins each indicator's extremes to 0 and 5
  for (std::size_t k = 0; k < 5; ++k) {
    double lo = 1e9, hi = -1e9;
    for (const auto& row : rows) {
      lo = std::min(lo, row.normalized[k]);
      hi = std::max(hi, row.normalized[k]);
    }
    REQUIRE(lo == Approx(0.0));
    REQUIRE(hi == Approx(5.0));
  }
  REQUIRE_THROWS_AS(compute_cohort_dna({}), Error);
}

TEST_CASE("feature key lists match their modes") {
  REQUIRE(dna_feature_keys() ==
          std::vector<std::string>{"balance", "stride", "steer", "stability",
                                   "amplitude"});
  const auto gps_keys = dna_gps_feature_keys();
  REQUIRE(gps_keys.size() == 10);
  REQUIRE(gps_keys[5] == "mean_velocity");
  REQUIRE(gps_keys.back() == "max_abs_accel");
}

TEST_CASE("datasets take their shape from the feature mode") {
  const auto records = small_cohort();

  Dataset dna = build_dataset(records, FeatureMode::Dna, ModelKind::Activity);
  REQUIRE(dna.feature_keys.size() == 5);
  REQUIRE(dna.size() == records.size());
  REQUIRE(std::set<std::string>(dna.labels.begin(), dna.labels.end()) ==
          std::set<std::string>{"biking", "ebike", "walking", "running"});

  Dataset gps = build_dataset(records, FeatureMode::DnaGps, ModelKind::Activity);
  REQUIRE(gps.feature_keys.size() == 10);
  for (const auto& row : gps.rows) REQUIRE(row.size() == 10);
  // the first five columns are the raw indicators, identical across modes
  for (std::size_t i = 0; i < dna.size(); ++i)
    for (std::size_t k = 0; k < 5; ++k) REQUIRE(gps.rows[i][k] == dna.rows[i][k]);

  Dataset raw = build_dataset(records, FeatureMode::Raw540, ModelKind::Activity);
  REQUIRE(raw.feature_keys.size() == 540);
  for (const auto& row : raw.rows) REQUIRE(row.size() == 540);

  Dataset ident = build_dataset(records, FeatureMode::Dna, ModelKind::Identity);
  REQUIRE(ident.size() == 6);  // running records only
  const std::set<std::string> vols(ident.labels.begin(), ident.labels.end());
  REQUIRE(vols.size() == 2);  // two runners
  for (const auto& id : ident.row_ids) {
    const auto rec = std::find_if(records.begin(), records.end(),
                                  [&](const ActivityRecord& r) {
                                    return r.record_id == id;
                                  });
    REQUIRE(rec != records.end());
    REQUIRE(rec->label == ActivityLabel::Running);
  }
}

TEST_CASE("stratified holdout balances classes deterministically") {
  std::vector<std::string> labels;
  for (int i = 0; i < 10; ++i) labels.push_back("a");
  for (int i = 0; i < 10; ++i) labels.push_back("b");

  HoldoutSplit split = stratified_holdout(labels, 0.2, 5);
  REQUIRE(split.test.size() == 4);
  REQUIRE(split.train.size() == 16);
  std::map<std::string, int> test_counts;
  for (std::size_t i : split.test) test_counts[labels[i]]++;
  REQUIRE(test_counts["a"] == 2);
  REQUIRE(test_counts["b"] == 2);

  // partition: no overlap, full coverage
  std::set<std::size_t> seen(split.train.begin(), split.train.end());
  for (std::size_t i : split.test) REQUIRE(seen.insert(i).second);
  REQUIRE(seen.size() == labels.size());

  HoldoutSplit again = stratified_holdout(labels, 0.2, 5);
  REQUIRE(again.test == split.test);
  REQUIRE(again.train == split.train);
  HoldoutSplit other = stratified_holdout(labels, 0.2, 6);
  REQUIRE(other.test != split.test);
}

TEST_CASE("holdout keeps singletons in training and splits tiny classes") {
  std::vector<std::string> labels{"solo", "duo", "duo", "trio", "trio", "trio"};
  HoldoutSplit split = stratified_holdout(labels, 0.5, 3);
  std::map<std::string, int> train_counts, test_counts;
  for (std::size_t i : split.train) train_counts[labels[i]]++;
  for (std::size_t i : split.test) test_counts[labels[i]]++;
  REQUIRE(train_counts["solo"] == 1);
  REQUIRE(test_counts["solo"] == 0);
  REQUIRE(train_counts["duo"] == 1);
  REQUIRE(test_counts["duo"] == 1);
  REQUIRE(train_counts["trio"] >= 1);
  REQUIRE(test_counts["trio"] >= 1);

  REQUIRE_THROWS_AS(stratified_holdout({}, 0.2, 1), Error);
  REQUIRE_THROWS_AS(stratified_holdout(labels, 0.0, 1), Error);
}

TEST_CASE("kfold assignment is a stratified cover of all rows") {
  std::vector<std::string> labels;
  for (int i = 0; i < 9; ++i) labels.push_back("a");
  for (int i = 0; i < 6; ++i) labels.push_back("b");
  const auto fold = kfold_assignment(labels, 3, 7);
  REQUIRE(fold.size() == labels.size());
  std::map<int, int> a_counts, b_counts;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    REQUIRE(fold[i] >= 0);
    REQUIRE(fold[i] < 3);
    (labels[i] == "a" ? a_counts : b_counts)[fold[i]]++;
  }
  for (int f = 0; f < 3; ++f) {
    REQUIRE(a_counts[f] == 3);  // 9 rows round-robin over 3 folds
    REQUIRE(b_counts[f] == 2);
  }
  REQUIRE(kfold_assignment(labels, 3, 7) == fold);

  REQUIRE_THROWS_AS(kfold_assignment(labels, 1, 7), Error);
  try {
    kfold_assignment({"a", "b"}, 3, 7);
    FAIL("expected KTooLarge");
  } catch (const Error& e) {
    REQUIRE(e.code() == Errc::KTooLarge);
  }
}

TEST_CASE("holdout evaluation fills a consistent report") {
  const auto records = small_cohort(21);
  PipelineConfig config;
  config.features = FeatureMode::Dna;
  config.split = SplitMode::Holdout;
  config.forest.n_trees = 40;
  config.seed = 7;

  const EvalReport report = evaluate_records(records, config, ModelKind::Activity);
  REQUIRE(report.model == "activity");
  REQUIRE(report.features == "dna");
  REQUIRE(report.split == "holdout");
  REQUIRE(report.n_rows == records.size());
  REQUIRE(report.n_train + report.n_test == report.n_rows);
  REQUIRE(report.confusion.total() == report.n_test);
  REQUIRE(report.confusion.classes ==
          std::vector<std::string>{"biking", "ebike", "walking", "running"});
  REQUIRE(report.holdout_accuracy == Approx(accuracy(report.confusion)));
  REQUIRE(report.holdout_kappa == Approx(cohen_kappa(report.confusion)));
  REQUIRE(report.training_accuracy >= 0.0);
  REQUIRE(report.training_accuracy <= 1.0);
  REQUIRE(report.oob_err >= 0.0);
  REQUIRE(report.oob_err <= 1.0);

  // same config, same report
  const EvalReport again = evaluate_records(records, config, ModelKind::Activity);
  REQUIRE(again.holdout_accuracy == report.holdout_accuracy);
  REQUIRE(again.confusion.counts == report.confusion.counts);

  const std::string text = eval_report_text(report);
  REQUIRE(text.find("model:             activity") != std::string::npos);
  REQUIRE(text.find("held-out accuracy:") != std::string::npos);

  nlohmann::json j = report;
  REQUIRE(j.at("model") == "activity");
  REQUIRE(j.at("n_rows") == records.size());
  REQUIRE(j.at("oob_error").get<double>() == Approx(report.oob_err));
}

TEST_CASE("kfold evaluation pools every row exactly once") {
  const auto records = small_cohort(22);
  PipelineConfig config;
  config.features = FeatureMode::Dna;
  config.split = SplitMode::KFold;
  config.kfold_k = 3;
  config.forest.n_trees = 30;
  config.seed = 8;

  const EvalReport report = evaluate_records(records, config, ModelKind::Activity);
  REQUIRE(report.split == "kfold");
  REQUIRE(report.n_test == records.size());
  REQUIRE(report.confusion.total() == records.size());
}

TEST_CASE("oob evaluation scores rows by out-of-bag majority vote") {
  const auto records = small_cohort(23);
  PipelineConfig config;
  config.features = FeatureMode::Dna;
  config.split = SplitMode::OobOnly;
  config.forest.n_trees = 50;
  config.seed = 9;

  const EvalReport report = evaluate_records(records, config, ModelKind::Activity);
  REQUIRE(report.split == "oob");
  REQUIRE(report.n_test <= report.n_rows);
  REQUIRE(report.n_test > 0);
  REQUIRE(report.confusion.total() == report.n_test);
  // with 50 trees every row is OOB for some tree with near certainty
  REQUIRE(report.n_test == report.n_rows);
}

TEST_CASE("identity models see only running records labeled by volunteer") {
  const auto records = small_cohort(24);
  PipelineConfig config;
  config.features = FeatureMode::Dna;
  config.split = SplitMode::OobOnly;
  config.forest.n_trees = 40;
  config.seed = 10;

  const EvalReport report = evaluate_records(records, config, ModelKind::Identity);
  REQUIRE(report.model == "identity");
  REQUIRE(report.n_rows == 6);
  for (const std::string& c : report.confusion.classes)
    REQUIRE(c.front() == 'v');
  REQUIRE(std::is_sorted(report.confusion.classes.begin(),
                         report.confusion.classes.end()));
}

TEST_CASE("a default-shaped cohort meets the separability contracts") {
  const auto records = generate_cohort(CohortSpec::paper_shape(), 42);

  // activity recognition from the 540 raw statistics: near-perfect
  PipelineConfig activity;
  activity.features = FeatureMode::Raw540;
  activity.split = SplitMode::OobOnly;
  activity.seed = 42;
  const EvalReport act = evaluate_records(records, activity, ModelKind::Activity);
  REQUIRE(act.oob_err <= 0.10);

  // runner identification from indicators + kinematics: clearly above the
  // 1-in-20 chance rate but measurably below perfect
  PipelineConfig identity;
  identity.features = FeatureMode::DnaGps;
  identity.split = SplitMode::OobOnly;
  identity.seed = 42;
  const EvalReport ident = evaluate_records(records, identity, ModelKind::Identity);
  REQUIRE(ident.confusion.classes.size() == 20);
  const double ident_accuracy = 1.0 - ident.oob_err;
  REQUIRE(ident_accuracy > 0.05);
  REQUIRE(ident_accuracy < 1.0);
  REQUIRE(ident.holdout_kappa > 0.0);
}
