#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "runnerdna/dataset.hpp"
#include "runnerdna/error.hpp"
#include "runnerdna/eval.hpp"
#include "runnerdna/features.hpp"
#include "runnerdna/forest.hpp"
#include "runnerdna/gps.hpp"
#include "runnerdna/indicators.hpp"
#include "runnerdna/rng.hpp"
#include "runnerdna/types.hpp"

namespace runnerdna {

enum class FeatureMode { Dna, DnaGps, Raw540 };
enum class SplitMode { Holdout, KFold, OobOnly };
enum class ModelKind { Activity, Identity };

inline const char* feature_mode_name(FeatureMode m) {
  switch (m) {
    case FeatureMode::Dna: return "dna";
    case FeatureMode::DnaGps: return "dna+gps";
    case FeatureMode::Raw540: return "raw540";
  }
  raise(Errc::InvalidArgument, "bad feature mode");
}

inline FeatureMode feature_mode_from_name(const std::string& name) {
  if (name == "dna") return FeatureMode::Dna;
  if (name == "dna+gps") return FeatureMode::DnaGps;
  if (name == "raw540") return FeatureMode::Raw540;
  raise(Errc::InvalidArgument,
        "features must be dna, dna+gps, or raw540, got '" + name + "'");
}

inline const char* split_mode_name(SplitMode m) {
  switch (m) {
    case SplitMode::Holdout: return "holdout";
    case SplitMode::KFold: return "kfold";
    case SplitMode::OobOnly: return "oob";
  }
  raise(Errc::InvalidArgument, "bad split mode");
}

inline SplitMode split_mode_from_name(const std::string& name) {
  if (name == "holdout") return SplitMode::Holdout;
  if (name == "kfold") return SplitMode::KFold;
  if (name == "oob") return SplitMode::OobOnly;
  raise(Errc::InvalidArgument,
        "split must be holdout, kfold, or oob, got '" + name + "'");
}

inline const char* model_kind_name(ModelKind m) {
  return m == ModelKind::Activity ? "activity" : "identity";
}

inline ModelKind model_kind_from_name(const std::string& name) {
  if (name == "activity") return ModelKind::Activity;
  if (name == "identity") return ModelKind::Identity;
  raise(Errc::InvalidArgument, "model must be activity or identity, got '" + name + "'");
}

struct PipelineConfig {
  std::string in_dir;
  std::string out_dir = ".";
  DnaParams dna;
  ForestParams forest;
  FeatureMode features = FeatureMode::DnaGps;
  SplitMode split = SplitMode::Holdout;
  int kfold_k = 5;
  double test_fraction = 0.2;
  std::uint64_t seed = 42;

  void validate() const {
    if (!in_dir.empty() && in_dir == out_dir)
      raise(Errc::InvalidArgument, "input and output directories must differ");
    if (kfold_k < 2) raise(Errc::InvalidArgument, "kfold_k must be >= 2");
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
      raise(Errc::InvalidArgument, "test_fraction must be in (0, 1)");
  }
};

inline void to_json(nlohmann::json& j, const PipelineConfig& c) {
  j = nlohmann::json{{"in", c.in_dir},
                     {"out", c.out_dir},
                     {"apen_m", c.dna.apen_m},
                     {"apen_r_factor", c.dna.apen_r_factor},
                     {"amplitude_source", amplitude_source_name(c.dna.amplitude_source)},
                     {"forest", c.forest},
                     {"features", feature_mode_name(c.features)},
                     {"split", split_mode_name(c.split)},
                     {"kfold_k", c.kfold_k},
                     {"test_fraction", c.test_fraction},
                     {"seed", c.seed}};
}

inline void from_json(const nlohmann::json& j, PipelineConfig& c) {
  c.in_dir = j.value("in", c.in_dir);
  c.out_dir = j.value("out", c.out_dir);
  c.dna.apen_m = j.value("apen_m", c.dna.apen_m);
  c.dna.apen_r_factor = j.value("apen_r_factor", c.dna.apen_r_factor);
  if (j.contains("amplitude_source"))
    c.dna.amplitude_source =
        amplitude_source_from_name(j.at("amplitude_source").get<std::string>());
  if (j.contains("forest")) j.at("forest").get_to(c.forest);
  if (j.contains("features"))
    c.features = feature_mode_from_name(j.at("features").get<std::string>());
  if (j.contains("split"))
    c.split = split_mode_from_name(j.at("split").get<std::string>());
  c.kfold_k = j.value("kfold_k", c.kfold_k);
  c.test_fraction = j.value("test_fraction", c.test_fraction);
  c.seed = j.value("seed", c.seed);
}

// One normalized DNA table for a whole cohort, in record order.
inline std::vector<DnaRow> compute_cohort_dna(const std::vector<ActivityRecord>& records,
                                              const DnaParams& params = {}) {
  if (records.empty()) raise(Errc::EmptyCohort, "no records to profile");
  std::vector<std::pair<std::string, RawDna>> raw;
  raw.reserve(records.size());
  for (const ActivityRecord& r : records)
    raw.emplace_back(r.record_id, compute_dna_raw(r, params));
  std::vector<RunnerDna> normalized = normalize_dna(raw);
  std::vector<DnaRow> rows;
  rows.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    DnaRow row;
    row.record_id = records[i].record_id;
    row.label = label_name(records[i].label);
    row.sex = sex_name(records[i].volunteer.sex);
    row.raw = normalized[i].raw;
    row.normalized = normalized[i].normalized;
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::vector<std::string> dna_feature_keys() {
  return {kIndicatorNames.begin(), kIndicatorNames.end()};
}

inline std::vector<std::string> dna_gps_feature_keys() {
  std::vector<std::string> keys = dna_feature_keys();
  keys.reserve(keys.size() + kKinematicFeatureNames.size());
  for (const char* name : kKinematicFeatureNames) keys.emplace_back(name);
  return keys;
}

// Feature matrix for one model family. Identity restricts to running records
// labeled by volunteer; activity keeps everything labeled by activity.
inline Dataset build_dataset(const std::vector<ActivityRecord>& records,
                             FeatureMode mode, ModelKind kind,
                             const DnaParams& params = {}) {
  std::vector<const ActivityRecord*> kept;
  for (const ActivityRecord& r : records) {
    if (kind == ModelKind::Identity && r.label != ActivityLabel::Running) continue;
    kept.push_back(&r);
  }
  if (kept.empty()) raise(Errc::EmptyData, "no records match the model kind");

  Dataset data;
  data.rows.reserve(kept.size());
  for (const ActivityRecord* r : kept) {
    data.labels.push_back(kind == ModelKind::Activity
                              ? std::string(label_name(r->label))
                              : r->volunteer.volunteer_id);
    data.row_ids.push_back(r->record_id);
  }

  if (mode == FeatureMode::Raw540) {
    data.feature_keys = feature_vector_keys();
    for (const ActivityRecord* r : kept)
      data.rows.push_back(extract_feature_vector(*r).values);
  } else {
    data.feature_keys = mode == FeatureMode::Dna ? dna_feature_keys()
                                                 : dna_gps_feature_keys();
    for (const ActivityRecord* r : kept) {
      const std::array<double, 5> dna = compute_dna_raw(*r, params).as_array();
      std::vector<double> row(dna.begin(), dna.end());
      if (mode == FeatureMode::DnaGps) {
        if (!r->gps.has_value() || r->gps->empty())
          raise(Errc::EmptyData, "record " + r->record_id + " has no GPS track");
        auto [series, feats] = track_kinematics(*r->gps);
        for (double v : kinematic_feature_array(feats)) row.push_back(v);
      }
      data.rows.push_back(std::move(row));
    }
  }
  data.validate();
  return data;
}

// Seeded stratified split; every class keeps at least one row on each side
// when it has two or more rows.
struct HoldoutSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

inline HoldoutSplit stratified_holdout(const std::vector<std::string>& labels,
                                       double test_fraction, std::uint64_t seed) {
  if (labels.empty()) raise(Errc::EmptyData, "cannot split empty label list");
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    raise(Errc::InvalidArgument, "test_fraction must be in (0, 1)");

  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < labels.size(); ++i) groups[labels[i]].push_back(i);

  HoldoutSplit split;
  std::uint64_t stream = 0;
  for (auto& [label, idx] : groups) {
    Rng rng(derive_seed(seed, stream++));
    rng.shuffle(std::span<std::size_t>(idx));
    std::size_t n_test = static_cast<std::size_t>(
        std::llround(test_fraction * static_cast<double>(idx.size())));
    if (idx.size() >= 2) {
      n_test = std::max<std::size_t>(n_test, 1);
      n_test = std::min(n_test, idx.size() - 1);
    } else {
      n_test = 0;  // singleton class stays in training
    }
    for (std::size_t k = 0; k < idx.size(); ++k)
      (k < n_test ? split.test : split.train).push_back(idx[k]);
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  if (split.test.empty()) raise(Errc::TooFewSamples, "holdout produced no test rows");
  return split;
}

// Stratified fold assignment, values in [0, k).
inline std::vector<int> kfold_assignment(const std::vector<std::string>& labels,
                                         int k, std::uint64_t seed) {
  if (k < 2) raise(Errc::InvalidArgument, "k must be >= 2");
  if (labels.size() < static_cast<std::size_t>(k))
    raise(Errc::KTooLarge, "more folds than rows");
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < labels.size(); ++i) groups[labels[i]].push_back(i);
  std::vector<int> fold(labels.size(), 0);
  std::uint64_t stream = 0;
  int next = 0;
  for (auto& [label, idx] : groups) {
    Rng rng(derive_seed(seed, stream++));
    rng.shuffle(std::span<std::size_t>(idx));
    for (std::size_t j = 0; j < idx.size(); ++j) {
      fold[idx[j]] = next;
      next = (next + 1) % k;
    }
  }
  return fold;
}

struct EvalReport {
  std::string model;
  std::string features;
  std::string split;
  std::uint64_t seed = 0;
  std::size_t n_rows = 0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  double training_accuracy = 0.0;
  double oob_err = 0.0;
  double holdout_accuracy = 0.0;  // fold-pooled under kfold, OOB-vote under oob
  double holdout_kappa = 0.0;
  ConfusionMatrix confusion;
};

inline void to_json(nlohmann::json& j, const EvalReport& r) {
  j = nlohmann::json{{"model", r.model},
                     {"features", r.features},
                     {"split", r.split},
                     {"seed", r.seed},
                     {"n_rows", r.n_rows},
                     {"n_train", r.n_train},
                     {"n_test", r.n_test},
                     {"training_accuracy", r.training_accuracy},
                     {"oob_error", r.oob_err},
                     {"holdout_accuracy", r.holdout_accuracy},
                     {"holdout_kappa", r.holdout_kappa}};
}

namespace detail {

inline std::vector<std::string> class_list(const std::vector<std::string>& labels) {
  std::vector<std::string> classes = labels;
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  return classes;
}

// Activity confusion tables follow the fixed biking/ebike/walking/running
// order; identity tables sort volunteer ids.
inline std::vector<std::string> report_classes(ModelKind kind,
                                               const std::vector<std::string>& labels) {
  if (kind == ModelKind::Identity) return class_list(labels);
  std::vector<std::string> classes;
  for (ActivityLabel l : kAllLabels) {
    const char* name = label_name(l);
    if (std::find(labels.begin(), labels.end(), name) != labels.end())
      classes.push_back(name);
  }
  return classes;
}

inline std::vector<std::string> predicted_labels(const Forest& forest,
                                                 const Dataset& data) {
  std::vector<std::string> preds;
  preds.reserve(data.size());
  for (const Prediction& p : predict(forest, data)) preds.push_back(p.label);
  return preds;
}

// OOB majority-vote labels over the training set; rows with no OOB tree are
// dropped from both outputs.
inline std::pair<std::vector<std::string>, std::vector<std::string>>
oob_vote_labels(const Forest& forest, const Dataset& data) {
  auto oob = oob_rows_per_tree(forest);
  std::vector<std::vector<std::size_t>> votes(
      data.size(), std::vector<std::size_t>(forest.classes.size(), 0));
  std::vector<char> voted(data.size(), 0);
  for (std::size_t t = 0; t < forest.trees.size(); ++t)
    for (std::uint32_t r : oob[t]) {
      votes[r][static_cast<std::size_t>(forest.trees[t].leaf_vote(data.rows[r]))]++;
      voted[r] = 1;
    }
  std::vector<std::string> truth, preds;
  for (std::size_t r = 0; r < data.size(); ++r) {
    if (!voted[r]) continue;
    std::size_t best = 0;
    for (std::size_t c = 1; c < votes[r].size(); ++c)
      if (votes[r][c] > votes[r][best]) best = c;
    truth.push_back(data.labels[r]);
    preds.push_back(forest.classes[best]);
  }
  return {truth, preds};
}

}  // namespace detail

// Trains and scores one model family on one feature set. Under holdout the
// confusion matrix covers the held-out rows; under kfold it pools all fold
// predictions; under oob it uses OOB majority votes on the full set.
inline EvalReport evaluate_records(const std::vector<ActivityRecord>& records,
                                   const PipelineConfig& config, ModelKind kind) {
  Dataset data = build_dataset(records, config.features, kind, config.dna);
  const std::vector<std::string> classes = detail::report_classes(kind, data.labels);

  EvalReport report;
  report.model = model_kind_name(kind);
  report.features = feature_mode_name(config.features);
  report.split = split_mode_name(config.split);
  report.seed = config.seed;
  report.n_rows = data.size();

  ForestParams fp = config.forest;
  fp.seed = config.seed;

  if (config.split == SplitMode::Holdout) {
    HoldoutSplit split =
        stratified_holdout(data.labels, config.test_fraction,
                           derive_seed(config.seed, 0x5151));
    Dataset train = data.subset(split.train);
    Dataset test = data.subset(split.test);
    Forest forest = train_forest(train, fp);
    report.n_train = train.size();
    report.n_test = test.size();
    report.training_accuracy =
        accuracy(confusion_matrix(train.labels,
                                  detail::predicted_labels(forest, train), classes));
    report.oob_err = oob_error(forest, train);
    report.confusion = confusion_matrix(test.labels,
                                        detail::predicted_labels(forest, test),
                                        classes);
  } else if (config.split == SplitMode::KFold) {
    std::vector<int> fold =
        kfold_assignment(data.labels, config.kfold_k, derive_seed(config.seed, 0x5151));
    std::vector<std::string> truth, preds;
    for (int f = 0; f < config.kfold_k; ++f) {
      std::vector<std::size_t> train_idx, test_idx;
      for (std::size_t i = 0; i < data.size(); ++i)
        (fold[i] == f ? test_idx : train_idx).push_back(i);
      if (test_idx.empty()) continue;
      Dataset train = data.subset(train_idx);
      Dataset test = data.subset(test_idx);
      ForestParams fold_params = fp;
      fold_params.seed = derive_seed(config.seed, static_cast<std::uint64_t>(f));
      Forest forest = train_forest(train, fold_params);
      for (const std::string& t : test.labels) truth.push_back(t);
      for (const std::string& p : detail::predicted_labels(forest, test))
        preds.push_back(p);
    }
    Forest full = train_forest(data, fp);
    report.n_train = data.size();
    report.n_test = truth.size();
    report.training_accuracy = accuracy(
        confusion_matrix(data.labels, detail::predicted_labels(full, data), classes));
    report.oob_err = oob_error(full, data);
    report.confusion = confusion_matrix(truth, preds, classes);
  } else {
    Forest forest = train_forest(data, fp);
    report.n_train = data.size();
    report.training_accuracy = accuracy(
        confusion_matrix(data.labels, detail::predicted_labels(forest, data), classes));
    report.oob_err = oob_error(forest, data);
    auto [truth, preds] = detail::oob_vote_labels(forest, data);
    report.n_test = truth.size();
    report.confusion = confusion_matrix(truth, preds, classes);
  }

  report.holdout_accuracy = accuracy(report.confusion);
  report.holdout_kappa = cohen_kappa(report.confusion);
  return report;
}

inline std::string eval_report_text(const EvalReport& r) {
  std::string out;
  out += "model:             " + r.model + "\n";
  out += "features:          " + r.features + "\n";
  out += "split:             " + r.split + "\n";
  out += "seed:              " + std::to_string(r.seed) + "\n";
  out += "rows:              " + std::to_string(r.n_rows) + "\n";
  out += "train rows:        " + std::to_string(r.n_train) + "\n";
  out += "scored rows:       " + std::to_string(r.n_test) + "\n";
  out += "training accuracy: " + csv::format_double(r.training_accuracy) + "\n";
  out += "oob error:         " + csv::format_double(r.oob_err) + "\n";
  out += "held-out accuracy: " + csv::format_double(r.holdout_accuracy) + "\n";
  out += "held-out kappa:    " + csv::format_double(r.holdout_kappa) + "\n";
  return out;
}

}  // namespace runnerdna
