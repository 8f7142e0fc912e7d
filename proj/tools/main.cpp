#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "runnerdna/runnerdna.hpp"

namespace fs = std::filesystem;
namespace rd = runnerdna;

namespace {

void ensure_parent_dir(const std::string& path) {
  fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

void write_output(const std::string& path, const std::string& text) {
  ensure_parent_dir(path);
  rd::csv::write_file(path, text);
}

rd::PipelineConfig load_config(int argc, char** argv) {
  rd::PipelineConfig cfg;
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--config") {
      nlohmann::json j = nlohmann::json::parse(rd::csv::read_file(argv[i + 1]),
                                               nullptr, false);
      if (j.is_discarded())
        rd::raise(rd::Errc::ParseFailure, "config file is not valid JSON");
      j.get_to(cfg);
      break;
    }
  }
  return cfg;
}

std::vector<rd::ActivityRecord> load_dir(const std::string& in_dir) {
  return rd::load_records(in_dir, rd::AlignPolicy::MeanPerSecond);
}

void add_forest_flags(CLI::App* cmd, rd::ForestParams& fp) {
  cmd->add_option("--trees", fp.n_trees, "number of trees");
  cmd->add_option("--max-depth", fp.max_depth, "maximum tree depth, 0 = unlimited");
  cmd->add_option("--min-leaf", fp.min_samples_leaf, "minimum samples per leaf");
  cmd->add_option("--mtry", fp.features_per_split,
                  "features tried per split, 0 = ceil(sqrt(d))");
}

void add_dna_flags(CLI::App* cmd, rd::DnaParams& dna, std::string& amplitude_source) {
  cmd->add_option("--apen-m", dna.apen_m, "ApEn embedding dimension");
  cmd->add_option("--apen-r-factor", dna.apen_r_factor,
                  "ApEn tolerance as a fraction of the series SD");
  cmd->add_option("--amplitude-source", amplitude_source,
                  "accelerometer or linear_acceleration");
}

std::string infer_model_kind(const rd::Forest& forest) {
  for (const std::string& c : forest.classes) {
    bool is_activity = false;
    for (rd::ActivityLabel l : rd::kAllLabels)
      if (c == rd::label_name(l)) is_activity = true;
    if (!is_activity) return "identity";
  }
  return "activity";
}

rd::FeatureMode infer_feature_mode(const rd::Forest& forest) {
  if (forest.feature_keys == rd::dna_feature_keys()) return rd::FeatureMode::Dna;
  if (forest.feature_keys == rd::dna_gps_feature_keys()) return rd::FeatureMode::DnaGps;
  if (forest.feature_keys == rd::feature_vector_keys()) return rd::FeatureMode::Raw540;
  rd::raise(rd::Errc::KeyMismatch, "model feature keys match no known feature set");
}

int run(int argc, char** argv) {
  rd::PipelineConfig cfg = load_config(argc, argv);

  CLI::App app{"RunnerDNA toolkit: sensor logs to movement indicators and models"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "JSON config with defaults for all flags");

  // synth ---------------------------------------------------------------
  auto* synth = app.add_subcommand("synth", "generate a synthetic cohort");
  std::string synth_out = cfg.out_dir;
  std::uint64_t synth_seed = cfg.seed;
  bool paper_shape = false;
  rd::CohortSpec spec;
  spec.counts = {8, 8, 8, 16};
  spec.n_volunteers = 6;
  spec.n_runners = 4;
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--seed", synth_seed, "cohort seed");
  synth->add_flag("--paper-shape", paper_shape,
                  "counts 32/55/45/139, 33 volunteers, 20 runners");
  synth->add_option("--biking", spec.counts[0], "biking record count");
  synth->add_option("--ebike", spec.counts[1], "ebike record count");
  synth->add_option("--walking", spec.counts[2], "walking record count");
  synth->add_option("--running", spec.counts[3], "running record count");
  synth->add_option("--volunteers", spec.n_volunteers, "volunteer count");
  synth->add_option("--runners", spec.n_runners, "runner subset size");
  synth->add_option("--duration", spec.duration_s, "seconds per record");
  synth->callback([&] {
    if (paper_shape) {
      int duration = spec.duration_s;
      spec = rd::CohortSpec::paper_shape();
      spec.duration_s = duration;
    }
    auto records = rd::generate_cohort(spec, synth_seed);
    fs::create_directories(synth_out);
    for (const auto& r : records) rd::write_record_files(synth_out, r);
    std::cout << "wrote " << records.size() << " records to " << synth_out << "\n";
  });

  // ingest ----------------------------------------------------------------
  auto* ingest = app.add_subcommand("ingest", "validate, align, and rewrite records");
  std::string ingest_in = cfg.in_dir, ingest_out = cfg.out_dir;
  std::string align_name = "mean";
  ingest->add_option("--in", ingest_in, "input directory")->required();
  ingest->add_option("--out", ingest_out, "output directory")->required();
  ingest->add_option("--align", align_name, "per-second collapse: mean or first");
  ingest->callback([&] {
    rd::AlignPolicy policy;
    if (align_name == "mean")
      policy = rd::AlignPolicy::MeanPerSecond;
    else if (align_name == "first")
      policy = rd::AlignPolicy::FirstPerSecond;
    else
      rd::raise(rd::Errc::InvalidArgument, "--align must be mean or first");
    auto records = rd::load_records(ingest_in, policy);
    fs::create_directories(ingest_out);
    for (const auto& r : records) rd::write_record_files(ingest_out, r);
    std::cout << "ingested " << records.size() << " records into " << ingest_out
              << "\n";
  });

  // features ---------------------------------------------------------------
  auto* features = app.add_subcommand("features", "extract per-series summary features");
  std::string feat_in = cfg.in_dir, feat_out = "features.csv", kin_out;
  features->add_option("--in", feat_in, "input directory")->required();
  features->add_option("--out", feat_out, "features CSV path");
  features->add_option("--kinematics", kin_out, "also write GPS kinematics CSV");
  features->callback([&] {
    auto records = load_dir(feat_in);
    std::vector<rd::FeatureVector> vectors;
    vectors.reserve(records.size());
    for (const auto& r : records) vectors.push_back(rd::extract_feature_vector(r));
    write_output(feat_out, rd::write_feature_csv(vectors));
    std::cout << "wrote " << vectors.size() << " feature rows to " << feat_out << "\n";
    if (!kin_out.empty()) {
      std::string out = "record_id,label,volunteer_id";
      for (const char* name : rd::kKinematicFeatureNames)
        out += std::string(",") + name;
      out += "\n";
      std::size_t n = 0;
      for (const auto& r : records) {
        if (!r.gps.has_value() || r.gps->size() < 3) continue;
        auto [series, kf] = rd::track_kinematics(*r.gps);
        out += r.record_id + "," + rd::label_name(r.label) + "," +
               r.volunteer.volunteer_id;
        for (double v : rd::kinematic_feature_array(kf))
          out += "," + rd::csv::format_double(v);
        out += "\n";
        n++;
      }
      write_output(kin_out, out);
      std::cout << "wrote " << n << " kinematic rows to " << kin_out << "\n";
    }
  });

  // dna ---------------------------------------------------------------------
  auto* dna = app.add_subcommand("dna", "compute the five movement indicators");
  std::string dna_in = cfg.in_dir, dna_out = "dna.csv";
  rd::DnaParams dna_params = cfg.dna;
  std::string amplitude_source = rd::amplitude_source_name(cfg.dna.amplitude_source);
  dna->add_option("--in", dna_in, "input directory")->required();
  dna->add_option("--out", dna_out, "DNA CSV path");
  add_dna_flags(dna, dna_params, amplitude_source);
  dna->callback([&] {
    dna_params.amplitude_source = rd::amplitude_source_from_name(amplitude_source);
    auto records = load_dir(dna_in);
    auto rows = rd::compute_cohort_dna(records, dna_params);
    write_output(dna_out, rd::write_dna_csv(rows));
    std::cout << "wrote " << rows.size() << " DNA rows to " << dna_out << "\n";
  });

  // train ---------------------------------------------------------------------
  auto* train = app.add_subcommand("train", "train a random forest");
  std::string train_in = cfg.in_dir, model_out = "model.json";
  std::string train_model = "activity";
  std::string train_features = rd::feature_mode_name(cfg.features);
  std::uint64_t train_seed = cfg.seed;
  rd::ForestParams train_fp = cfg.forest;
  rd::DnaParams train_dna = cfg.dna;
  std::string train_amp = rd::amplitude_source_name(cfg.dna.amplitude_source);
  std::string importance_out;
  int train_permutations = 5;
  train->add_option("--in", train_in, "input directory")->required();
  train->add_option("--model", train_model, "activity or identity");
  train->add_option("--features", train_features, "dna, dna+gps, or raw540");
  train->add_option("--out", model_out, "model JSON path");
  train->add_option("--seed", train_seed, "forest seed");
  train->add_option("--importance-out", importance_out,
                    "write permutation importance CSV");
  train->add_option("--permutations", train_permutations,
                    "permutation repeats per feature");
  add_forest_flags(train, train_fp);
  add_dna_flags(train, train_dna, train_amp);
  train->callback([&] {
    train_dna.amplitude_source = rd::amplitude_source_from_name(train_amp);
    auto records = load_dir(train_in);
    rd::Dataset data = rd::build_dataset(records,
                                         rd::feature_mode_from_name(train_features),
                                         rd::model_kind_from_name(train_model),
                                         train_dna);
    train_fp.seed = train_seed;
    rd::Forest forest = rd::train_forest(data, train_fp);
    write_output(model_out, rd::serialize_forest(forest));
    std::size_t correct = 0;
    auto preds = rd::predict(forest, data);
    for (std::size_t i = 0; i < data.size(); ++i)
      if (preds[i].label == data.labels[i]) correct++;
    std::cout << "trained " << train_model << " forest on " << data.size()
              << " rows, " << forest.trees.size() << " trees\n";
    std::cout << "training accuracy: "
              << static_cast<double>(correct) / static_cast<double>(data.size())
              << "\n";
    std::cout << "oob error: " << rd::oob_error(forest, data) << "\n";
    std::cout << "model written to " << model_out << "\n";
    if (!importance_out.empty()) {
      rd::ImportanceRanking ranking =
          rd::mean_decrease_accuracy(forest, data, train_permutations, train_seed);
      write_output(importance_out, rd::importance_csv(ranking));
      std::cout << "importance written to " << importance_out << "\n";
    }
  });

  // predict -------------------------------------------------------------------
  auto* predict = app.add_subcommand("predict", "classify records with a saved model");
  std::string pred_model = "model.json", pred_in = cfg.in_dir;
  std::string pred_out = "predictions.csv";
  rd::DnaParams pred_dna = cfg.dna;
  std::string pred_amp = rd::amplitude_source_name(cfg.dna.amplitude_source);
  predict->add_option("--model", pred_model, "model JSON path")->required();
  predict->add_option("--in", pred_in, "input directory")->required();
  predict->add_option("--out", pred_out, "predictions CSV path");
  add_dna_flags(predict, pred_dna, pred_amp);
  predict->callback([&] {
    pred_dna.amplitude_source = rd::amplitude_source_from_name(pred_amp);
    rd::Forest forest = rd::deserialize_forest(rd::csv::read_file(pred_model));
    auto records = load_dir(pred_in);
    std::string kind = infer_model_kind(forest);
    rd::Dataset data = rd::build_dataset(records, infer_feature_mode(forest),
                                         rd::model_kind_from_name(kind), pred_dna);
    auto preds = rd::predict(forest, data);
    std::string out = "record_id,truth,predicted\n";
    std::size_t correct = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      out += data.row_ids[i] + "," + data.labels[i] + "," + preds[i].label + "\n";
      if (preds[i].label == data.labels[i]) correct++;
    }
    write_output(pred_out, out);
    std::cout << "predicted " << data.size() << " records, accuracy "
              << static_cast<double>(correct) / static_cast<double>(data.size())
              << "\n";
    std::cout << "predictions written to " << pred_out << "\n";
  });

  // evaluate --------------------------------------------------------------------
  auto* evaluate = app.add_subcommand("evaluate", "train and score one model family");
  std::string eval_in = cfg.in_dir;
  std::string eval_model = "activity";
  std::string eval_features = rd::feature_mode_name(cfg.features);
  std::string eval_split = rd::split_mode_name(cfg.split);
  std::string confusion_out = "confusion.csv", eval_json_out = "evaluation.json";
  rd::PipelineConfig eval_cfg = cfg;
  std::string eval_amp = rd::amplitude_source_name(cfg.dna.amplitude_source);
  evaluate->add_option("--in", eval_in, "input directory")->required();
  evaluate->add_option("--model", eval_model, "activity or identity");
  evaluate->add_option("--features", eval_features, "dna, dna+gps, or raw540");
  evaluate->add_option("--split", eval_split, "holdout, kfold, or oob");
  evaluate->add_option("--kfold", eval_cfg.kfold_k, "fold count for kfold");
  evaluate->add_option("--test-fraction", eval_cfg.test_fraction,
                       "held-out fraction for holdout");
  evaluate->add_option("--seed", eval_cfg.seed, "split and forest seed");
  evaluate->add_option("--confusion-out", confusion_out, "confusion CSV path");
  evaluate->add_option("--json-out", eval_json_out, "evaluation JSON path");
  add_forest_flags(evaluate, eval_cfg.forest);
  add_dna_flags(evaluate, eval_cfg.dna, eval_amp);
  evaluate->callback([&] {
    eval_cfg.dna.amplitude_source = rd::amplitude_source_from_name(eval_amp);
    eval_cfg.features = rd::feature_mode_from_name(eval_features);
    eval_cfg.split = rd::split_mode_from_name(eval_split);
    eval_cfg.validate();
    auto records = load_dir(eval_in);
    rd::EvalReport report = rd::evaluate_records(
        records, eval_cfg, rd::model_kind_from_name(eval_model));
    write_output(confusion_out, rd::confusion_csv(report.confusion));
    nlohmann::json j = report;
    write_output(eval_json_out, j.dump(1) + "\n");
    std::cout << rd::eval_report_text(report);
    std::cout << "confusion matrix written to " << confusion_out << "\n";
    std::cout << "evaluation summary written to " << eval_json_out << "\n";
  });

  // ttest --------------------------------------------------------------------
  auto* ttest = app.add_subcommand("ttest", "pooled-variance t-tests on indicators");
  std::string ttest_in = "dna.csv";
  std::string ttest_group = "activity";
  std::string ttest_indicator = "all";
  std::string ttest_activity;
  std::string ttest_out;
  ttest->add_option("--in", ttest_in, "DNA CSV path")->required();
  ttest->add_option("--group", ttest_group, "activity or sex");
  ttest->add_option("--indicator", ttest_indicator,
                    "balance, stride, steer, stability, amplitude, or all");
  ttest->add_option("--activity", ttest_activity,
                    "restrict to one activity (sex grouping only)");
  ttest->add_option("--out", ttest_out, "also write ttest CSV here");
  ttest->callback([&] {
    auto rows = rd::read_dna_csv(rd::csv::read_file(ttest_in));
    std::vector<std::string> indicators;
    if (ttest_indicator == "all")
      indicators.assign(rd::kIndicatorNames.begin(), rd::kIndicatorNames.end());
    else
      indicators.push_back(ttest_indicator);
    std::vector<rd::TTestRow> results;
    for (const std::string& ind : indicators) {
      if (ttest_group == "activity") {
        for (auto& r : rd::activity_pair_ttests(rows, ind))
          results.push_back(std::move(r));
      } else if (ttest_group == "sex") {
        results.push_back(rd::sex_ttest(rows, ind, ttest_activity));
      } else {
        rd::raise(rd::Errc::InvalidArgument, "--group must be activity or sex");
      }
    }
    for (const auto& r : results) {
      const auto& t = r.result;
      std::cout << r.indicator << ": " << r.group1 << " (mean "
                << rd::csv::format_double(t.group1.mean) << ", sd "
                << rd::csv::format_double(std::sqrt(t.group1.sample_variance))
                << ", n " << t.group1.n << ") vs " << r.group2 << " (mean "
                << rd::csv::format_double(t.group2.mean) << ", sd "
                << rd::csv::format_double(std::sqrt(t.group2.sample_variance))
                << ", n " << t.group2.n << "): t "
                << rd::csv::format_double(t.t) << ", df " << t.df << ", p "
                << rd::csv::format_double(t.p) << " ("
                << rd::significance_tier(t.p) << ")\n";
    }
    if (!ttest_out.empty()) {
      write_output(ttest_out, rd::ttest_csv(results));
      std::cout << "t-test table written to " << ttest_out << "\n";
    }
  });

  // report -----------------------------------------------------------------
  auto* report = app.add_subcommand(
      "report", "assemble the plaintext report from persisted CSVs");
  std::string report_dna = "dna.csv", report_confusion, report_out = "report.txt";
  report->add_option("--dna", report_dna, "DNA CSV path")->required();
  report->add_option("--confusion", report_confusion, "confusion CSV path");
  report->add_option("--out", report_out, "report path");
  report->callback([&] {
    auto rows = rd::read_dna_csv(rd::csv::read_file(report_dna));
    rd::ConfusionMatrix cm;
    bool has_cm = false;
    if (!report_confusion.empty()) {
      cm = rd::parse_confusion_csv(rd::csv::read_file(report_confusion));
      has_cm = true;
    }
    write_output(report_out, rd::build_report(rows, has_cm ? &cm : nullptr));
    std::cout << "report written to " << report_out << "\n";
  });

  // --config lives on the top-level app; let subcommands hand it back up so
  // `runnerdna train --config ...` parses the same as `runnerdna --config ...`.
  for (CLI::App* sub : app.get_subcommands([](const CLI::App*) { return true; }))
    sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    std::cerr << "run with --help for usage\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const rd::Error& e) {
    std::cerr << "error [" << rd::errc_name(e.code()) << "]: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
