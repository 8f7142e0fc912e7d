#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "runnerdna/dataset.hpp"
#include "runnerdna/error.hpp"
#include "runnerdna/rng.hpp"

namespace runnerdna {

struct ForestParams {
  int n_trees = 200;
  int max_depth = 0;           // 0 means unlimited
  int min_samples_leaf = 1;
  int features_per_split = 0;  // 0 means ceil(sqrt(feature count))
  std::uint64_t seed = 0;

  void validate(std::size_t n_features) const {
    if (n_trees < 1) raise(Errc::InvalidArgument, "n_trees must be >= 1");
    if (max_depth < 0) raise(Errc::InvalidArgument, "max_depth must be >= 0");
    if (min_samples_leaf < 1) raise(Errc::InvalidArgument, "min_samples_leaf must be >= 1");
    if (features_per_split < 0)
      raise(Errc::InvalidArgument, "features_per_split must be >= 0");
    if (static_cast<std::size_t>(features_per_split) > n_features)
      raise(Errc::InvalidArgument, "features_per_split exceeds feature count");
  }

  std::size_t resolved_features_per_split(std::size_t n_features) const {
    if (features_per_split > 0) return static_cast<std::size_t>(features_per_split);
    return static_cast<std::size_t>(
        std::ceil(std::sqrt(static_cast<double>(n_features))));
  }
};

// feature < 0 marks a leaf; class_counts is populated only for leaves.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  std::vector<std::uint32_t> class_counts;

  bool is_leaf() const { return feature < 0; }
};

struct DecisionTree {
  std::vector<TreeNode> nodes;
  std::vector<std::uint32_t> bootstrap_indices;  // one entry per draw

  int leaf_vote(const std::vector<double>& row) const {
    int idx = 0;
    while (!nodes[idx].is_leaf()) {
      const TreeNode& nd = nodes[idx];
      idx = row[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left
                                                                      : nd.right;
    }
    const auto& counts = nodes[idx].class_counts;
    return static_cast<int>(
        std::max_element(counts.begin(), counts.end()) - counts.begin());
  }
};

struct Forest {
  ForestParams params;
  std::vector<std::string> classes;
  std::vector<std::string> feature_keys;
  std::size_t n_training_rows = 0;
  std::vector<DecisionTree> trees;

  int class_index(const std::string& label) const {
    auto it = std::find(classes.begin(), classes.end(), label);
    if (it == classes.end()) raise(Errc::UnknownLabel, "label not in model: " + label);
    return static_cast<int>(it - classes.begin());
  }
};

struct Prediction {
  std::string label;
  std::vector<double> vote_fractions;  // aligned with forest.classes, sums to 1
};

inline std::vector<std::uint32_t> bootstrap_draws(Rng& rng, std::size_t n) {
  std::vector<std::uint32_t> draws(n);
  for (auto& d : draws) d = static_cast<std::uint32_t>(rng.uniform_index(n));
  return draws;
}

inline std::vector<std::uint32_t> bootstrap_sample(std::size_t n, std::uint64_t seed) {
  if (n == 0) raise(Errc::EmptyData, "bootstrap over empty set");
  Rng rng(seed);
  return bootstrap_draws(rng, n);
}

namespace detail {

struct SplitCandidate {
  bool found = false;
  std::size_t feature = 0;
  double threshold = 0.0;
  double score = 0.0;  // weighted child Gini, lower is better
};

inline double gini_from_counts(const std::vector<std::uint32_t>& counts,
                               std::size_t total) {
  double sum_sq = 0.0;
  for (std::uint32_t c : counts) {
    double p = static_cast<double>(c) / static_cast<double>(total);
    sum_sq += p * p;
  }
  return 1.0 - sum_sq;
}

class TreeBuilder {
 public:
  TreeBuilder(const Dataset& data, const std::vector<int>& row_classes,
              std::size_t n_classes, const ForestParams& params, Rng& rng)
      : data_(data),
        row_classes_(row_classes),
        n_classes_(n_classes),
        params_(params),
        rng_(rng),
        k_features_(params.resolved_features_per_split(data.feature_keys.size())),
        feature_pool_(data.feature_keys.size()) {
    std::iota(feature_pool_.begin(), feature_pool_.end(), std::size_t{0});
  }

  DecisionTree build(std::vector<std::uint32_t> bootstrap) {
    DecisionTree tree;
    tree.bootstrap_indices = bootstrap;
    nodes_ = &tree.nodes;
    grow(std::move(bootstrap), 1);
    nodes_ = nullptr;
    return tree;
  }

 private:
  std::vector<std::uint32_t> count_classes(const std::vector<std::uint32_t>& rows) const {
    std::vector<std::uint32_t> counts(n_classes_, 0);
    for (std::uint32_t r : rows) counts[static_cast<std::size_t>(row_classes_[r])]++;
    return counts;
  }

  // Draws k distinct feature indices, returned in ascending order so that
  // candidate evaluation (and therefore tie-breaking) is canonical.
  std::vector<std::size_t> sample_features() {
    for (std::size_t i = 0; i < k_features_; ++i) {
      std::size_t j = i + rng_.uniform_index(feature_pool_.size() - i);
      std::swap(feature_pool_[i], feature_pool_[j]);
    }
    std::vector<std::size_t> picked(feature_pool_.begin(),
                                    feature_pool_.begin() + k_features_);
    std::sort(picked.begin(), picked.end());
    return picked;
  }

  SplitCandidate best_split(const std::vector<std::uint32_t>& rows,
                            const std::vector<std::uint32_t>& totals) {
    SplitCandidate best;
    const std::size_t n = rows.size();
    const std::size_t min_leaf = static_cast<std::size_t>(params_.min_samples_leaf);
    std::vector<std::pair<double, int>> ordered(n);
    std::vector<std::uint32_t> left_counts(n_classes_);
    for (std::size_t f : sample_features()) {
      for (std::size_t i = 0; i < n; ++i)
        ordered[i] = {data_.rows[rows[i]][f], row_classes_[rows[i]]};
      std::sort(ordered.begin(), ordered.end());
      std::fill(left_counts.begin(), left_counts.end(), 0);
      std::size_t left_total = 0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        left_counts[static_cast<std::size_t>(ordered[i].second)]++;
        left_total++;
        if (ordered[i].first == ordered[i + 1].first) continue;
        std::size_t right_total = n - left_total;
        if (left_total < min_leaf || right_total < min_leaf) continue;
        double gini_left = gini_from_counts(left_counts, left_total);
        double sum_sq_right = 0.0;
        for (std::size_t c = 0; c < n_classes_; ++c) {
          double p = static_cast<double>(totals[c] - left_counts[c]) /
                     static_cast<double>(right_total);
          sum_sq_right += p * p;
        }
        double score = (static_cast<double>(left_total) * gini_left +
                        static_cast<double>(right_total) * (1.0 - sum_sq_right)) /
                       static_cast<double>(n);
        if (!best.found || score < best.score) {
          best.found = true;
          best.feature = f;
          best.threshold = (ordered[i].first + ordered[i + 1].first) / 2.0;
          best.score = score;
        }
      }
    }
    return best;
  }

  int make_leaf(std::vector<std::uint32_t> counts) {
    TreeNode node;
    node.class_counts = std::move(counts);
    nodes_->push_back(std::move(node));
    return static_cast<int>(nodes_->size() - 1);
  }

  int grow(std::vector<std::uint32_t> rows, int depth) {
    std::vector<std::uint32_t> totals = count_classes(rows);
    std::size_t represented = 0;
    for (std::uint32_t c : totals) represented += c > 0 ? 1 : 0;
    bool depth_capped = params_.max_depth > 0 && depth > params_.max_depth;
    if (represented <= 1 || depth_capped ||
        rows.size() < 2 * static_cast<std::size_t>(params_.min_samples_leaf))
      return make_leaf(std::move(totals));

    SplitCandidate split = best_split(rows, totals);
    if (!split.found) return make_leaf(std::move(totals));

    std::vector<std::uint32_t> left_rows, right_rows;
    left_rows.reserve(rows.size());
    right_rows.reserve(rows.size());
    for (std::uint32_t r : rows) {
      if (data_.rows[r][split.feature] <= split.threshold)
        left_rows.push_back(r);
      else
        right_rows.push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();

    std::size_t self = nodes_->size();
    nodes_->push_back(TreeNode{static_cast<int>(split.feature), split.threshold,
                               -1, -1, {}});
    int left = grow(std::move(left_rows), depth + 1);
    int right = grow(std::move(right_rows), depth + 1);
    (*nodes_)[self].left = left;
    (*nodes_)[self].right = right;
    return static_cast<int>(self);
  }

  const Dataset& data_;
  const std::vector<int>& row_classes_;
  std::size_t n_classes_;
  const ForestParams& params_;
  Rng& rng_;
  std::size_t k_features_;
  std::vector<std::size_t> feature_pool_;
  std::vector<TreeNode>* nodes_ = nullptr;
};

inline std::vector<int> map_row_classes(const Dataset& data,
                                        const std::vector<std::string>& classes) {
  std::vector<int> row_classes(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    auto it = std::lower_bound(classes.begin(), classes.end(), data.labels[i]);
    row_classes[i] = static_cast<int>(it - classes.begin());
  }
  return row_classes;
}

}  // namespace detail

inline Forest train_forest(const Dataset& data, const ForestParams& params) {
  data.validate();
  if (data.size() == 0) raise(Errc::EmptyData, "cannot train on empty dataset");
  params.validate(data.feature_keys.size());

  Forest forest;
  forest.params = params;
  forest.feature_keys = data.feature_keys;
  forest.n_training_rows = data.size();
  forest.classes = data.labels;
  std::sort(forest.classes.begin(), forest.classes.end());
  forest.classes.erase(std::unique(forest.classes.begin(), forest.classes.end()),
                       forest.classes.end());
  if (forest.classes.size() < 2)
    raise(Errc::SingleClass, "training labels contain a single class");

  std::vector<int> row_classes = detail::map_row_classes(data, forest.classes);
  forest.trees.reserve(static_cast<std::size_t>(params.n_trees));
  for (int t = 0; t < params.n_trees; ++t) {
    Rng rng(params.seed + static_cast<std::uint64_t>(t));
    detail::TreeBuilder builder(data, row_classes, forest.classes.size(), params, rng);
    forest.trees.push_back(builder.build(bootstrap_draws(rng, data.size())));
  }
  return forest;
}

inline Prediction predict_row(const Forest& forest, const std::vector<double>& row) {
  if (row.size() != forest.feature_keys.size())
    raise(Errc::KeyMismatch, "row width != model feature count");
  std::vector<std::size_t> votes(forest.classes.size(), 0);
  for (const DecisionTree& tree : forest.trees)
    votes[static_cast<std::size_t>(tree.leaf_vote(row))]++;
  std::size_t best = 0;
  for (std::size_t c = 1; c < votes.size(); ++c)
    if (votes[c] > votes[best]) best = c;
  Prediction pred;
  pred.label = forest.classes[best];
  pred.vote_fractions.resize(votes.size());
  for (std::size_t c = 0; c < votes.size(); ++c)
    pred.vote_fractions[c] =
        static_cast<double>(votes[c]) / static_cast<double>(forest.trees.size());
  return pred;
}

inline std::vector<Prediction> predict(const Forest& forest, const Dataset& data) {
  if (data.feature_keys != forest.feature_keys)
    raise(Errc::KeyMismatch, "dataset feature keys differ from model");
  std::vector<Prediction> preds;
  preds.reserve(data.size());
  for (const auto& row : data.rows) preds.push_back(predict_row(forest, row));
  return preds;
}

namespace detail {

// Per-tree out-of-bag row lists, in ascending row order.
inline std::vector<std::vector<std::uint32_t>> oob_rows_per_tree(const Forest& forest) {
  std::vector<std::vector<std::uint32_t>> oob(forest.trees.size());
  std::vector<char> in_bag(forest.n_training_rows);
  for (std::size_t t = 0; t < forest.trees.size(); ++t) {
    std::fill(in_bag.begin(), in_bag.end(), 0);
    for (std::uint32_t r : forest.trees[t].bootstrap_indices) in_bag[r] = 1;
    for (std::uint32_t r = 0; r < forest.n_training_rows; ++r)
      if (!in_bag[r]) oob[t].push_back(r);
  }
  return oob;
}

inline void check_training_set(const Forest& forest, const Dataset& data) {
  if (data.feature_keys != forest.feature_keys)
    raise(Errc::KeyMismatch, "dataset feature keys differ from model");
  if (data.size() != forest.n_training_rows)
    raise(Errc::NotTrainingSet, "dataset row count differs from training set");
  for (const std::string& label : data.labels) {
    if (!std::binary_search(forest.classes.begin(), forest.classes.end(), label))
      raise(Errc::NotTrainingSet, "dataset label not seen in training: " + label);
  }
}

}  // namespace detail

// Fraction of rows with at least one out-of-bag tree whose OOB majority vote
// is wrong. Rows never out of bag are excluded from the denominator.
inline double oob_error(const Forest& forest, const Dataset& data) {
  detail::check_training_set(forest, data);
  auto oob = detail::oob_rows_per_tree(forest);
  std::vector<std::vector<std::size_t>> votes(
      data.size(), std::vector<std::size_t>(forest.classes.size(), 0));
  std::vector<char> voted(data.size(), 0);
  for (std::size_t t = 0; t < forest.trees.size(); ++t) {
    for (std::uint32_t r : oob[t]) {
      votes[r][static_cast<std::size_t>(forest.trees[t].leaf_vote(data.rows[r]))]++;
      voted[r] = 1;
    }
  }
  std::size_t counted = 0, wrong = 0;
  for (std::size_t r = 0; r < data.size(); ++r) {
    if (!voted[r]) continue;
    counted++;
    std::size_t best = 0;
    for (std::size_t c = 1; c < votes[r].size(); ++c)
      if (votes[r][c] > votes[r][best]) best = c;
    if (forest.classes[best] != data.labels[r]) wrong++;
  }
  if (counted == 0) raise(Errc::EmptyData, "no out-of-bag rows to score");
  return static_cast<double>(wrong) / static_cast<double>(counted);
}

inline void to_json(nlohmann::json& j, const ForestParams& p) {
  j = nlohmann::json{{"n_trees", p.n_trees},
                     {"max_depth", p.max_depth},
                     {"min_samples_leaf", p.min_samples_leaf},
                     {"features_per_split", p.features_per_split},
                     {"seed", p.seed}};
}

inline void from_json(const nlohmann::json& j, ForestParams& p) {
  j.at("n_trees").get_to(p.n_trees);
  j.at("max_depth").get_to(p.max_depth);
  j.at("min_samples_leaf").get_to(p.min_samples_leaf);
  j.at("features_per_split").get_to(p.features_per_split);
  j.at("seed").get_to(p.seed);
}

inline void to_json(nlohmann::json& j, const TreeNode& n) {
  if (n.is_leaf())
    j = nlohmann::json{{"counts", n.class_counts}};
  else
    j = nlohmann::json{{"f", n.feature},
                       {"t", n.threshold},
                       {"l", n.left},
                       {"r", n.right}};
}

inline void from_json(const nlohmann::json& j, TreeNode& n) {
  if (j.contains("counts")) {
    n.feature = -1;
    j.at("counts").get_to(n.class_counts);
  } else {
    j.at("f").get_to(n.feature);
    j.at("t").get_to(n.threshold);
    j.at("l").get_to(n.left);
    j.at("r").get_to(n.right);
  }
}

inline void to_json(nlohmann::json& j, const DecisionTree& t) {
  j = nlohmann::json{{"nodes", t.nodes}, {"bootstrap", t.bootstrap_indices}};
}

inline void from_json(const nlohmann::json& j, DecisionTree& t) {
  j.at("nodes").get_to(t.nodes);
  j.at("bootstrap").get_to(t.bootstrap_indices);
}

inline void to_json(nlohmann::json& j, const Forest& f) {
  j = nlohmann::json{{"format", "runnerdna-forest-v1"},
                     {"params", f.params},
                     {"classes", f.classes},
                     {"feature_keys", f.feature_keys},
                     {"n_training_rows", f.n_training_rows},
                     {"trees", f.trees}};
}

inline void from_json(const nlohmann::json& j, Forest& f) {
  if (j.value("format", "") != std::string("runnerdna-forest-v1"))
    raise(Errc::ParseFailure, "unrecognized model format");
  j.at("params").get_to(f.params);
  j.at("classes").get_to(f.classes);
  j.at("feature_keys").get_to(f.feature_keys);
  j.at("n_training_rows").get_to(f.n_training_rows);
  j.at("trees").get_to(f.trees);
}

inline std::string serialize_forest(const Forest& forest) {
  nlohmann::json j = forest;
  return j.dump(1);
}

inline Forest deserialize_forest(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) raise(Errc::ParseFailure, "model file is not valid JSON");
  return j.get<Forest>();
}

}  // namespace runnerdna
