#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "runnerdna/csv.hpp"
#include "runnerdna/dataset.hpp"
#include "runnerdna/error.hpp"
#include "runnerdna/forest.hpp"
#include "runnerdna/rng.hpp"

namespace runnerdna {

struct ImportanceRanking {
  std::vector<std::string> feature_keys;
  std::vector<double> scores;  // mean decrease in out-of-bag accuracy
  int permutations = 0;
  std::uint64_t seed = 0;

  double score_of(const std::string& key) const {
    auto it = std::find(feature_keys.begin(), feature_keys.end(), key);
    if (it == feature_keys.end()) raise(Errc::KeyMismatch, "unknown feature: " + key);
    return scores[static_cast<std::size_t>(it - feature_keys.begin())];
  }
};

namespace detail {

using Shuffler = std::function<void(std::span<std::size_t>, Rng&)>;

inline void fisher_yates_shuffler(std::span<std::size_t> indices, Rng& rng) {
  rng.shuffle(indices);
}

struct OobVoteTally {
  std::vector<std::vector<std::size_t>> votes;  // row x class
  std::vector<char> voted;

  explicit OobVoteTally(std::size_t n_rows, std::size_t n_classes)
      : votes(n_rows, std::vector<std::size_t>(n_classes, 0)), voted(n_rows, 0) {}

  void reset() {
    for (auto& v : votes) std::fill(v.begin(), v.end(), 0);
    std::fill(voted.begin(), voted.end(), 0);
  }

  void add(std::size_t row, std::size_t cls) {
    votes[row][cls]++;
    voted[row] = 1;
  }

  // Accuracy over rows with at least one vote; majority ties resolve to the
  // lowest class index.
  double accuracy(const Forest& forest, const Dataset& data) const {
    std::size_t counted = 0, correct = 0;
    for (std::size_t r = 0; r < data.size(); ++r) {
      if (!voted[r]) continue;
      counted++;
      std::size_t best = 0;
      for (std::size_t c = 1; c < votes[r].size(); ++c)
        if (votes[r][c] > votes[r][best]) best = c;
      if (forest.classes[best] == data.labels[r]) correct++;
    }
    if (counted == 0) raise(Errc::EmptyData, "no out-of-bag rows to score");
    return static_cast<double>(correct) / static_cast<double>(counted);
  }
};

inline ImportanceRanking mean_decrease_accuracy_impl(const Forest& forest,
                                                     const Dataset& data,
                                                     int permutations,
                                                     std::uint64_t seed,
                                                     const Shuffler& shuffle) {
  check_training_set(forest, data);
  if (permutations < 1) raise(Errc::InvalidArgument, "permutations must be >= 1");

  const auto oob = oob_rows_per_tree(forest);
  const std::size_t n_classes = forest.classes.size();

  OobVoteTally tally(data.size(), n_classes);
  for (std::size_t t = 0; t < forest.trees.size(); ++t)
    for (std::uint32_t r : oob[t])
      tally.add(r, static_cast<std::size_t>(forest.trees[t].leaf_vote(data.rows[r])));
  const double baseline = tally.accuracy(forest, data);

  ImportanceRanking ranking;
  ranking.feature_keys = forest.feature_keys;
  ranking.scores.assign(forest.feature_keys.size(), 0.0);
  ranking.permutations = permutations;
  ranking.seed = seed;

  std::vector<double> row_buf;
  std::vector<std::size_t> perm;
  for (std::size_t f = 0; f < forest.feature_keys.size(); ++f) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(f)));
    double acc_sum = 0.0;
    for (int rep = 0; rep < permutations; ++rep) {
      tally.reset();
      for (std::size_t t = 0; t < forest.trees.size(); ++t) {
        const auto& rows = oob[t];
        perm.resize(rows.size());
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        shuffle(perm, rng);
        for (std::size_t j = 0; j < rows.size(); ++j) {
          row_buf = data.rows[rows[j]];
          row_buf[f] = data.rows[rows[perm[j]]][f];
          tally.add(rows[j],
                    static_cast<std::size_t>(forest.trees[t].leaf_vote(row_buf)));
        }
      }
      acc_sum += tally.accuracy(forest, data);
    }
    ranking.scores[f] = baseline - acc_sum / static_cast<double>(permutations);
  }
  return ranking;
}

}  // namespace detail

// Permutes each feature within every tree's out-of-bag rows and reports the
// drop in out-of-bag accuracy. Each feature gets its own derived RNG stream
// so scores do not depend on evaluation order.
inline ImportanceRanking mean_decrease_accuracy(const Forest& forest,
                                                const Dataset& data,
                                                int permutations,
                                                std::uint64_t seed) {
  return detail::mean_decrease_accuracy_impl(forest, data, permutations, seed,
                                             detail::fisher_yates_shuffler);
}

// Top-k feature keys by score, descending; ties keep model feature order.
inline std::vector<std::string> select_top_features(const ImportanceRanking& ranking,
                                                    std::size_t k) {
  if (k > ranking.feature_keys.size())
    raise(Errc::KTooLarge, "k exceeds feature count");
  std::vector<std::size_t> order(ranking.feature_keys.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return ranking.scores[a] > ranking.scores[b];
  });
  std::vector<std::string> keys;
  keys.reserve(k);
  for (std::size_t i = 0; i < k; ++i)
    keys.push_back(ranking.feature_keys[order[i]]);
  return keys;
}

// CSV with one row per feature, best first.
inline std::string importance_csv(const ImportanceRanking& ranking) {
  std::vector<std::size_t> order(ranking.feature_keys.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return ranking.scores[a] > ranking.scores[b];
  });
  std::string out = "rank,feature,mean_decrease_accuracy\n";
  for (std::size_t i = 0; i < order.size(); ++i) {
    out += std::to_string(i + 1);
    out += ',';
    out += ranking.feature_keys[order[i]];
    out += ',';
    out += csv::format_double(ranking.scores[order[i]]);
    out += '\n';
  }
  return out;
}

}  // namespace runnerdna
