#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "runnerdna/error.hpp"

namespace runnerdna {

// Plain training/evaluation table: one row per record, columns in a fixed
// key order shared with any model trained on it.
struct Dataset {
  std::vector<std::string> feature_keys;
  std::vector<std::vector<double>> rows;
  std::vector<std::string> labels;
  std::vector<std::string> row_ids;

  std::size_t size() const { return rows.size(); }

  void validate() const {
    if (rows.size() != labels.size() || rows.size() != row_ids.size())
      raise(Errc::LengthMismatch, "dataset rows/labels/ids lengths differ");
    for (const auto& r : rows) {
      if (r.size() != feature_keys.size())
        raise(Errc::KeyMismatch, "dataset row width != feature key count");
      for (double v : r)
        if (!std::isfinite(v)) raise(Errc::NonFiniteValue, "dataset value not finite");
    }
  }

  Dataset subset(const std::vector<std::size_t>& indices) const {
    Dataset out;
    out.feature_keys = feature_keys;
    out.rows.reserve(indices.size());
    out.labels.reserve(indices.size());
    out.row_ids.reserve(indices.size());
    for (std::size_t i : indices) {
      out.rows.push_back(rows[i]);
      out.labels.push_back(labels[i]);
      out.row_ids.push_back(row_ids[i]);
    }
    return out;
  }
};

}  // namespace runnerdna
