// Tabular sample (features + response), train/test splitting, and stacking.
#pragma once

#include <numeric>
#include <string>
#include <vector>

#include "art/common.hpp"

namespace art {

enum class Task { Regression, Classification };

inline const char* task_name(Task t) {
  return t == Task::Regression ? "regression" : "classification";
}

struct Dataset {
  Matrix features;  // n x p
  Vector response;  // length n
  Task task = Task::Regression;

  int n() const { return static_cast<int>(features.rows()); }
  int p() const { return static_cast<int>(features.cols()); }

  void validate() const {
    if (features.rows() < 1 || features.cols() < 1) {
      throw data_error("dataset must have at least one row and one column");
    }
    if (features.rows() != response.size()) {
      throw data_error("feature matrix and response have mismatched row counts");
    }
    if (!features.allFinite() || !response.allFinite()) {
      throw data_error("dataset contains non-finite values");
    }
    if (task == Task::Classification) {
      for (Eigen::Index i = 0; i < response.size(); ++i) {
        if (response[i] != 0.0 && response[i] != 1.0) {
          throw data_error("classification response must be exactly 0 or 1 (row " +
                           std::to_string(i) + ")");
        }
      }
    }
  }

  static Dataset make(Matrix x, Vector y, Task task) {
    Dataset d{std::move(x), std::move(y), task};
    d.validate();
    return d;
  }

  Dataset subset(const std::vector<int>& rows) const {
    Dataset out;
    out.task = task;
    out.features.resize(static_cast<Eigen::Index>(rows.size()), features.cols());
    out.response.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      out.features.row(static_cast<Eigen::Index>(i)) = features.row(rows[i]);
      out.response[static_cast<Eigen::Index>(i)] = response[rows[i]];
    }
    return out;
  }
};

struct SplitIndices {
  std::vector<int> train_idx;
  std::vector<int> test_idx;
};

// Seeded random split of the rows into a train part of floor(ratio*n) rows and
// a test part holding the rest, both kept in post-permutation order. For
// classification the split is stratified by class so neither half is
// single-class; per-class quotas use largest fractional remainders so the
// train part still has exactly floor(ratio*n) rows.
inline SplitIndices split_primary(const Dataset& data, double ratio, std::uint64_t seed) {
  const int n = data.n();
  if (n < 2) throw config_error("cannot split fewer than 2 rows");
  if (!(ratio > 0.0 && ratio < 1.0)) throw config_error("split ratio must lie in (0, 1)");
  const int n_train = static_cast<int>(std::floor(ratio * n));
  if (n_train < 1 || n_train >= n) {
    throw config_error("degenerate split: one side would be empty (n=" + std::to_string(n) +
                       ", ratio=" + format_double(ratio) + ")");
  }

  Rng rng(seed);
  const std::vector<int> perm = rng.permutation(n);

  SplitIndices out;
  out.train_idx.reserve(static_cast<std::size_t>(n_train));
  out.test_idx.reserve(static_cast<std::size_t>(n - n_train));

  if (data.task == Task::Classification) {
    int n1 = 0;
    for (Eigen::Index i = 0; i < data.response.size(); ++i) n1 += data.response[i] == 1.0;
    const int n0 = n - n1;
    int k0 = static_cast<int>(std::floor(ratio * n0));
    int k1 = static_cast<int>(std::floor(ratio * n1));
    if (k0 + k1 < n_train) {
      const double f0 = ratio * n0 - k0;
      const double f1 = ratio * n1 - k1;
      (f1 > f0 ? k1 : k0) += 1;
    }
    int quota[2] = {k0, k1};
    for (int idx : perm) {
      const int cls = data.response[idx] == 1.0 ? 1 : 0;
      if (quota[cls] > 0) {
        --quota[cls];
        out.train_idx.push_back(idx);
      } else {
        out.test_idx.push_back(idx);
      }
    }
  } else {
    out.train_idx.assign(perm.begin(), perm.begin() + n_train);
    out.test_idx.assign(perm.begin() + n_train, perm.end());
  }
  return out;
}

// Row-concatenation with the train rows first. An empty auxiliary is an identity.
inline Dataset stack(const Dataset& train_part, const Dataset& aux) {
  if (aux.features.rows() == 0) return train_part;
  if (train_part.p() != aux.p()) {
    throw data_error("stack: column counts differ (" + std::to_string(train_part.p()) +
                     " vs " + std::to_string(aux.p()) + ")");
  }
  if (train_part.task != aux.task) {
    throw data_error("stack: task kinds differ");
  }
  Dataset out;
  out.task = train_part.task;
  out.features.resize(train_part.features.rows() + aux.features.rows(), train_part.features.cols());
  out.features.topRows(train_part.features.rows()) = train_part.features;
  out.features.bottomRows(aux.features.rows()) = aux.features;
  out.response.resize(train_part.response.size() + aux.response.size());
  out.response.head(train_part.response.size()) = train_part.response;
  out.response.tail(aux.response.size()) = aux.response;
  return out;
}

}  // namespace art
