// Fitted-model representations and the learner contract. Models are plain
// value types so they can be serialized, compared, and shared across threads.
#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "art/common.hpp"
#include "art/dataset.hpp"

namespace art {

enum class Link { Identity, Logit };

struct LinearModel {
  double intercept = 0.0;
  Vector coefficients;
  Link link = Link::Identity;

  double predict(const Eigen::Ref<const Vector>& x) const {
    const double eta = intercept + coefficients.dot(x);
    return link == Link::Identity ? eta : clip_prob(sigmoid(eta));
  }

  Vector predict_batch(const Matrix& x) const {
    Vector eta = (x * coefficients).array() + intercept;
    if (link == Link::Logit) {
      for (Eigen::Index i = 0; i < eta.size(); ++i) eta[i] = clip_prob(sigmoid(eta[i]));
    }
    return eta;
  }
};

struct LassoModel {
  LinearModel linear;
  double lambda_reg = 0.0;
  std::vector<int> active_set;  // indices with nonzero back-transformed coefficient

  double predict(const Eigen::Ref<const Vector>& x) const { return linear.predict(x); }
  Vector predict_batch(const Matrix& x) const { return linear.predict_batch(x); }
};

// k-nearest-neighbour classifier; memorizes its training sample.
struct KnnModel {
  Matrix train_x;
  Vector train_y;
  int k = 1;

  double predict(const Eigen::Ref<const Vector>& x) const {
    const Eigen::Index n = train_x.rows();
    Vector d2 = (train_x.rowwise() - x.transpose()).rowwise().squaredNorm();
    std::vector<int> idx(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = static_cast<int>(i);
    // distance ties break toward the lower row index
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
      return d2[a] != d2[b] ? d2[a] < d2[b] : a < b;
    });
    double ones = 0.0;
    for (int j = 0; j < k; ++j) ones += train_y[idx[static_cast<std::size_t>(j)]];
    return clip_prob(ones / k);
  }

  Vector predict_batch(const Matrix& x) const {
    Vector out(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) out[i] = predict(x.row(i).transpose());
    return out;
  }
};

// Depth-1 gradient-boosted trees on the logistic deviance.
struct StumpEnsemble {
  struct Stump {
    int feature = 0;
    double threshold = 0.0;
    double left = 0.0;   // score when x[feature] <= threshold
    double right = 0.0;
  };

  double base_score = 0.0;  // initial log-odds
  double learning_rate = 0.1;
  int n_rounds = 0;
  std::vector<Stump> stumps;

  double raw_score(const Eigen::Ref<const Vector>& x) const {
    double f = base_score;
    for (const Stump& s : stumps) {
      f += learning_rate * (x[s.feature] <= s.threshold ? s.left : s.right);
    }
    return f;
  }

  double predict(const Eigen::Ref<const Vector>& x) const { return clip_prob(sigmoid(raw_score(x))); }

  Vector predict_batch(const Matrix& x) const {
    Vector f = Vector::Constant(x.rows(), base_score);
    for (const Stump& s : stumps) {
      for (Eigen::Index i = 0; i < x.rows(); ++i) {
        f[i] += learning_rate * (x(i, s.feature) <= s.threshold ? s.left : s.right);
      }
    }
    for (Eigen::Index i = 0; i < f.size(); ++i) f[i] = clip_prob(sigmoid(f[i]));
    return f;
  }
};

using ModelParams = std::variant<LinearModel, LassoModel, KnnModel, StumpEnsemble>;

struct FittedModel {
  ModelParams params;
  std::string label;

  double predict(const Eigen::Ref<const Vector>& x) const {
    return std::visit([&](const auto& m) { return m.predict(x); }, params);
  }

  Vector predict_batch(const Matrix& x) const {
    return std::visit([&](const auto& m) { return m.predict_batch(x); }, params);
  }

  std::optional<std::vector<int>> selected_vars() const {
    if (const auto* lasso = std::get_if<LassoModel>(&params)) return lasso->active_set;
    return std::nullopt;
  }
};

// A learning algorithm: deterministic given the dataset and the seed.
struct LearnerSpec {
  std::string name;
  bool supports_selection = false;
  std::function<FittedModel(const Dataset&, std::uint64_t)> fit;
};

}  // namespace art
