// The aggregation pipeline: repeated primary-data splits, candidate fits on
// the train part and on each train+auxiliary stack, exponential weighting on
// the held-out part, and the final convex-combination model.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "art/common.hpp"
#include "art/dataset.hpp"
#include "art/learners.hpp"
#include "art/loss.hpp"
#include "art/model.hpp"
#include "art/weighting.hpp"

namespace art {

enum class WeightMode { Sequential, Simplified };

// What the returned model's candidates are trained on once weights have been
// averaged across splits: the train half of the last split, or the full
// primary data (stacked with each full auxiliary set).
enum class FinalRefit { LastSplit, FullData };

struct ArtConfig {
  std::optional<double> lambda;        // absent: default_lambda rule
  std::optional<PriorWeights> priors;  // absent: uniform
  double split_ratio = 0.5;
  int n_splits = 10;
  WeightMode weight_mode = WeightMode::Sequential;
  FinalRefit final_refit = FinalRefit::FullData;
  double converge_tol = 1e-3;
  std::uint64_t seed = 0;
  bool keep_traces = false;

  void validate() const {
    if (!(split_ratio > 0.0 && split_ratio < 1.0)) {
      throw config_error("split_ratio must lie in (0, 1)");
    }
    if (n_splits < 1) throw config_error("n_splits must be >= 1");
    if (lambda.has_value() && !(*lambda > 0.0 && std::isfinite(*lambda))) {
      throw config_error("lambda must be positive and finite");
    }
    if (!(converge_tol > 0.0)) throw config_error("converge_tol must be positive");
  }
};

struct ArtModel {
  std::vector<FittedModel> candidates;  // index 0: primary-only; then one per auxiliary
                                        // (dataset-major over learners for multi-learner pools)
  Vector final_weights;
  std::vector<WeightTrace> traces;  // per executed split, when requested
  ArtConfig config_used;
  Task task = Task::Regression;
  double lambda_used = 1.0;
  int splits_executed = 0;
  int n_features = 0;

  int n_candidates() const { return static_cast<int>(candidates.size()); }
};

inline double art_predict(const ArtModel& model, const Eigen::Ref<const Vector>& x) {
  if (model.candidates.empty()) throw config_error("art_predict: model has no candidates");
  if (x.size() != model.n_features) {
    throw data_error("art_predict: feature vector has length " + std::to_string(x.size()) +
                     ", model expects " + std::to_string(model.n_features));
  }
  double out = 0.0;
  for (int m = 0; m < model.n_candidates(); ++m) {
    out += model.final_weights[m] * model.candidates[static_cast<std::size_t>(m)].predict(x);
  }
  return out;
}

inline Vector art_predict_batch(const ArtModel& model, const Matrix& x) {
  if (model.candidates.empty()) throw config_error("art_predict: model has no candidates");
  if (x.cols() != model.n_features) {
    throw data_error("art_predict: data has " + std::to_string(x.cols()) +
                     " features, model expects " + std::to_string(model.n_features));
  }
  Vector out = Vector::Zero(x.rows());
  for (int m = 0; m < model.n_candidates(); ++m) {
    out += model.final_weights[m] *
           model.candidates[static_cast<std::size_t>(m)].predict_batch(x);
  }
  return out;
}

// Plug-in classifier: label 1 iff the aggregated probability strictly exceeds 1/2.
inline int classify(const ArtModel& model, const Eigen::Ref<const Vector>& x) {
  if (model.task != Task::Classification) {
    throw config_error("classify: model was fit for regression");
  }
  return art_predict(model, x) > 0.5 ? 1 : 0;
}

namespace detail {

struct CandidatePool {
  int n_datasets = 0;  // M + 1
  int n_learners = 0;  // R
  int size() const { return n_datasets * n_learners; }
  // dataset-major flattening: candidate (m, r) sits at m * R + r
  int flat(int m, int r) const { return m * n_learners + r; }
  int dataset_of(int c) const { return c / n_learners; }
  int learner_of(int c) const { return c % n_learners; }
};

inline std::string candidate_label(const LearnerSpec& learner, int dataset_index) {
  return learner.name + (dataset_index == 0 ? "[primary]"
                                            : "[aux" + std::to_string(dataset_index) + "]");
}

inline ArtModel art_fit_impl(const Dataset& primary, const std::vector<Dataset>& auxiliaries,
                             const std::vector<LearnerSpec>& learners, const Loss& loss,
                             const ArtConfig& config) {
  config.validate();
  primary.validate();
  if (learners.empty()) throw config_error("need at least one learner");
  for (const auto& aux : auxiliaries) {
    aux.validate();
    if (aux.p() != primary.p()) throw data_error("auxiliary column count differs from primary");
    if (aux.task != primary.task) throw data_error("auxiliary task differs from primary");
  }

  CandidatePool pool;
  pool.n_datasets = static_cast<int>(auxiliaries.size()) + 1;
  pool.n_learners = static_cast<int>(learners.size());
  const int n_cand = pool.size();

  PriorWeights priors =
      config.priors.has_value() ? *config.priors : PriorWeights::uniform(n_cand);
  if (priors.size() != n_cand) {
    throw config_error("priors have " + std::to_string(priors.size()) + " entries but the pool has " +
                       std::to_string(n_cand) + " candidates");
  }

  const int n_train = static_cast<int>(std::floor(config.split_ratio * primary.n()));
  const int n_test = primary.n() - n_train;
  std::vector<int> aux_sizes;
  aux_sizes.reserve(auxiliaries.size());
  for (const auto& aux : auxiliaries) aux_sizes.push_back(aux.n());
  const double lambda =
      config.lambda.has_value() ? *config.lambda : default_lambda(n_train, aux_sizes, std::max(n_test, 1));

  ArtModel model;
  model.config_used = config;
  model.task = primary.task;
  model.lambda_used = lambda;
  model.n_features = primary.p();

  std::vector<FittedModel> last_split_candidates;
  Vector weight_sum = Vector::Zero(n_cand);
  Vector running_avg = Vector::Constant(n_cand, 1.0 / n_cand);

  if (n_cand == 1) {
    model.final_weights = Vector::Ones(1);
    model.splits_executed = 0;
  } else {
    for (int s = 0; s < config.n_splits; ++s) {
      const SplitIndices split =
          split_primary(primary, config.split_ratio, derive_seed(config.seed, 0x5917, s));
      const Dataset train = primary.subset(split.train_idx);
      const Dataset test = primary.subset(split.test_idx);

      std::vector<FittedModel> fits(static_cast<std::size_t>(n_cand));
      Matrix losses(n_cand, test.n());
      parallel_for(n_cand, [&](int c) {
        const int m = pool.dataset_of(c);
        const int r = pool.learner_of(c);
        const Dataset training =
            m == 0 ? train : stack(train, auxiliaries[static_cast<std::size_t>(m - 1)]);
        FittedModel fit = learners[static_cast<std::size_t>(r)].fit(
            training, derive_seed(config.seed, static_cast<std::uint64_t>(s), static_cast<std::uint64_t>(c)));
        fit.label = candidate_label(learners[static_cast<std::size_t>(r)], m);
        const Vector pred = fit.predict_batch(test.features);
        losses.row(c) = evaluate_losses(loss, test.response, pred).transpose();
        fits[static_cast<std::size_t>(c)] = std::move(fit);
      });

      Vector split_weights;
      if (config.weight_mode == WeightMode::Sequential) {
        WeightTrace trace = sequential_weights(priors, losses, lambda);
        split_weights = trace.final;
        if (config.keep_traces) model.traces.push_back(std::move(trace));
      } else {
        Vector totals = Vector::Zero(n_cand);  // column order matches the sequential prefix sums
        for (Eigen::Index i = 0; i < losses.cols(); ++i) totals += losses.col(i);
        split_weights = simplified_weights(priors, totals, lambda);
        if (config.keep_traces) {
          WeightTrace trace;
          trace.lambda = lambda;
          trace.final = split_weights;
          model.traces.push_back(std::move(trace));
        }
      }

      weight_sum += split_weights;
      const Vector new_avg = weight_sum / (s + 1);
      const double change = (new_avg - running_avg).cwiseAbs().maxCoeff();
      running_avg = new_avg;
      last_split_candidates = std::move(fits);
      model.splits_executed = s + 1;
      if (s >= 1 && change < config.converge_tol) break;
    }
    model.final_weights = running_avg;
  }

  if (config.final_refit == FinalRefit::LastSplit && !last_split_candidates.empty()) {
    model.candidates = std::move(last_split_candidates);
  } else {
    // refit every candidate on the full primary data (and full stacks), keeping
    // the averaged weights learned on the held-out parts
    model.candidates.resize(static_cast<std::size_t>(n_cand));
    parallel_for(n_cand, [&](int c) {
      const int m = pool.dataset_of(c);
      const int r = pool.learner_of(c);
      const Dataset training =
          m == 0 ? primary : stack(primary, auxiliaries[static_cast<std::size_t>(m - 1)]);
      FittedModel fit = learners[static_cast<std::size_t>(r)].fit(
          training, derive_seed(config.seed, 0xF17A1, static_cast<std::uint64_t>(c)));
      fit.label = candidate_label(learners[static_cast<std::size_t>(r)], m);
      model.candidates[static_cast<std::size_t>(c)] = std::move(fit);
    });
  }
  return model;
}

}  // namespace detail

inline ArtModel art_fit(const Dataset& primary, const std::vector<Dataset>& auxiliaries,
                        const LearnerSpec& learner, const Loss& loss, const ArtConfig& config) {
  return detail::art_fit_impl(primary, auxiliaries, {learner}, loss, config);
}

// Multi-algorithm pool: one candidate per (dataset, learner) pair.
inline ArtModel art_iam_fit(const Dataset& primary, const std::vector<Dataset>& auxiliaries,
                            const std::vector<LearnerSpec>& learners, const Loss& loss,
                            const ArtConfig& config) {
  return detail::art_fit_impl(primary, auxiliaries, learners, loss, config);
}

struct VariableImportance {
  Vector vi;  // length p, each entry in [0, 1]
};

// Weighted fraction of candidates whose fitted model selected each feature.
inline VariableImportance variable_importance(const ArtModel& model) {
  if (model.candidates.empty()) throw config_error("variable_importance: empty model");
  Eigen::Index p = -1;
  for (const auto& cand : model.candidates) {
    if (const auto* lasso = std::get_if<LassoModel>(&cand.params)) {
      p = lasso->linear.coefficients.size();
      break;
    }
  }
  if (p < 0) {
    throw config_error(
        "variable importance is not well-defined: the learner performs no variable selection");
  }
  VariableImportance out;
  out.vi = Vector::Zero(p);
  for (int m = 0; m < model.n_candidates(); ++m) {
    const auto sel = model.candidates[static_cast<std::size_t>(m)].selected_vars();
    if (!sel.has_value()) {
      throw config_error(
          "variable importance is not well-defined: candidate '" +
          model.candidates[static_cast<std::size_t>(m)].label + "' selects no variables");
    }
    for (int j : *sel) out.vi[j] += model.final_weights[m];
  }
  return out;
}

}  // namespace art
