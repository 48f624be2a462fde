// Exponential-weight aggregation: sequential cumulative weights over the test
// positions, their positional average as final weights, and the one-shot
// simplified variant. All softmax evaluations run in the log domain.
#pragma once

#include <cmath>
#include <string>

#include "art/common.hpp"

namespace art {

struct PriorWeights {
  Vector pi;  // one entry per candidate, nonnegative, sums to 1

  static PriorWeights uniform(int n_candidates) {
    if (n_candidates < 1) throw config_error("need at least one candidate");
    PriorWeights p;
    p.pi = Vector::Constant(n_candidates, 1.0 / n_candidates);
    return p;
  }

  static PriorWeights from(Vector raw) {
    if (raw.size() < 1) throw config_error("need at least one prior weight");
    if (!raw.allFinite()) throw config_error("priors must be finite");
    if ((raw.array() < 0.0).any()) throw config_error("priors must be nonnegative");
    const double total = raw.sum();
    if (!(total > 0.0)) throw config_error("priors must not all be zero");
    PriorWeights p;
    p.pi = raw / total;
    return p;
  }

  int size() const { return static_cast<int>(pi.size()); }
};

struct WeightTrace {
  Matrix sequential;         // candidates x test positions; each column sums to 1
  Vector final;              // row means of `sequential`
  double lambda = 1.0;
  Matrix cumulative_losses;  // candidates x test positions, inclusive prefix sums
};

namespace detail {

// softmax(log_w) with -inf entries treated as exact zeros.
inline Vector softmax_log(const Vector& log_w) {
  const double mx = log_w.maxCoeff();
  if (!std::isfinite(mx)) throw numeric_error("softmax: no candidate has positive weight");
  Vector w(log_w.size());
  double total = 0.0;
  for (Eigen::Index m = 0; m < log_w.size(); ++m) {
    w[m] = std::isfinite(log_w[m]) ? std::exp(log_w[m] - mx) : 0.0;
    total += w[m];
  }
  w /= total;
  return w;
}

inline void check_losses(const Matrix& losses) {
  if (losses.cols() < 1) throw data_error("weighting: empty test part");
  if (!losses.allFinite()) throw data_error("weighting: non-finite loss");
  if ((losses.array() < 0.0).any()) throw data_error("weighting: negative loss");
}

inline Vector log_priors(const PriorWeights& priors) {
  Vector lp(priors.pi.size());
  for (Eigen::Index m = 0; m < priors.pi.size(); ++m) {
    lp[m] = priors.pi[m] > 0.0 ? std::log(priors.pi[m])
                               : -std::numeric_limits<double>::infinity();
  }
  return lp;
}

}  // namespace detail

// Column i holds softmax over candidates of log pi_m - lambda * (loss sum over
// positions 0..i-1); column 0 is the prior itself. `final` averages the
// columns, so every candidate keeps at least pi_m / n_test of the final mass.
inline WeightTrace sequential_weights(const PriorWeights& priors,
                                      const Matrix& test_losses, double lambda) {
  if (priors.size() != test_losses.rows()) {
    throw data_error("weighting: priors and loss rows disagree");
  }
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw config_error("lambda must be positive and finite");
  detail::check_losses(test_losses);

  const Eigen::Index n_cand = test_losses.rows();
  const Eigen::Index n_test = test_losses.cols();
  WeightTrace trace;
  trace.lambda = lambda;
  trace.sequential.resize(n_cand, n_test);
  trace.cumulative_losses.resize(n_cand, n_test);

  const Vector log_pi = detail::log_priors(priors);
  Vector cum = Vector::Zero(n_cand);
  for (Eigen::Index i = 0; i < n_test; ++i) {
    trace.sequential.col(i) = detail::softmax_log(log_pi - lambda * cum);
    cum += test_losses.col(i);
    trace.cumulative_losses.col(i) = cum;
  }
  trace.final = trace.sequential.rowwise().mean();
  return trace;
}

// One-shot weights w_m proportional to pi_m * exp(-lambda * total_loss_m);
// equals the sequential column one past the last test position.
inline Vector simplified_weights(const PriorWeights& priors, const Vector& total_test_losses,
                                 double lambda) {
  if (priors.size() != total_test_losses.size()) {
    throw data_error("weighting: priors and loss totals disagree");
  }
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw config_error("lambda must be positive and finite");
  if (!total_test_losses.allFinite()) throw data_error("weighting: non-finite loss");
  if ((total_test_losses.array() < 0.0).any()) throw data_error("weighting: negative loss");
  return detail::softmax_log(detail::log_priors(priors) - lambda * total_test_losses);
}

// lambda = 1 unless some auxiliary sample is much larger (over 10x) than the
// primary sample, in which case (n_train + max aux size) / n_test.
inline double default_lambda(int n_train, const std::vector<int>& aux_sizes, int n_test) {
  if (n_test < 1) throw config_error("default_lambda: need at least one test row");
  int max_aux = 0;
  for (int s : aux_sizes) max_aux = std::max(max_aux, s);
  const int n_primary = n_train + n_test;
  if (max_aux > 10 * n_primary) {
    return (static_cast<double>(n_train) + max_aux) / n_test;
  }
  return 1.0;
}

}  // namespace art
