// Built-in learning algorithms: OLS, ridge, logistic regression (IRLS), lasso
// via cyclic coordinate descent (with optional K-fold CV over a penalty grid),
// k-NN, and stump gradient boosting on the logistic deviance.
#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "art/common.hpp"
#include "art/dataset.hpp"
#include "art/model.hpp"

namespace art {

namespace detail {

inline void require_task(const Dataset& d, Task t, const char* who) {
  if (d.task != t) {
    throw config_error(std::string(who) + ": expects a " + task_name(t) + " dataset");
  }
}

inline void require_both_classes(const Dataset& d, const char* who) {
  int n1 = 0;
  for (Eigen::Index i = 0; i < d.response.size(); ++i) n1 += d.response[i] == 1.0;
  if (n1 == 0 || n1 == d.n()) {
    throw data_error(std::string(who) + ": training data contains a single class");
  }
}

inline LinearModel solve_ridge(const Matrix& x, const Vector& y, double penalty, Link link) {
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  const Vector x_mean = x.colwise().mean();
  const double y_mean = y.mean();
  const Matrix xc = x.rowwise() - x_mean.transpose();
  const Vector yc = y.array() - y_mean;
  Matrix gram = xc.transpose() * xc;
  gram.diagonal().array() += penalty;
  LinearModel m;
  m.link = link;
  m.coefficients = gram.ldlt().solve(xc.transpose() * yc);
  if (!m.coefficients.allFinite()) {
    throw numeric_error("ridge solve produced non-finite coefficients");
  }
  m.intercept = y_mean - m.coefficients.dot(x_mean);
  (void)n;
  (void)p;
  return m;
}

}  // namespace detail

inline FittedModel fit_ridge(const Dataset& data, double penalty) {
  detail::require_task(data, Task::Regression, "fit_ridge");
  if (!(penalty >= 0.0) || !std::isfinite(penalty)) {
    throw config_error("ridge penalty must be nonnegative and finite");
  }
  FittedModel out;
  out.label = "ridge";
  out.params = detail::solve_ridge(data.features, data.response, penalty, Link::Identity);
  return out;
}

inline FittedModel fit_ols(const Dataset& data) {
  detail::require_task(data, Task::Regression, "fit_ols");
  if (data.n() < 2) throw data_error("fit_ols: need at least 2 rows");
  Matrix design(data.features.rows(), data.features.cols() + 1);
  design.col(0).setOnes();
  design.rightCols(data.features.cols()) = data.features;
  Eigen::ColPivHouseholderQR<Matrix> qr(design);
  FittedModel out;
  out.label = "ols";
  if (qr.rank() < design.cols()) {
    // singular design: documented fallback to a tiny ridge
    out.params = detail::solve_ridge(data.features, data.response, 1e-8, Link::Identity);
    return out;
  }
  const Vector beta = qr.solve(data.response);
  LinearModel m;
  m.link = Link::Identity;
  m.intercept = beta[0];
  m.coefficients = beta.tail(data.features.cols());
  out.params = m;
  return out;
}

// Penalized maximum likelihood by iteratively reweighted least squares. The
// small default ridge keeps separable problems finite.
inline FittedModel fit_logistic(const Dataset& data, int max_iter = 100, double tol = 1e-8,
                                double l2 = 1e-8) {
  detail::require_task(data, Task::Classification, "fit_logistic");
  detail::require_both_classes(data, "fit_logistic");
  if (max_iter < 1) throw config_error("fit_logistic: max_iter must be >= 1");
  if (!(l2 >= 0.0)) throw config_error("fit_logistic: l2 must be nonnegative");

  const Eigen::Index n = data.features.rows();
  const Eigen::Index p = data.features.cols();
  Matrix design(n, p + 1);
  design.col(0).setOnes();
  design.rightCols(p) = data.features;

  Vector beta = Vector::Zero(p + 1);
  Vector ridge_diag = Vector::Constant(p + 1, l2);
  ridge_diag[0] = 0.0;  // intercept unpenalized

  for (int it = 0; it < max_iter; ++it) {
    const Vector eta = design * beta;
    Vector mu(n), w(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      mu[i] = sigmoid(eta[i]);
      w[i] = std::max(mu[i] * (1.0 - mu[i]), 1e-10);
    }
    Matrix hess = design.transpose() * w.asDiagonal() * design;
    hess.diagonal() += ridge_diag;
    const Vector grad =
        design.transpose() * (data.response - mu) - ridge_diag.cwiseProduct(beta);
    const Vector delta = hess.ldlt().solve(grad);
    if (!delta.allFinite()) break;
    beta += delta;
    if (delta.cwiseAbs().maxCoeff() < tol) break;
  }

  LinearModel m;
  m.link = Link::Logit;
  m.intercept = beta[0];
  m.coefficients = beta.tail(p);
  FittedModel out;
  out.label = "logistic";
  out.params = m;
  return out;
}

namespace detail {

struct Standardization {
  Vector mean;
  Vector scale;  // sqrt of 1/n variance; 0 marks a constant column
};

inline Standardization standardize_columns(const Matrix& x) {
  Standardization s;
  s.mean = x.colwise().mean();
  s.scale.resize(x.cols());
  const double n = static_cast<double>(x.rows());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double var = (x.col(j).array() - s.mean[j]).square().sum() / n;
    s.scale[j] = var > 0.0 ? std::sqrt(var) : 0.0;
  }
  return s;
}

// Design standardized to zero mean and unit 1/n variance per column, built
// once and shared along a whole penalty path.
struct StandardizedDesign {
  Matrix z;
  Vector yc;
  Standardization std;
  double y_mean = 0.0;

  static StandardizedDesign build(const Matrix& x, const Vector& y) {
    StandardizedDesign d;
    d.std = standardize_columns(x);
    d.y_mean = y.mean();
    d.z.resize(x.rows(), x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      if (d.std.scale[j] > 0.0) {
        d.z.col(j) = (x.col(j).array() - d.std.mean[j]) / d.std.scale[j];
      } else {
        d.z.col(j).setZero();
      }
    }
    d.yc = y.array() - d.y_mean;
    return d;
  }

  double lambda_max() const {
    const double inv_n = 1.0 / static_cast<double>(z.rows());
    double lam = 0.0;
    for (Eigen::Index j = 0; j < z.cols(); ++j) {
      lam = std::max(lam, std::abs(z.col(j).dot(yc)) * inv_n);
    }
    return lam;
  }
};

// Cyclic coordinate descent for (1/2n)|yc - Z b|^2 + lambda |b|_1 along a
// descending penalty sequence. Warm starts carry (b, residual) between
// points; full sweeps are screened with the sequential strong rule and every
// returned solution is verified against the stationarity conditions, with
// violators re-entering the working set. The pass budget caps the degenerate
// n <= p regime at vanishing penalties.
class LassoPathSolver {
 public:
  explicit LassoPathSolver(const StandardizedDesign& d, double tol = 1e-7, int max_pass = 2000)
      : d_(d),
        tol_(tol),
        max_pass_(max_pass),
        inv_n_(1.0 / static_cast<double>(d.z.rows())),
        b_(Vector::Zero(d.z.cols())),
        r_(d.yc),
        prev_lambda_(std::numeric_limits<double>::infinity()) {}

  const Vector& coefficients() const { return b_; }

  // Solves at `lambda`, assuming lambda <= previous lambda (descending path).
  const Vector& solve(double lambda) {
    const Eigen::Index p = d_.z.cols();
    r_ = d_.yc - d_.z * b_;  // refresh to stop incremental drift

    std::vector<char> in_set(static_cast<std::size_t>(p), 0);
    std::vector<int> working;
    working.reserve(static_cast<std::size_t>(p));
    const double screen =
        std::isfinite(prev_lambda_) ? 2.0 * lambda - prev_lambda_ : 2.0 * lambda - d_.lambda_max();
    for (Eigen::Index j = 0; j < p; ++j) {
      if (d_.std.scale[j] <= 0.0) continue;
      if (b_[j] != 0.0 || std::abs(d_.z.col(j).dot(r_)) * inv_n_ >= screen) {
        in_set[static_cast<std::size_t>(j)] = 1;
        working.push_back(static_cast<int>(j));
      }
    }

    int pass = 0;
    for (;;) {
      while (pass < max_pass_) {
        ++pass;
        if (sweep(working, lambda) < tol_) break;
      }
      // stationarity check over the screened-out coordinates
      bool clean = true;
      for (Eigen::Index j = 0; j < p; ++j) {
        if (in_set[static_cast<std::size_t>(j)] || d_.std.scale[j] <= 0.0) continue;
        if (std::abs(d_.z.col(j).dot(r_)) * inv_n_ > lambda) {
          in_set[static_cast<std::size_t>(j)] = 1;
          working.push_back(static_cast<int>(j));
          clean = false;
        }
      }
      if (clean || pass >= max_pass_) break;
    }
    prev_lambda_ = lambda;
    return b_;
  }

 private:
  double sweep(const std::vector<int>& cols, double lambda) {
    double max_change = 0.0;
    for (int j : cols) {
      const double old = b_[j];
      const double rho = old + inv_n_ * d_.z.col(j).dot(r_);
      double next = 0.0;
      if (rho > lambda) {
        next = rho - lambda;
      } else if (rho < -lambda) {
        next = rho + lambda;
      }
      if (next != old) {
        r_ += d_.z.col(j) * (old - next);
        b_[j] = next;
        max_change = std::max(max_change, std::abs(next - old));
      }
    }
    return max_change;
  }

  const StandardizedDesign& d_;
  double tol_;
  int max_pass_;
  double inv_n_;
  Vector b_;
  Vector r_;
  double prev_lambda_;
};

inline LassoModel lasso_model_from(const StandardizedDesign& d, const Vector& b, double lambda) {
  LassoModel m;
  m.lambda_reg = lambda;
  m.linear.link = Link::Identity;
  m.linear.coefficients.resize(b.size());
  for (Eigen::Index j = 0; j < b.size(); ++j) {
    m.linear.coefficients[j] = d.std.scale[j] > 0.0 ? b[j] / d.std.scale[j] : 0.0;
    if (std::abs(m.linear.coefficients[j]) > 1e-12) {
      m.active_set.push_back(static_cast<int>(j));
    }
  }
  m.linear.intercept = d.y_mean - m.linear.coefficients.dot(d.std.mean);
  return m;
}

inline double lasso_lambda_max(const Matrix& x, const Vector& y) {
  return StandardizedDesign::build(x, y).lambda_max();
}

}  // namespace detail

inline FittedModel fit_lasso(const Dataset& data, double lambda_reg) {
  detail::require_task(data, Task::Regression, "fit_lasso");
  if (!(lambda_reg >= 0.0) || !std::isfinite(lambda_reg)) {
    throw config_error("lasso penalty must be nonnegative and finite");
  }
  const auto design = detail::StandardizedDesign::build(data.features, data.response);
  detail::LassoPathSolver solver(design);
  FittedModel out;
  out.label = "lasso";
  out.params = detail::lasso_model_from(design, solver.solve(lambda_reg), lambda_reg);
  return out;
}

// K-fold cross-validation over a descending log-spaced grid from lambda_max
// down to 1e-3 * lambda_max (1e-2 when the data are not overdetermined, where
// the unpenalized limit degenerates), warm-starting along the path; ties
// prefer the larger penalty. Refits on the full data at the selected value.
inline FittedModel cv_lasso(const Dataset& data, int n_folds = 5, int grid_size = 30,
                            std::uint64_t seed = 0, bool one_se_rule = false) {
  detail::require_task(data, Task::Regression, "cv_lasso");
  if (n_folds < 2) throw config_error("cv_lasso: need at least 2 folds");
  if (data.n() < n_folds) throw config_error("cv_lasso: fewer rows than folds");
  if (grid_size < 2) throw config_error("cv_lasso: grid needs at least 2 values");

  const double lam_max = std::max(detail::lasso_lambda_max(data.features, data.response), 1e-12);
  const double min_ratio = data.n() > data.p() ? 1e-3 : 1e-2;
  Vector grid(grid_size);
  const double log_max = std::log(lam_max);
  const double log_min = std::log(lam_max * min_ratio);
  for (int g = 0; g < grid_size; ++g) {
    grid[g] = std::exp(log_max + (log_min - log_max) * g / (grid_size - 1));
  }

  Rng rng(seed);
  const std::vector<int> perm = rng.permutation(data.n());
  std::vector<int> fold_of(static_cast<std::size_t>(data.n()));
  for (int i = 0; i < data.n(); ++i) fold_of[static_cast<std::size_t>(perm[i])] = i % n_folds;

  Matrix sq_err = Matrix::Zero(grid_size, n_folds);
  Vector fold_count = Vector::Zero(n_folds);
  for (int f = 0; f < n_folds; ++f) {
    std::vector<int> train_rows, test_rows;
    for (int i = 0; i < data.n(); ++i) {
      (fold_of[static_cast<std::size_t>(i)] == f ? test_rows : train_rows).push_back(i);
    }
    const Dataset train = data.subset(train_rows);
    const Dataset held = data.subset(test_rows);
    fold_count[f] = static_cast<double>(test_rows.size());
    const auto design = detail::StandardizedDesign::build(train.features, train.response);
    detail::LassoPathSolver solver(design, 1e-5, 300);
    // once the active set saturates the fold, further path points only overfit;
    // freeze the model there instead of grinding the degenerate limit
    const int df_cap = static_cast<int>(0.9 * static_cast<double>(train.n()));
    Vector b = Vector::Zero(data.p());
    bool saturated = false;
    for (int g = 0; g < grid_size; ++g) {
      if (!saturated) {
        b = solver.solve(grid[g]);
        int nnz = 0;
        for (Eigen::Index j = 0; j < b.size(); ++j) nnz += b[j] != 0.0;
        saturated = nnz >= df_cap;
      }
      const LassoModel m = detail::lasso_model_from(design, b, grid[g]);
      const Vector pred = m.predict_batch(held.features);
      sq_err(g, f) = (pred - held.response).squaredNorm();
    }
  }

  // mean held-out MSE per grid value, with its standard error across folds
  Vector cv_mse(grid_size), cv_se(grid_size);
  for (int g = 0; g < grid_size; ++g) {
    Vector fold_mse = sq_err.row(g).transpose().cwiseQuotient(fold_count);
    cv_mse[g] = fold_mse.mean();
    const double var = (fold_mse.array() - cv_mse[g]).square().sum() / (n_folds - 1);
    cv_se[g] = std::sqrt(var / n_folds);
  }
  int best = 0;
  for (int g = 1; g < grid_size; ++g) {
    if (cv_mse[g] < cv_mse[best]) best = g;
  }
  if (one_se_rule) {
    const double cutoff = cv_mse[best] + cv_se[best];
    for (int g = 0; g <= best; ++g) {
      if (cv_mse[g] <= cutoff) {
        best = g;  // largest penalty within one SE of the minimum
        break;
      }
    }
  }

  const double chosen = grid[best];
  const auto design = detail::StandardizedDesign::build(data.features, data.response);
  detail::LassoPathSolver solver(design);
  Vector b;
  for (int g = 0; g <= best; ++g) b = solver.solve(grid[g]);  // warm path down to the pick
  FittedModel out;
  out.label = "cv-lasso";
  out.params = detail::lasso_model_from(design, b, chosen);
  return out;
}

inline FittedModel fit_knn(const Dataset& data, int k) {
  detail::require_task(data, Task::Classification, "fit_knn");
  if (k < 1 || k > data.n()) {
    throw config_error("fit_knn: k must lie in [1, n], got k=" + std::to_string(k) +
                       " with n=" + std::to_string(data.n()));
  }
  KnnModel m;
  m.train_x = data.features;
  m.train_y = data.response;
  m.k = k;
  FittedModel out;
  out.label = "knn";
  out.params = m;
  return out;
}

// Gradient boosting with depth-1 trees: each round fits the stump minimizing
// squared error to the current negative gradient y - sigmoid(F), scanning
// midpoint thresholds per feature.
inline FittedModel fit_adaboost_stumps(const Dataset& data, int n_rounds = 100,
                                       double learning_rate = 0.1) {
  detail::require_task(data, Task::Classification, "fit_adaboost_stumps");
  detail::require_both_classes(data, "fit_adaboost_stumps");
  if (n_rounds < 0) throw config_error("fit_adaboost_stumps: n_rounds must be >= 0");
  if (!(learning_rate > 0.0)) throw config_error("fit_adaboost_stumps: learning rate must be positive");

  const Eigen::Index n = data.features.rows();
  const Eigen::Index p = data.features.cols();

  // per-feature sort order, computed once
  std::vector<std::vector<int>> order(static_cast<std::size_t>(p));
  for (Eigen::Index j = 0; j < p; ++j) {
    auto& ord = order[static_cast<std::size_t>(j)];
    ord.resize(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) ord[static_cast<std::size_t>(i)] = static_cast<int>(i);
    std::sort(ord.begin(), ord.end(), [&](int a, int b) {
      const double va = data.features(a, j), vb = data.features(b, j);
      return va != vb ? va < vb : a < b;
    });
  }

  StumpEnsemble ens;
  ens.learning_rate = learning_rate;
  ens.n_rounds = n_rounds;
  const double rate = clip_prob(data.response.mean());
  ens.base_score = std::log(rate / (1.0 - rate));

  Vector f = Vector::Constant(n, ens.base_score);
  for (int round = 0; round < n_rounds; ++round) {
    Vector g(n);
    double g_total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      g[i] = data.response[i] - sigmoid(f[i]);
      g_total += g[i];
    }

    bool found = false;
    StumpEnsemble::Stump best;
    double best_gain = -1.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      const auto& ord = order[static_cast<std::size_t>(j)];
      double left_sum = 0.0;
      for (Eigen::Index c = 0; c + 1 < n; ++c) {
        const int i = ord[static_cast<std::size_t>(c)];
        const int nxt = ord[static_cast<std::size_t>(c + 1)];
        left_sum += g[i];
        const double v = data.features(i, j), vn = data.features(nxt, j);
        if (v == vn) continue;
        const double n_left = static_cast<double>(c + 1);
        const double n_right = static_cast<double>(n) - n_left;
        const double right_sum = g_total - left_sum;
        const double gain = left_sum * left_sum / n_left + right_sum * right_sum / n_right;
        if (gain > best_gain) {
          best_gain = gain;
          best.feature = static_cast<int>(j);
          best.threshold = 0.5 * (v + vn);
          best.left = left_sum / n_left;
          best.right = right_sum / n_right;
          found = true;
        }
      }
    }
    if (!found) break;  // every feature is constant

    for (Eigen::Index i = 0; i < n; ++i) {
      f[i] += learning_rate *
              (data.features(i, best.feature) <= best.threshold ? best.left : best.right);
    }
    ens.stumps.push_back(best);
  }

  FittedModel out;
  out.label = "stumps";
  out.params = ens;
  return out;
}

// Hyperparameters for the named learners; unused fields are ignored.
struct LearnerOptions {
  double ridge_penalty = 1.0;
  std::optional<double> lasso_lambda;  // absent: choose by cross-validation
  int cv_folds = 5;
  int cv_grid_size = 30;
  bool lasso_one_se = false;
  int knn_k = 5;
  int boost_rounds = 100;
  double boost_learning_rate = 0.1;
  int logistic_max_iter = 100;
  double logistic_tol = 1e-8;
  double logistic_l2 = 1e-8;
};

inline LearnerSpec make_learner(const std::string& name, const LearnerOptions& opt = {}) {
  LearnerSpec spec;
  spec.name = name;
  if (name == "ols") {
    spec.fit = [](const Dataset& d, std::uint64_t) { return fit_ols(d); };
  } else if (name == "ridge") {
    spec.fit = [opt](const Dataset& d, std::uint64_t) { return fit_ridge(d, opt.ridge_penalty); };
  } else if (name == "logistic") {
    spec.fit = [opt](const Dataset& d, std::uint64_t) {
      return fit_logistic(d, opt.logistic_max_iter, opt.logistic_tol, opt.logistic_l2);
    };
  } else if (name == "lasso") {
    spec.supports_selection = true;
    if (opt.lasso_lambda.has_value()) {
      const double lam = *opt.lasso_lambda;
      spec.fit = [lam](const Dataset& d, std::uint64_t) { return fit_lasso(d, lam); };
    } else {
      spec.fit = [opt](const Dataset& d, std::uint64_t seed) {
        return cv_lasso(d, opt.cv_folds, opt.cv_grid_size, seed, opt.lasso_one_se);
      };
    }
  } else if (name == "knn") {
    spec.fit = [opt](const Dataset& d, std::uint64_t) { return fit_knn(d, opt.knn_k); };
  } else if (name == "stumps") {
    spec.fit = [opt](const Dataset& d, std::uint64_t) {
      return fit_adaboost_stumps(d, opt.boost_rounds, opt.boost_learning_rate);
    };
  } else {
    throw config_error("unknown learner '" + name +
                       "' (valid: ols, ridge, logistic, lasso, knn, stumps)");
  }
  return spec;
}

}  // namespace art
