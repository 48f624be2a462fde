// Synthetic data generators and the replicated experiment runner that
// produces per-replication error tables and their summaries.
#pragma once

#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "art/common.hpp"
#include "art/dataset.hpp"
#include "art/learners.hpp"
#include "art/pipeline.hpp"

namespace art {

enum class GeneratorKind { LinearRegression, LogisticClassification, GaussianMixture, SparseLinear };

inline const char* generator_name(GeneratorKind k) {
  switch (k) {
    case GeneratorKind::LinearRegression: return "linear-regression";
    case GeneratorKind::LogisticClassification: return "logistic-classification";
    case GeneratorKind::GaussianMixture: return "gaussian-mixture";
    case GeneratorKind::SparseLinear: return "sparse-linear";
  }
  return "?";
}

struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::LinearRegression;
  int p = 10;
  int n_primary = 50;
  int n_aux = 50;
  int M = 1;
  int n_adversarial = 0;
  double xi = 0.5;
  int n_test = 5000;
  std::uint64_t seed = 0;

  void validate() const {
    if (p < 1 || n_primary < 1 || n_aux < 1 || n_test < 1) {
      throw config_error("generator sizes must be positive");
    }
    if (M < 0 || n_adversarial < 0) throw config_error("M and n_adversarial must be >= 0");
    if (!(xi >= 0.0) || !std::isfinite(xi)) throw config_error("xi must be finite and >= 0");
    if (kind == GeneratorKind::SparseLinear) {
      if (p < 28) throw config_error("sparse generator needs p >= 28 (16 active + 12 shifted)");
      if (n_adversarial > 0) throw config_error("sparse generator has no adversarial variant");
    }
  }
};

// Coefficient vectors actually used by the linear-model generators; exposed
// for diagnostics and distribution checks.
struct GeneratorDraws {
  Vector beta;
  std::vector<Vector> aux_coefs;
  std::vector<Vector> adv_coefs;
};

struct GeneratedData {
  Dataset primary;
  std::vector<Dataset> auxiliaries;
  std::vector<Dataset> adversarials;
  Dataset test;
  std::optional<std::vector<int>> truth;   // active coordinates, when defined
  std::optional<GeneratorDraws> draws;     // linear kinds only
};

namespace detail {

// Cholesky factor of the AR(1) covariance 0.5^|i-j|.
inline Matrix ar1_cholesky(int p) {
  Matrix sigma(p, p);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) sigma(i, j) = std::pow(0.5, std::abs(i - j));
  }
  return Matrix(sigma.llt().matrixL());
}

// Rows drawn N(0, I), filled row-major, then correlated via the factor.
inline Matrix gaussian_rows(Rng& rng, int n, int p, const Matrix* chol_l) {
  Matrix z(n, p);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) z(i, j) = rng.normal();
  }
  if (chol_l != nullptr) return z * chol_l->transpose();
  return z;
}

inline Dataset linear_dataset(Rng& rng, int n, const Vector& coef, const Matrix* chol_l) {
  const int p = static_cast<int>(coef.size());
  Matrix x = gaussian_rows(rng, n, p, chol_l);
  Vector y = x * coef;
  for (int i = 0; i < n; ++i) y[i] += rng.normal();
  return Dataset{std::move(x), std::move(y), Task::Regression};
}

inline Dataset logistic_dataset(Rng& rng, int n, const Vector& coef, const Matrix* chol_l) {
  const int p = static_cast<int>(coef.size());
  Matrix x = gaussian_rows(rng, n, p, chol_l);
  Vector y(n);
  for (int i = 0; i < n; ++i) y[i] = rng.bernoulli(sigmoid(coef.dot(x.row(i)))) ? 1.0 : 0.0;
  return Dataset{std::move(x), std::move(y), Task::Classification};
}

struct MixtureParams {
  Matrix means_pos;  // 5 x p component means for class 1
  Matrix means_neg;  // 5 x p component means for class 0
};

inline MixtureParams mixture_params(Rng& rng, int p, double mu_level) {
  Vector direction = Vector::Zero(p);
  for (int j = 0; j < std::min(p, 5); ++j) direction[j] = 1.0;
  MixtureParams mp;
  mp.means_pos.resize(5, p);
  mp.means_neg.resize(5, p);
  for (int c = 0; c < 5; ++c) {
    for (int j = 0; j < p; ++j) mp.means_pos(c, j) = mu_level * direction[j] + rng.normal();
  }
  for (int c = 0; c < 5; ++c) {
    for (int j = 0; j < p; ++j) mp.means_neg(c, j) = -mu_level * direction[j] + rng.normal();
  }
  return mp;
}

// Balanced classes; a uniformly chosen component per row.
inline Dataset mixture_dataset(Rng& rng, int n, const MixtureParams& mp, const Matrix& chol_l) {
  const int p = static_cast<int>(mp.means_pos.cols());
  Matrix x(n, p);
  Vector y(n);
  for (int i = 0; i < n; ++i) {
    const int cls = i % 2;
    const int comp = static_cast<int>(rng.uniform_int(5));
    Vector z(p);
    for (int j = 0; j < p; ++j) z[j] = rng.normal();
    const auto& mean = cls == 1 ? mp.means_pos.row(comp) : mp.means_neg.row(comp);
    x.row(i) = mean + (chol_l * z).transpose();
    y[i] = cls;
  }
  return Dataset{std::move(x), std::move(y), Task::Classification};
}

// 12 distinct coordinates from {16, ..., p-1}.
inline std::vector<int> shifted_coordinates(Rng& rng, int p) {
  std::vector<int> pool;
  pool.reserve(static_cast<std::size_t>(p - 16));
  for (int j = 16; j < p; ++j) pool.push_back(j);
  std::vector<int> chosen;
  for (int t = 0; t < 12; ++t) {
    const auto idx = static_cast<std::size_t>(rng.uniform_int(pool.size()));
    chosen.push_back(pool[idx]);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(idx));
  }
  return chosen;
}

}  // namespace detail

inline GeneratedData generate(const GeneratorSpec& spec) {
  spec.validate();
  GeneratedData out;

  switch (spec.kind) {
    case GeneratorKind::LinearRegression:
    case GeneratorKind::LogisticClassification: {
      const Matrix chol_l = detail::ar1_cholesky(spec.p);
      Rng coef_rng(derive_seed(spec.seed, 1));
      Vector beta(spec.p);
      for (int j = 0; j < spec.p; ++j) beta[j] = 1.0 + coef_rng.normal();
      // one coefficient perturbation of total scale xi per generated instance
      // (per-coordinate standard deviation xi / sqrt(p)), shared by every
      // auxiliary set; adversarial sets use its exact negation
      Rng shift_rng(derive_seed(spec.seed, 14));
      const double coord_sd = spec.xi / std::sqrt(static_cast<double>(spec.p) / 2.0);
      Vector aux_coef = beta;
      for (int j = 0; j < spec.p; ++j) aux_coef[j] += coord_sd * shift_rng.normal();
      const Vector adv_coef = -aux_coef;
      const bool regression = spec.kind == GeneratorKind::LinearRegression;
      const auto make = [&](Rng& rng, int n, const Vector& coef) {
        return regression ? detail::linear_dataset(rng, n, coef, &chol_l)
                          : detail::logistic_dataset(rng, n, coef, &chol_l);
      };
      Rng primary_rng(derive_seed(spec.seed, 2));
      out.primary = make(primary_rng, spec.n_primary, beta);
      Rng test_rng(derive_seed(spec.seed, 3));
      out.test = make(test_rng, spec.n_test, beta);
      GeneratorDraws draws;
      draws.beta = beta;
      for (int m = 0; m < spec.M; ++m) {
        Rng rng(derive_seed(spec.seed, 10, static_cast<std::uint64_t>(m)));
        out.auxiliaries.push_back(make(rng, spec.n_aux, aux_coef));
        draws.aux_coefs.push_back(aux_coef);
      }
      for (int k = 0; k < spec.n_adversarial; ++k) {
        Rng rng(derive_seed(spec.seed, 11, static_cast<std::uint64_t>(k)));
        out.adversarials.push_back(make(rng, spec.n_primary, adv_coef));
        draws.adv_coefs.push_back(adv_coef);
      }
      out.draws = std::move(draws);
      break;
    }
    case GeneratorKind::GaussianMixture: {
      const Matrix chol_l = detail::ar1_cholesky(spec.p);
      Rng primary_param_rng(derive_seed(spec.seed, 1));
      const auto primary_params = detail::mixture_params(primary_param_rng, spec.p, 1.0);
      Rng primary_rng(derive_seed(spec.seed, 2));
      out.primary = detail::mixture_dataset(primary_rng, spec.n_primary, primary_params, chol_l);
      Rng test_rng(derive_seed(spec.seed, 3));
      out.test = detail::mixture_dataset(test_rng, spec.n_test, primary_params, chol_l);
      for (int m = 0; m < spec.M; ++m) {
        Rng param_rng(derive_seed(spec.seed, 12, static_cast<std::uint64_t>(m)));
        const auto params = detail::mixture_params(param_rng, spec.p, 1.0 + spec.xi);
        Rng rng(derive_seed(spec.seed, 10, static_cast<std::uint64_t>(m)));
        out.auxiliaries.push_back(detail::mixture_dataset(rng, spec.n_aux, params, chol_l));
      }
      for (int k = 0; k < spec.n_adversarial; ++k) {
        Rng param_rng(derive_seed(spec.seed, 13, static_cast<std::uint64_t>(k)));
        const auto params = detail::mixture_params(param_rng, spec.p, -1.0 - spec.xi);
        Rng rng(derive_seed(spec.seed, 11, static_cast<std::uint64_t>(k)));
        out.adversarials.push_back(detail::mixture_dataset(rng, spec.n_primary, params, chol_l));
      }
      break;
    }
    case GeneratorKind::SparseLinear: {
      Vector beta = Vector::Zero(spec.p);
      for (int j = 0; j < 16; ++j) beta[j] = 0.3;
      Rng primary_rng(derive_seed(spec.seed, 2));
      out.primary = detail::linear_dataset(primary_rng, spec.n_primary, beta, nullptr);
      Rng test_rng(derive_seed(spec.seed, 3));
      out.test = detail::linear_dataset(test_rng, spec.n_test, beta, nullptr);
      GeneratorDraws draws;
      draws.beta = beta;
      for (int m = 0; m < spec.M; ++m) {
        Rng set_rng(derive_seed(spec.seed, 4, static_cast<std::uint64_t>(m)));
        Vector coef = beta;
        for (int j = 0; j < 16; ++j) coef[j] += 2.0 * spec.xi;
        for (int j : detail::shifted_coordinates(set_rng, spec.p)) coef[j] += 2.0 * spec.xi;
        Rng rng(derive_seed(spec.seed, 10, static_cast<std::uint64_t>(m)));
        out.auxiliaries.push_back(detail::linear_dataset(rng, spec.n_aux, coef, nullptr));
        draws.aux_coefs.push_back(coef);
      }
      out.truth = std::vector<int>{};
      for (int j = 0; j < 16; ++j) out.truth->push_back(j);
      out.draws = std::move(draws);
      break;
    }
  }
  return out;
}

enum class Method { PrimaryOnly, Pooled, ART, ART_IAM };

inline std::string base_label(const std::string& learner_name) {
  if (learner_name == "ols") return "LS";
  if (learner_name == "logistic") return "logit";
  if (learner_name == "knn") return "kNN";
  if (learner_name == "stumps") return "boost";
  return learner_name;
}

inline std::string method_label(Method m, const std::string& learner_name) {
  switch (m) {
    case Method::PrimaryOnly: return base_label(learner_name);
    case Method::Pooled: return "pool-" + base_label(learner_name);
    case Method::ART: return "ART-" + base_label(learner_name);
    case Method::ART_IAM: return "ART-I-AM";
  }
  return "?";
}

struct ExperimentRow {
  std::string method;
  int M = 0;
  double xi = 0.0;
  int replication = 0;
  double error = 0.0;
};

struct ExperimentResult {
  std::vector<ExperimentRow> rows;
};

namespace detail {

inline double test_error(Task task, const Vector& pred, const Vector& truth) {
  if (task == Task::Regression) {
    return (pred - truth).squaredNorm() / static_cast<double>(truth.size());
  }
  double wrong = 0.0;
  for (Eigen::Index i = 0; i < truth.size(); ++i) {
    wrong += (pred[i] > 0.5 ? 1.0 : 0.0) != truth[i];
  }
  return wrong / static_cast<double>(truth.size());
}

inline std::vector<Dataset> all_externals(const GeneratedData& data) {
  std::vector<Dataset> ext = data.auxiliaries;
  ext.insert(ext.end(), data.adversarials.begin(), data.adversarials.end());
  return ext;
}

}  // namespace detail

// One fitted method per replication; rows come back sorted by
// (method, M, xi, replication). Replications run in parallel.
inline ExperimentResult run_experiment(const GeneratorSpec& spec, const std::vector<Method>& methods,
                                       const std::vector<LearnerSpec>& learners, int replications,
                                       const ArtConfig& art_base = {}) {
  spec.validate();
  if (replications < 1) throw config_error("replications must be >= 1");
  if (learners.empty()) throw config_error("run_experiment: need at least one learner");
  for (Method m : methods) {
    if (m == Method::ART_IAM && learners.size() < 2) {
      throw config_error("ART_IAM needs several learners");
    }
  }
  const Loss loss = spec.kind == GeneratorKind::LinearRegression ||
                            spec.kind == GeneratorKind::SparseLinear
                        ? Loss::squared()
                        : Loss::cross_entropy();

  ExperimentResult result;
  result.rows.resize(methods.size() * static_cast<std::size_t>(replications));
  parallel_for(replications, [&](int rep) {
    GeneratorSpec rep_spec = spec;
    rep_spec.seed = derive_seed(spec.seed, 0xEB, static_cast<std::uint64_t>(rep));
    const GeneratedData data = generate(rep_spec);
    const Task task = data.primary.task;

    for (std::size_t k = 0; k < methods.size(); ++k) {
      double error = 0.0;
      switch (methods[k]) {
        case Method::PrimaryOnly: {
          const FittedModel fit =
              learners[0].fit(data.primary, derive_seed(rep_spec.seed, 0x51, 0));
          error = detail::test_error(task, fit.predict_batch(data.test.features),
                                     data.test.response);
          break;
        }
        case Method::Pooled: {
          Dataset pooled = data.primary;
          for (const Dataset& ext : detail::all_externals(data)) pooled = stack(pooled, ext);
          const FittedModel fit = learners[0].fit(pooled, derive_seed(rep_spec.seed, 0x51, 1));
          error = detail::test_error(task, fit.predict_batch(data.test.features),
                                     data.test.response);
          break;
        }
        case Method::ART:
        case Method::ART_IAM: {
          ArtConfig cfg = art_base;
          cfg.seed = derive_seed(rep_spec.seed, 0x51, methods[k] == Method::ART ? 2 : 3);
          const std::vector<LearnerSpec> pool_learners =
              methods[k] == Method::ART ? std::vector<LearnerSpec>{learners[0]} : learners;
          const ArtModel model =
              detail::art_fit_impl(data.primary, detail::all_externals(data), pool_learners, loss, cfg);
          error = detail::test_error(task, art_predict_batch(model, data.test.features),
                                     data.test.response);
          break;
        }
      }
      result.rows[static_cast<std::size_t>(rep) * methods.size() + k] =
          ExperimentRow{method_label(methods[k], learners[0].name), spec.M, spec.xi, rep, error};
    }
  });

  std::sort(result.rows.begin(), result.rows.end(), [](const ExperimentRow& a, const ExperimentRow& b) {
    return std::tie(a.method, a.M, a.xi, a.replication) < std::tie(b.method, b.M, b.xi, b.replication);
  });
  return result;
}

struct SummaryRow {
  std::string method;
  int M = 0;
  double xi = 0.0;
  double mean = 0.0;
  std::optional<double> sd;  // absent when a single replication
  std::optional<double> se;
  int n_reps = 0;
};

inline std::vector<SummaryRow> summarize(const ExperimentResult& result) {
  if (result.rows.empty()) throw data_error("summarize: empty result");
  std::map<std::tuple<std::string, int, double>, std::vector<double>> groups;
  for (const auto& row : result.rows) {
    groups[{row.method, row.M, row.xi}].push_back(row.error);
  }
  std::vector<SummaryRow> out;
  out.reserve(groups.size());
  for (const auto& [key, errors] : groups) {
    SummaryRow s;
    s.method = std::get<0>(key);
    s.M = std::get<1>(key);
    s.xi = std::get<2>(key);
    s.n_reps = static_cast<int>(errors.size());
    double sum = 0.0;
    for (double e : errors) sum += e;
    s.mean = sum / s.n_reps;
    if (s.n_reps > 1) {
      double ss = 0.0;
      for (double e : errors) ss += (e - s.mean) * (e - s.mean);
      const double sd = std::sqrt(ss / (s.n_reps - 1));
      s.sd = sd;
      s.se = sd / std::sqrt(static_cast<double>(s.n_reps));
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace art
