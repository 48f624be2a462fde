// Named benchmark suites behind `art sim`: sweeps over the number of
// auxiliary datasets, robustness runs with adversarial data, the sparse
// variable-importance spectrum, and a multi-learner aggregation protocol.
#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "art/simbench.hpp"

namespace art {

enum class SimProfile { Full, Fast };

inline SimProfile parse_profile(const std::string& s) {
  if (s == "full") return SimProfile::Full;
  if (s == "fast") return SimProfile::Fast;
  throw config_error("unknown profile '" + s + "' (valid: full, fast)");
}

struct ImportanceRow {
  double xi = 0.0;
  int feature = 0;
  double importance = 0.0;
};

struct SuiteOutput {
  ExperimentResult result;
  std::vector<SummaryRow> summary;
  std::vector<ImportanceRow> importance;  // vi_spectrum only
  nlohmann::json info;
};

namespace detail {

inline void append_rows(ExperimentResult& into, const ExperimentResult& from) {
  into.rows.insert(into.rows.end(), from.rows.begin(), from.rows.end());
}

inline GeneratorSpec linear_spec(int M, double xi, int n_test, std::uint64_t seed,
                                 int n_adversarial = 0) {
  GeneratorSpec spec;
  spec.kind = GeneratorKind::LinearRegression;
  spec.p = 10;
  spec.n_primary = 50;
  spec.n_aux = 50;
  spec.M = M;
  spec.n_adversarial = n_adversarial;
  spec.xi = xi;
  spec.n_test = n_test;
  spec.seed = seed;
  return spec;
}

inline GeneratorSpec logistic_spec(int M, double xi, int n_test, std::uint64_t seed) {
  GeneratorSpec spec = linear_spec(M, xi, n_test, seed);
  spec.kind = GeneratorKind::LogisticClassification;
  return spec;
}

inline GeneratorSpec mixture_spec(int M, double xi, int n_primary, int n_aux, int n_test,
                                  std::uint64_t seed) {
  GeneratorSpec spec;
  spec.kind = GeneratorKind::GaussianMixture;
  spec.p = 10;
  spec.n_primary = n_primary;
  spec.n_aux = n_aux;
  spec.M = M;
  spec.xi = xi;
  spec.n_test = n_test;
  spec.seed = seed;
  return spec;
}

inline GeneratorSpec sparse_spec(int M, double xi, int n_test, std::uint64_t seed,
                                 int n_primary = 150) {
  GeneratorSpec spec;
  spec.kind = GeneratorKind::SparseLinear;
  spec.p = 200;
  spec.n_primary = n_primary;
  spec.n_aux = 100;
  spec.M = M;
  spec.xi = xi;
  spec.n_test = n_test;
  spec.seed = seed;
  return spec;
}

inline nlohmann::json spec_info(const GeneratorSpec& spec) {
  return nlohmann::json{{"generator", generator_name(spec.kind)},
                        {"p", spec.p},
                        {"n_primary", spec.n_primary},
                        {"n_aux", spec.n_aux},
                        {"n_adversarial", spec.n_adversarial},
                        {"n_test", spec.n_test},
                        {"xi", spec.xi}};
}

}  // namespace detail

// Mean variable importance (and mean test error) of the aggregated sparse
// learner over seeded replications.
struct ViStudy {
  Vector mean_vi;
  double mean_error = 0.0;
  std::vector<double> per_rep_error;
};

inline ViStudy run_vi_study(const GeneratorSpec& spec, int replications,
                            const LearnerOptions& lasso_opt = {}, int n_splits = 1) {
  if (replications < 1) throw config_error("replications must be >= 1");
  const LearnerSpec lasso = make_learner("lasso", lasso_opt);
  std::vector<Vector> vis(static_cast<std::size_t>(replications));
  std::vector<double> errors(static_cast<std::size_t>(replications));
  parallel_for(replications, [&](int rep) {
    GeneratorSpec rep_spec = spec;
    rep_spec.seed = derive_seed(spec.seed, 0xEB, static_cast<std::uint64_t>(rep));
    const GeneratedData data = generate(rep_spec);
    ArtConfig cfg;
    cfg.n_splits = n_splits;
    // importance reads the split-fitted candidates' selections
    cfg.final_refit = FinalRefit::LastSplit;
    cfg.seed = derive_seed(rep_spec.seed, 0x51, 2);
    const ArtModel model = art_fit(data.primary, data.auxiliaries, lasso, Loss::squared(), cfg);
    vis[static_cast<std::size_t>(rep)] = variable_importance(model).vi;
    errors[static_cast<std::size_t>(rep)] =
        (art_predict_batch(model, data.test.features) - data.test.response).squaredNorm() /
        static_cast<double>(data.test.n());
  });
  ViStudy study;
  study.mean_vi = Vector::Zero(spec.p);
  for (const Vector& vi : vis) study.mean_vi += vi;
  study.mean_vi /= static_cast<double>(replications);
  for (double e : errors) study.mean_error += e;
  study.mean_error /= static_cast<double>(replications);
  study.per_rep_error = std::move(errors);
  return study;
}

inline SuiteOutput run_suite(const std::string& name, SimProfile profile, std::uint64_t seed) {
  const bool fast = profile == SimProfile::Fast;
  const int n_test = fast ? 1000 : 5000;
  SuiteOutput out;
  out.info["name"] = name;
  out.info["profile"] = fast ? "fast" : "full";
  out.info["seed"] = seed;

  if (name == "ex411" || name == "ex412") {
    const int reps = fast ? 10 : 50;
    const int n_adv = name == "ex412" ? 10 : 0;
    const auto learner = make_learner("ols");
    for (int M = 1; M <= 10; ++M) {
      const auto spec = detail::linear_spec(M, 0.5, n_test, seed, n_adv);
      detail::append_rows(out.result,
                          run_experiment(spec, {Method::PrimaryOnly, Method::Pooled, Method::ART},
                                         {learner}, reps));
      if (M == 1) out.info["spec"] = detail::spec_info(spec);
    }
    out.info["replications"] = reps;
    out.info["M_sweep"] = {1, 10};
  } else if (name == "ex421") {
    const int reps = fast ? 10 : 50;
    const auto learner = make_learner("logistic");
    for (int M = 1; M <= 10; ++M) {
      const auto spec = detail::logistic_spec(M, 0.5, n_test, seed);
      detail::append_rows(out.result,
                          run_experiment(spec, {Method::PrimaryOnly, Method::Pooled, Method::ART},
                                         {learner}, reps));
      if (M == 1) out.info["spec"] = detail::spec_info(spec);
    }
    out.info["replications"] = reps;
    out.info["M_sweep"] = {1, 10};
  } else if (name == "ex422") {
    const int reps = fast ? 10 : 50;
    const std::vector<LearnerSpec> learners = {make_learner("knn"), make_learner("stumps")};
    for (int M = 1; M <= 10; ++M) {
      const auto spec = detail::mixture_spec(M, 0.5, 50, 50, n_test, seed);
      for (const auto& learner : learners) {
        detail::append_rows(out.result,
                            run_experiment(spec, {Method::PrimaryOnly, Method::Pooled, Method::ART},
                                           {learner}, reps));
      }
      detail::append_rows(out.result, run_experiment(spec, {Method::ART_IAM}, learners, reps));
      if (M == 1) out.info["spec"] = detail::spec_info(spec);
    }
    out.info["replications"] = reps;
    out.info["M_sweep"] = {1, 10};
  } else if (name == "ex431") {
    const int reps = fast ? 5 : 20;
    LearnerOptions opt;
    opt.cv_grid_size = 16;
    const auto learner = make_learner("lasso", opt);
    ArtConfig art_cfg;
    art_cfg.n_splits = 1;  // single split keeps the CV-tuned candidates tractable
    for (int M = 1; M <= 10; ++M) {
      const auto spec = detail::sparse_spec(M, 0.5, n_test, seed);
      detail::append_rows(
          out.result,
          run_experiment(spec, {Method::PrimaryOnly, Method::ART}, {learner}, reps, art_cfg));
      if (M == 1) out.info["spec"] = detail::spec_info(spec);
    }
    out.info["replications"] = reps;
    out.info["M_sweep"] = {1, 10};
  } else if (name == "vi_spectrum") {
    const int reps = fast ? 5 : 20;
    LearnerOptions opt;
    opt.cv_grid_size = 16;
    opt.lasso_one_se = true;  // conservative selection for the importance read-out
    for (const double xi : {0.1, 0.4, 0.7, 1.0}) {
      const auto spec = detail::sparse_spec(5, xi, n_test, seed);
      const ViStudy study = run_vi_study(spec, reps, opt);
      for (int j = 0; j < spec.p; ++j) {
        out.importance.push_back(ImportanceRow{xi, j, study.mean_vi[j]});
      }
      for (std::size_t rep = 0; rep < study.per_rep_error.size(); ++rep) {
        out.result.rows.push_back(ExperimentRow{"ART-lasso", spec.M, xi, static_cast<int>(rep),
                                                study.per_rep_error[rep]});
      }
      if (xi == 0.1) out.info["spec"] = detail::spec_info(spec);
    }
    out.info["replications"] = reps;
    out.info["xi_sweep"] = {0.1, 0.4, 0.7, 1.0};
  } else if (name == "icu_style") {
    const int reps = fast ? 10 : 50;
    const std::vector<LearnerSpec> learners = {make_learner("logistic"), make_learner("knn"),
                                               make_learner("stumps")};
    const auto spec = detail::mixture_spec(3, 0.5, 100, 300, n_test, seed);
    for (const auto& learner : learners) {
      detail::append_rows(out.result,
                          run_experiment(spec, {Method::PrimaryOnly, Method::Pooled, Method::ART},
                                         {learner}, reps));
    }
    detail::append_rows(out.result, run_experiment(spec, {Method::ART_IAM}, learners, reps));
    out.info["spec"] = detail::spec_info(spec);
    out.info["replications"] = reps;
  } else {
    throw config_error("unknown simulation '" + name +
                       "' (valid: ex411, ex412, ex421, ex422, ex431, vi_spectrum, icu_style)");
  }

  std::sort(out.result.rows.begin(), out.result.rows.end(),
            [](const ExperimentRow& a, const ExperimentRow& b) {
              return std::tie(a.method, a.M, a.xi, a.replication) <
                     std::tie(b.method, b.M, b.xi, b.replication);
            });
  out.summary = summarize(out.result);
  return out;
}

inline void write_importance_csv(const std::string& path, const std::vector<ImportanceRow>& rows) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write file: " + path);
  out << "xi,feature,importance\n";
  for (const auto& r : rows) {
    out << format_double(r.xi) << ',' << r.feature << ',' << format_double(r.importance) << '\n';
  }
}

}  // namespace art
