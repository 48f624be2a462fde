// Command-line front end: fit/predict/importance on CSV data, plus the
// simulation benchmark suites.
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "art/csv.hpp"
#include "art/model_io.hpp"
#include "art/pipeline.hpp"
#include "art/suites.hpp"

namespace {

using art::config_error;
using art::data_error;
using json = nlohmann::json;

json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file: " + path);
  try {
    json j;
    in >> j;
    if (!j.is_object()) throw config_error("config file must hold a JSON object");
    return j;
  } catch (const json::exception& e) {
    throw config_error("config file is not valid JSON: " + std::string(e.what()));
  }
}

// command-line flags win over config-file values
template <typename T>
void merge(const CLI::App& app, const std::string& flag, const json& config,
           const std::string& key, T& value) {
  if (app.count(flag) > 0) return;
  if (config.contains(key)) value = config.at(key).get<T>();
}

template <typename T>
void merge_optional(const CLI::App& app, const std::string& flag, const json& config,
                    const std::string& key, std::optional<T>& value) {
  if (app.count(flag) > 0) return;
  if (config.contains(key)) value = config.at(key).get<T>();
}

art::Task parse_task(const std::string& s) {
  if (s == "regression") return art::Task::Regression;
  if (s == "classification") return art::Task::Classification;
  throw config_error("unknown task '" + s + "' (valid: regression, classification)");
}

struct FitArgs {
  std::string primary_path;
  std::vector<std::string> aux_paths;
  std::string response;
  std::string task = "regression";
  std::vector<std::string> learners;
  std::string out_path;
  std::string config_path;
  std::string weight_mode = "sequential";
  std::string refit = "full-data";
  std::string priors_csv;
  std::optional<double> lambda;
  double ratio = 0.5;
  int splits = 10;
  double tol = 1e-3;
  std::uint64_t seed = 0;
  // learner hyperparameters
  double ridge_penalty = 1.0;
  std::optional<double> lasso_lambda;
  int cv_folds = 5;
  int grid_size = 30;
  bool lasso_one_se = false;
  int knn_k = 5;
  int boost_rounds = 100;
  double boost_lr = 0.1;
  double logit_l2 = 1e-8;
};

art::LearnerOptions learner_options(const FitArgs& a) {
  art::LearnerOptions opt;
  opt.ridge_penalty = a.ridge_penalty;
  opt.lasso_lambda = a.lasso_lambda;
  opt.cv_folds = a.cv_folds;
  opt.cv_grid_size = a.grid_size;
  opt.lasso_one_se = a.lasso_one_se;
  opt.knn_k = a.knn_k;
  opt.boost_rounds = a.boost_rounds;
  opt.boost_learning_rate = a.boost_lr;
  opt.logistic_l2 = a.logit_l2;
  return opt;
}

json learners_manifest(const FitArgs& a) {
  json out = json::array();
  for (const std::string& name : a.learners) {
    json l{{"name", name}};
    if (name == "ridge") l["penalty"] = a.ridge_penalty;
    if (name == "lasso") {
      if (a.lasso_lambda) {
        l["lambda_reg"] = *a.lasso_lambda;
      } else {
        l["cv_folds"] = a.cv_folds;
        l["grid_size"] = a.grid_size;
        l["one_se"] = a.lasso_one_se;
      }
    }
    if (name == "knn") l["k"] = a.knn_k;
    if (name == "stumps") {
      l["rounds"] = a.boost_rounds;
      l["learning_rate"] = a.boost_lr;
    }
    if (name == "logistic") l["l2"] = a.logit_l2;
    out.push_back(std::move(l));
  }
  return out;
}

int cmd_fit(const CLI::App& app, FitArgs a) {
  json config;
  if (app.count("--config") > 0) config = load_config_file(a.config_path);
  merge(app, "--primary", config, "primary", a.primary_path);
  merge(app, "--aux", config, "aux", a.aux_paths);
  merge(app, "--response", config, "response", a.response);
  merge(app, "--task", config, "task", a.task);
  merge(app, "--learner", config, "learner", a.learners);
  merge(app, "--out", config, "out", a.out_path);
  merge(app, "--weight-mode", config, "weight_mode", a.weight_mode);
  merge(app, "--refit", config, "refit", a.refit);
  merge(app, "--priors", config, "priors", a.priors_csv);
  merge_optional(app, "--lambda", config, "lambda", a.lambda);
  merge(app, "--ratio", config, "ratio", a.ratio);
  merge(app, "--splits", config, "splits", a.splits);
  merge(app, "--tol", config, "tol", a.tol);
  merge(app, "--seed", config, "seed", a.seed);
  merge(app, "--ridge-penalty", config, "ridge_penalty", a.ridge_penalty);
  merge_optional(app, "--lasso-lambda", config, "lasso_lambda", a.lasso_lambda);
  merge(app, "--cv-folds", config, "cv_folds", a.cv_folds);
  merge(app, "--grid-size", config, "grid_size", a.grid_size);
  merge(app, "--knn-k", config, "knn_k", a.knn_k);
  merge(app, "--boost-rounds", config, "boost_rounds", a.boost_rounds);
  merge(app, "--boost-lr", config, "boost_lr", a.boost_lr);
  merge(app, "--logit-l2", config, "logit_l2", a.logit_l2);
  if (app.count("--lasso-one-se") == 0 && config.contains("lasso_one_se")) {
    a.lasso_one_se = config.at("lasso_one_se").get<bool>();
  }

  if (a.primary_path.empty()) throw config_error("missing required option: --primary");
  if (a.response.empty()) throw config_error("missing required option: --response");
  if (a.out_path.empty()) throw config_error("missing required option: --out");
  if (a.learners.empty()) throw config_error("missing required option: --learner");

  const art::Task task = parse_task(a.task);
  auto [primary, schema] = art::read_dataset_csv(a.primary_path, a.response, task);
  std::vector<art::Dataset> auxiliaries;
  for (const std::string& path : a.aux_paths) {
    auto [aux, aux_schema] = art::read_dataset_csv(path, a.response, task);
    if (aux_schema.feature_names != schema.feature_names) {
      // match columns by name and reorder to the primary layout
      art::PredictionInput reordered = art::read_prediction_csv(path, schema);
      if (!reordered.response.has_value()) {
        throw data_error(path + ": missing response column '" + a.response + "'");
      }
      aux = art::Dataset::make(std::move(reordered.features), std::move(*reordered.response), task);
    }
    auxiliaries.push_back(std::move(aux));
  }

  const art::LearnerOptions opt = learner_options(a);
  std::vector<art::LearnerSpec> learners;
  for (const std::string& name : a.learners) learners.push_back(art::make_learner(name, opt));

  art::ArtConfig cfg;
  cfg.split_ratio = a.ratio;
  cfg.n_splits = a.splits;
  cfg.converge_tol = a.tol;
  cfg.seed = a.seed;
  cfg.lambda = a.lambda;
  if (a.weight_mode == "simplified") {
    cfg.weight_mode = art::WeightMode::Simplified;
  } else if (a.weight_mode != "sequential") {
    throw config_error("unknown weight mode '" + a.weight_mode +
                       "' (valid: sequential, simplified)");
  }
  if (a.refit == "last-split") {
    cfg.final_refit = art::FinalRefit::LastSplit;
  } else if (a.refit != "full-data") {
    throw config_error("unknown refit mode '" + a.refit + "' (valid: full-data, last-split)");
  }
  if (!a.priors_csv.empty()) {
    std::vector<double> raw;
    std::stringstream ss(a.priors_csv);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        raw.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw config_error("priors: cannot parse '" + cell + "'");
      }
    }
    Eigen::Map<art::Vector> mapped(raw.data(), static_cast<Eigen::Index>(raw.size()));
    cfg.priors = art::PriorWeights::from(mapped);
  }

  const art::Loss loss =
      task == art::Task::Regression ? art::Loss::squared() : art::Loss::cross_entropy();
  const art::ArtModel model = art::detail::art_fit_impl(primary, auxiliaries, learners, loss, cfg);

  art::save_model(a.out_path, model, schema, learners_manifest(a));

  std::cout << "candidates: " << model.n_candidates() << ", splits executed: "
            << model.splits_executed << ", lambda: " << art::format_double(model.lambda_used)
            << "\n";
  for (int m = 0; m < model.n_candidates(); ++m) {
    std::cout << model.candidates[static_cast<std::size_t>(m)].label << "  "
              << art::format_double(model.final_weights[m]) << "\n";
  }
  std::cout << "model written to " << a.out_path << "\n";
  return 0;
}

struct PredictArgs {
  std::string model_path;
  std::string data_path;
  std::string out_path;
};

int cmd_predict(const PredictArgs& a) {
  const art::SavedModel saved = art::load_model(a.model_path);
  const art::PredictionInput input = art::read_prediction_csv(a.data_path, saved.schema);
  const art::Vector pred = art::art_predict_batch(saved.model, input.features);

  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!a.out_path.empty()) {
    file.open(a.out_path);
    if (!file) throw data_error("cannot write file: " + a.out_path);
    out = &file;
  }
  if (saved.model.task == art::Task::Classification) {
    *out << "probability,label\n";
    for (Eigen::Index i = 0; i < pred.size(); ++i) {
      *out << art::format_double(pred[i]) << ',' << (pred[i] > 0.5 ? 1 : 0) << '\n';
    }
  } else {
    *out << "prediction\n";
    for (Eigen::Index i = 0; i < pred.size(); ++i) {
      *out << art::format_double(pred[i]) << '\n';
    }
  }

  if (input.response.has_value()) {
    double err = 0.0;
    if (saved.model.task == art::Task::Classification) {
      for (Eigen::Index i = 0; i < pred.size(); ++i) {
        err += (pred[i] > 0.5 ? 1.0 : 0.0) != (*input.response)[i];
      }
      err /= static_cast<double>(pred.size());
      std::cerr << "misclassification rate on provided labels: " << art::format_double(err)
                << "\n";
    } else {
      err = (pred - *input.response).squaredNorm() / static_cast<double>(pred.size());
      std::cerr << "mean squared error on provided labels: " << art::format_double(err) << "\n";
    }
  }
  return 0;
}

int cmd_importance(const std::string& model_path, const std::string& out_path) {
  const art::SavedModel saved = art::load_model(model_path);
  const art::VariableImportance vi = art::variable_importance(saved.model);

  std::vector<int> order(saved.schema.feature_names.size());
  for (std::size_t j = 0; j < order.size(); ++j) order[j] = static_cast<int>(j);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return vi.vi[a] != vi.vi[b] ? vi.vi[a] > vi.vi[b] : a < b;
  });

  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path);
    if (!file) throw data_error("cannot write file: " + out_path);
    out = &file;
  }
  *out << "feature,importance\n";
  for (int j : order) {
    *out << saved.schema.feature_names[static_cast<std::size_t>(j)] << ','
         << art::format_double(vi.vi[j]) << '\n';
  }
  return 0;
}

int cmd_sim(const std::string& name, const std::string& profile, std::uint64_t seed,
            const std::string& out_dir) {
  namespace fs = std::filesystem;
  const auto t0 = std::chrono::steady_clock::now();
  const art::SuiteOutput out = art::run_suite(name, art::parse_profile(profile), seed);
  const double wall_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  fs::create_directories(out_dir);
  const std::string results_path = (fs::path(out_dir) / "results.csv").string();
  const std::string summary_path = (fs::path(out_dir) / "summary.csv").string();
  art::write_results_csv(results_path, out.result);
  art::write_summary_csv(summary_path, out.summary);
  json manifest = out.info;
  manifest["wall_time_s"] = wall_s;
  manifest["files"] = json::array({"results.csv", "summary.csv"});
  if (!out.importance.empty()) {
    const std::string imp_path = (fs::path(out_dir) / "importance.csv").string();
    art::write_importance_csv(imp_path, out.importance);
    manifest["files"].push_back("importance.csv");
  }
  std::ofstream mf(fs::path(out_dir) / "manifest.json");
  mf << manifest.dump(2) << "\n";
  std::cout << "wrote " << out_dir << " (" << out.result.rows.size() << " result rows, "
            << art::format_double(wall_s) << " s)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"adaptive transfer-learning aggregation over auxiliary datasets"};
  app.require_subcommand(1);

  FitArgs fit_args;
  CLI::App* fit = app.add_subcommand("fit", "fit an aggregated model from CSV data");
  fit->add_option("--primary", fit_args.primary_path, "primary dataset CSV");
  fit->add_option("--aux", fit_args.aux_paths, "auxiliary dataset CSV (repeatable)");
  fit->add_option("--response", fit_args.response, "response column name");
  fit->add_option("--task", fit_args.task, "regression | classification");
  fit->add_option("--learner", fit_args.learners,
                  "learner name (repeat for a multi-learner pool): ols, ridge, logistic, lasso, "
                  "knn, stumps");
  fit->add_option("--out", fit_args.out_path, "output model file");
  fit->add_option("--config", fit_args.config_path, "JSON config file (flags override)");
  fit->add_option("--lambda", fit_args.lambda, "weighting temperature (default: data-driven rule)");
  fit->add_option("--splits", fit_args.splits, "number of random splits");
  fit->add_option("--ratio", fit_args.ratio, "train fraction per split");
  fit->add_option("--weight-mode", fit_args.weight_mode, "sequential | simplified");
  fit->add_option("--refit", fit_args.refit, "full-data | last-split");
  fit->add_option("--priors", fit_args.priors_csv, "comma-separated prior weights");
  fit->add_option("--tol", fit_args.tol, "split-average convergence tolerance");
  fit->add_option("--seed", fit_args.seed, "random seed");
  fit->add_option("--ridge-penalty", fit_args.ridge_penalty, "ridge penalty");
  fit->add_option("--lasso-lambda", fit_args.lasso_lambda, "fixed lasso penalty (default: CV)");
  fit->add_option("--cv-folds", fit_args.cv_folds, "lasso CV folds");
  fit->add_option("--grid-size", fit_args.grid_size, "lasso CV grid size");
  fit->add_flag("--lasso-one-se", fit_args.lasso_one_se, "select lasso penalty by the 1-SE rule");
  fit->add_option("--knn-k", fit_args.knn_k, "k for the k-NN classifier");
  fit->add_option("--boost-rounds", fit_args.boost_rounds, "boosting rounds");
  fit->add_option("--boost-lr", fit_args.boost_lr, "boosting learning rate");
  fit->add_option("--logit-l2", fit_args.logit_l2, "logistic ridge stabilizer");

  PredictArgs predict_args;
  CLI::App* predict = app.add_subcommand("predict", "predict rows of a CSV with a fitted model");
  predict->add_option("--model", predict_args.model_path, "model file")->required();
  predict->add_option("--data", predict_args.data_path, "input CSV")->required();
  predict->add_option("--out", predict_args.out_path, "output CSV (default: stdout)");

  std::string imp_model, imp_out;
  CLI::App* importance = app.add_subcommand("importance", "per-feature importance of a model");
  importance->add_option("--model", imp_model, "model file")->required();
  importance->add_option("--out", imp_out, "output CSV (default: stdout)");

  std::string sim_name, sim_profile = "full", sim_out;
  std::uint64_t sim_seed = 0;
  CLI::App* sim = app.add_subcommand("sim", "run a named simulation study");
  sim->add_option("--name", sim_name,
                  "ex411, ex412, ex421, ex422, ex431, vi_spectrum, icu_style")
      ->required();
  sim->add_option("--profile", sim_profile, "full | fast");
  sim->add_option("--seed", sim_seed, "random seed");
  sim->add_option("--out", sim_out, "output directory")->required();

  try {
    app.parse(argc, argv);
    if (fit->parsed()) return cmd_fit(*fit, fit_args);
    if (predict->parsed()) return cmd_predict(predict_args);
    if (importance->parsed()) return cmd_importance(imp_model, imp_out);
    if (sim->parsed()) return cmd_sim(sim_name, sim_profile, sim_seed, sim_out);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return 0;  // --help
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const config_error& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const data_error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 2;
}
