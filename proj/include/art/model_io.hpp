// Versioned plain-text (JSON) persistence for aggregated models.
#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "art/common.hpp"
#include "art/csv.hpp"
#include "art/pipeline.hpp"

namespace art {

inline constexpr int kModelFormatVersion = 1;

namespace detail {

using json = nlohmann::json;

inline json vector_to_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline Vector vector_from_json(const json& a) {
  Vector v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
  return v;
}

inline json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Matrix matrix_from_json(const json& rows) {
  if (rows.empty()) return Matrix(0, 0);
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j].get<double>();
    }
  }
  return m;
}

inline json params_to_json(const ModelParams& params) {
  json j;
  if (const auto* lin = std::get_if<LinearModel>(&params)) {
    j["type"] = "linear";
    j["link"] = lin->link == Link::Identity ? "identity" : "logit";
    j["intercept"] = lin->intercept;
    j["coefficients"] = vector_to_json(lin->coefficients);
  } else if (const auto* lasso = std::get_if<LassoModel>(&params)) {
    j["type"] = "lasso";
    j["intercept"] = lasso->linear.intercept;
    j["coefficients"] = vector_to_json(lasso->linear.coefficients);
    j["lambda_reg"] = lasso->lambda_reg;
    j["active_set"] = lasso->active_set;
  } else if (const auto* knn = std::get_if<KnnModel>(&params)) {
    j["type"] = "knn";
    j["k"] = knn->k;
    j["train_x"] = matrix_to_json(knn->train_x);
    j["train_y"] = vector_to_json(knn->train_y);
  } else if (const auto* ens = std::get_if<StumpEnsemble>(&params)) {
    j["type"] = "stumps";
    j["base_score"] = ens->base_score;
    j["learning_rate"] = ens->learning_rate;
    j["n_rounds"] = ens->n_rounds;
    json stumps = json::array();
    for (const auto& s : ens->stumps) {
      stumps.push_back(json{{"feature", s.feature},
                            {"threshold", s.threshold},
                            {"left", s.left},
                            {"right", s.right}});
    }
    j["stumps"] = std::move(stumps);
  }
  return j;
}

inline ModelParams params_from_json(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "linear") {
    LinearModel m;
    m.link = j.at("link").get<std::string>() == "logit" ? Link::Logit : Link::Identity;
    m.intercept = j.at("intercept").get<double>();
    m.coefficients = vector_from_json(j.at("coefficients"));
    return m;
  }
  if (type == "lasso") {
    LassoModel m;
    m.linear.link = Link::Identity;
    m.linear.intercept = j.at("intercept").get<double>();
    m.linear.coefficients = vector_from_json(j.at("coefficients"));
    m.lambda_reg = j.at("lambda_reg").get<double>();
    m.active_set = j.at("active_set").get<std::vector<int>>();
    return m;
  }
  if (type == "knn") {
    KnnModel m;
    m.k = j.at("k").get<int>();
    m.train_x = matrix_from_json(j.at("train_x"));
    m.train_y = vector_from_json(j.at("train_y"));
    return m;
  }
  if (type == "stumps") {
    StumpEnsemble m;
    m.base_score = j.at("base_score").get<double>();
    m.learning_rate = j.at("learning_rate").get<double>();
    m.n_rounds = j.at("n_rounds").get<int>();
    for (const auto& s : j.at("stumps")) {
      m.stumps.push_back(StumpEnsemble::Stump{s.at("feature").get<int>(),
                                              s.at("threshold").get<double>(),
                                              s.at("left").get<double>(),
                                              s.at("right").get<double>()});
    }
    return m;
  }
  throw data_error("model file: unknown candidate type '" + type + "'");
}

}  // namespace detail

struct SavedModel {
  ArtModel model;
  Schema schema;
  nlohmann::json learners;  // names and hyperparameters as configured at fit time
};

inline std::string serialize_model(const ArtModel& model, const Schema& schema,
                                   const nlohmann::json& learners) {
  nlohmann::json j;
  j["format_version"] = kModelFormatVersion;
  j["task"] = task_name(model.task);
  j["response_column"] = schema.response_name;
  j["feature_names"] = schema.feature_names;
  j["seed"] = model.config_used.seed;
  j["lambda"] = model.lambda_used;
  j["weight_mode"] =
      model.config_used.weight_mode == WeightMode::Sequential ? "sequential" : "simplified";
  j["final_refit"] =
      model.config_used.final_refit == FinalRefit::FullData ? "full-data" : "last-split";
  j["split_ratio"] = model.config_used.split_ratio;
  j["n_splits"] = model.config_used.n_splits;
  j["splits_executed"] = model.splits_executed;
  j["learners"] = learners;
  j["final_weights"] = detail::vector_to_json(model.final_weights);
  nlohmann::json cands = nlohmann::json::array();
  for (const auto& cand : model.candidates) {
    nlohmann::json c;
    c["label"] = cand.label;
    c["model"] = detail::params_to_json(cand.params);
    cands.push_back(std::move(c));
  }
  j["candidates"] = std::move(cands);
  return j.dump(2) + "\n";
}

inline void save_model(const std::string& path, const ArtModel& model, const Schema& schema,
                       const nlohmann::json& learners) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write model file: " + path);
  out << serialize_model(model, schema, learners);
}

inline SavedModel parse_model(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    throw data_error(std::string("model file is not valid JSON: ") + e.what());
  }
  if (!j.contains("format_version") || j["format_version"].get<int>() != kModelFormatVersion) {
    throw data_error("model file format version mismatch (expected " +
                     std::to_string(kModelFormatVersion) + ")");
  }
  SavedModel saved;
  saved.model.task =
      j.at("task").get<std::string>() == "classification" ? Task::Classification : Task::Regression;
  saved.schema.response_name = j.at("response_column").get<std::string>();
  saved.schema.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  saved.model.n_features = static_cast<int>(saved.schema.feature_names.size());
  saved.model.lambda_used = j.at("lambda").get<double>();
  saved.model.config_used.seed = j.at("seed").get<std::uint64_t>();
  saved.model.config_used.lambda = saved.model.lambda_used;
  saved.model.config_used.weight_mode = j.at("weight_mode").get<std::string>() == "simplified"
                                            ? WeightMode::Simplified
                                            : WeightMode::Sequential;
  saved.model.config_used.final_refit = j.at("final_refit").get<std::string>() == "last-split"
                                            ? FinalRefit::LastSplit
                                            : FinalRefit::FullData;
  saved.model.config_used.split_ratio = j.at("split_ratio").get<double>();
  saved.model.config_used.n_splits = j.at("n_splits").get<int>();
  saved.model.splits_executed = j.at("splits_executed").get<int>();
  saved.learners = j.at("learners");
  saved.model.final_weights = detail::vector_from_json(j.at("final_weights"));
  for (const auto& c : j.at("candidates")) {
    FittedModel fit;
    fit.label = c.at("label").get<std::string>();
    fit.params = detail::params_from_json(c.at("model"));
    saved.model.candidates.push_back(std::move(fit));
  }
  if (saved.model.final_weights.size() != static_cast<Eigen::Index>(saved.model.candidates.size())) {
    throw data_error("model file: weight and candidate counts differ");
  }
  return saved;
}

inline SavedModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open model file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_model(buf.str());
}

}  // namespace art
