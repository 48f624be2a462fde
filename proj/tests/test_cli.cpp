#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "art/model_io.hpp"
#include "art/simbench.hpp"

using namespace art;
namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout + stderr
};

RunResult run_cli(const std::string& args) {
  const std::string out_file = "cli_out.tmp";
  const std::string cmd = std::string(ART_CLI_PATH) + " " + args + " > " + out_file + " 2>&1";
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WEXITSTATUS(status);
  std::ifstream in(out_file);
  std::stringstream ss;
  ss << in.rdbuf();
  r.output = ss.str();
  std::remove(out_file.c_str());
  return r;
}

void write_dataset_csv(const std::string& path, const Dataset& d) {
  std::ofstream out(path);
  for (int j = 0; j < d.p(); ++j) out << "x" << j << ",";
  out << "y\n";
  for (int i = 0; i < d.n(); ++i) {
    for (int j = 0; j < d.p(); ++j) out << format_double(d.features(i, j)) << ",";
    out << format_double(d.response[i]) << "\n";
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Workspace {
  fs::path dir;
  explicit Workspace(const std::string& name) : dir(fs::path("cli_ws_" + name)) {
    fs::create_directories(dir);
  }
  ~Workspace() {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }
  std::string file(const std::string& name) const { return (dir / name).string(); }
};

GeneratedData make_linear_data(int M, double xi, std::uint64_t seed, int n_primary = 60,
                               int n_aux = 120) {
  GeneratorSpec spec;
  spec.kind = GeneratorKind::LinearRegression;
  spec.p = 4;
  spec.n_primary = n_primary;
  spec.n_aux = n_aux;
  spec.M = M;
  spec.xi = xi;
  spec.n_test = 10;
  spec.seed = seed;
  return generate(spec);
}

}  // namespace

TEST_CASE("fit without auxiliaries reports a single full-weight candidate") {
  Workspace ws("single");
  const GeneratedData data = make_linear_data(0, 0.5, 1);
  write_dataset_csv(ws.file("prim.csv"), data.primary);
  const RunResult r = run_cli("fit --primary " + ws.file("prim.csv") +
                              " --response y --task regression --learner ols --seed 3 --out " +
                              ws.file("model.json"));
  INFO(r.output);
  REQUIRE(r.exit_code == 0);
  CHECK(r.output.find("ols[primary]  1") != std::string::npos);
  CHECK(fs::exists(ws.file("model.json")));
}

TEST_CASE("identical auxiliary files share the weight roughly evenly") {
  Workspace ws("even");
  const GeneratedData data = make_linear_data(1, 0.0, 2, 80, 200);
  write_dataset_csv(ws.file("prim.csv"), data.primary);
  write_dataset_csv(ws.file("aux.csv"), data.auxiliaries[0]);
  const std::string aux_flags = " --aux " + ws.file("aux.csv") + " --aux " + ws.file("aux.csv") +
                                " --aux " + ws.file("aux.csv");
  const RunResult r = run_cli("fit --primary " + ws.file("prim.csv") + aux_flags +
                              " --response y --task regression --learner ols --seed 11 --out " +
                              ws.file("model.json"));
  INFO(r.output);
  REQUIRE(r.exit_code == 0);
  const SavedModel saved = load_model(ws.file("model.json"));
  REQUIRE(saved.model.final_weights.size() == 4);
  // the three copies give bit-identical candidates, so their weights coincide
  CHECK_THAT(saved.model.final_weights[1],
             Catch::Matchers::WithinAbs(saved.model.final_weights[2], 1e-12));
  CHECK_THAT(saved.model.final_weights[1],
             Catch::Matchers::WithinAbs(saved.model.final_weights[3], 1e-12));
  for (int m = 0; m < 4; ++m) {
    CHECK(std::abs(saved.model.final_weights[m] - 0.25) < 0.15);
  }
}

TEST_CASE("fit, reload, and predict reproduce in-memory predictions") {
  Workspace ws("roundtrip");
  const GeneratedData data = make_linear_data(1, 0.3, 3);
  write_dataset_csv(ws.file("prim.csv"), data.primary);
  write_dataset_csv(ws.file("aux.csv"), data.auxiliaries[0]);
  const RunResult fit = run_cli("fit --primary " + ws.file("prim.csv") + " --aux " +
                                ws.file("aux.csv") +
                                " --response y --task regression --learner ols --seed 5 --out " +
                                ws.file("model.json"));
  INFO(fit.output);
  REQUIRE(fit.exit_code == 0);

  const SavedModel saved = load_model(ws.file("model.json"));
  const Vector expected = art_predict_batch(saved.model, data.primary.features);

  const RunResult pred = run_cli("predict --model " + ws.file("model.json") + " --data " +
                                 ws.file("prim.csv") + " --out " + ws.file("pred.csv"));
  INFO(pred.output);
  REQUIRE(pred.exit_code == 0);
  CHECK(pred.output.find("mean squared error") != std::string::npos);

  std::ifstream in(ws.file("pred.csv"));
  std::string header;
  std::getline(in, header);
  CHECK(header == "prediction");
  for (Eigen::Index i = 0; i < expected.size(); ++i) {
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK_THAT(std::stod(line), Catch::Matchers::WithinAbs(expected[i], 1e-12));
  }
}

TEST_CASE("model files round-trip byte-identically") {
  Workspace ws("bytes");
  const GeneratedData data = make_linear_data(1, 0.3, 4);
  write_dataset_csv(ws.file("prim.csv"), data.primary);
  write_dataset_csv(ws.file("aux.csv"), data.auxiliaries[0]);
  const RunResult fit = run_cli("fit --primary " + ws.file("prim.csv") + " --aux " +
                                ws.file("aux.csv") +
                                " --response y --task regression --learner ols --seed 5 --out " +
                                ws.file("model.json"));
  REQUIRE(fit.exit_code == 0);
  const std::string first = read_file(ws.file("model.json"));
  const SavedModel saved = parse_model(first);
  nlohmann::json learners = saved.learners;
  save_model(ws.file("model2.json"), saved.model, saved.schema, learners);
  CHECK(read_file(ws.file("model2.json")) == first);
}

TEST_CASE("classification predictions carry probability and label columns") {
  Workspace ws("classify");
  GeneratorSpec spec;
  spec.kind = GeneratorKind::LogisticClassification;
  spec.p = 3;
  spec.n_primary = 80;
  spec.n_aux = 80;
  spec.M = 1;
  spec.xi = 0.3;
  spec.n_test = 10;
  spec.seed = 9;
  const GeneratedData data = generate(spec);
  write_dataset_csv(ws.file("prim.csv"), data.primary);
  write_dataset_csv(ws.file("aux.csv"), data.auxiliaries[0]);
  const RunResult fit = run_cli("fit --primary " + ws.file("prim.csv") + " --aux " +
                                ws.file("aux.csv") +
                                " --response y --task classification --learner logistic "
                                "--seed 5 --out " + ws.file("model.json"));
  INFO(fit.output);
  REQUIRE(fit.exit_code == 0);
  const RunResult pred = run_cli("predict --model " + ws.file("model.json") + " --data " +
                                 ws.file("prim.csv") + " --out " + ws.file("pred.csv"));
  REQUIRE(pred.exit_code == 0);
  std::ifstream in(ws.file("pred.csv"));
  std::string header, line;
  std::getline(in, header);
  CHECK(header == "probability,label");
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    const double prob = std::stod(line.substr(0, comma));
    const int label = std::stoi(line.substr(comma + 1));
    CHECK(prob >= 0.0);
    CHECK(prob <= 1.0);
    CHECK(label == (prob > 0.5 ? 1 : 0));
  }
}

TEST_CASE("importance emits a sorted csv for sparse learners") {
  Workspace ws("imp");
  GeneratorSpec spec;
  spec.kind = GeneratorKind::SparseLinear;
  spec.p = 40;
  spec.n_primary = 60;
  spec.n_aux = 50;
  spec.M = 1;
  spec.xi = 0.1;
  spec.n_test = 10;
  spec.seed = 13;
  GeneratedData data = generate(spec);
  // shrink to a small dense problem the CLI can fit quickly
  write_dataset_csv(ws.file("prim.csv"), data.primary);
  write_dataset_csv(ws.file("aux.csv"), data.auxiliaries[0]);
  const RunResult fit = run_cli("fit --primary " + ws.file("prim.csv") + " --aux " +
                                ws.file("aux.csv") +
                                " --response y --task regression --learner lasso --splits 2 "
                                "--seed 5 --out " + ws.file("model.json"));
  INFO(fit.output);
  REQUIRE(fit.exit_code == 0);
  const RunResult imp = run_cli("importance --model " + ws.file("model.json") + " --out " +
                                ws.file("imp.csv"));
  INFO(imp.output);
  REQUIRE(imp.exit_code == 0);
  std::ifstream in(ws.file("imp.csv"));
  std::string header, line;
  std::getline(in, header);
  CHECK(header == "feature,importance");
  double prev = 2.0;
  int rows = 0;
  while (std::getline(in, line)) {
    const double v = std::stod(line.substr(line.find(',') + 1));
    CHECK(v <= prev + 1e-12);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    prev = v;
    ++rows;
  }
  CHECK(rows == 40);
}

TEST_CASE("importance refuses learners without variable selection") {
  Workspace ws("impols");
  const GeneratedData data = make_linear_data(0, 0.5, 14);
  write_dataset_csv(ws.file("prim.csv"), data.primary);
  REQUIRE(run_cli("fit --primary " + ws.file("prim.csv") +
                  " --response y --task regression --learner ols --seed 1 --out " +
                  ws.file("model.json"))
              .exit_code == 0);
  const RunResult imp = run_cli("importance --model " + ws.file("model.json"));
  CHECK(imp.exit_code == 2);
  CHECK(imp.output.find("variable importance is not well-defined") != std::string::npos);
}

TEST_CASE("cli maps error classes to exit codes") {
  Workspace ws("errors");
  const GeneratedData data = make_linear_data(0, 0.5, 15);
  write_dataset_csv(ws.file("prim.csv"), data.primary);

  // unknown learner: configuration error
  const RunResult bad_learner = run_cli("fit --primary " + ws.file("prim.csv") +
                                        " --response y --task regression --learner forest "
                                        "--out " + ws.file("m.json"));
  CHECK(bad_learner.exit_code == 2);
  CHECK(bad_learner.output.find("forest") != std::string::npos);

  // missing file: data error
  CHECK(run_cli("fit --primary missing.csv --response y --task regression --learner ols --out " +
                ws.file("m.json"))
            .exit_code == 3);

  // bad response column name: data error naming the field
  const RunResult bad_col = run_cli("fit --primary " + ws.file("prim.csv") +
                                    " --response outcome --task regression --learner ols --out " +
                                    ws.file("m.json"));
  CHECK(bad_col.exit_code == 3);
  CHECK(bad_col.output.find("outcome") != std::string::npos);

  // empty prediction input: data error
  REQUIRE(run_cli("fit --primary " + ws.file("prim.csv") +
                  " --response y --task regression --learner ols --seed 1 --out " +
                  ws.file("m.json"))
              .exit_code == 0);
  {
    std::ofstream empty(ws.file("empty.csv"));
    empty << "x0,x1,x2,x3,y\n";
  }
  const RunResult empty_pred =
      run_cli("predict --model " + ws.file("m.json") + " --data " + ws.file("empty.csv"));
  CHECK(empty_pred.exit_code == 3);
  CHECK(empty_pred.output.find("no data rows") != std::string::npos);

  // schema mismatch: data error naming the missing feature
  {
    std::ofstream wrong(ws.file("wrong.csv"));
    wrong << "a,b\n1,2\n";
  }
  const RunResult mismatch =
      run_cli("predict --model " + ws.file("m.json") + " --data " + ws.file("wrong.csv"));
  CHECK(mismatch.exit_code == 3);
  CHECK(mismatch.output.find("x0") != std::string::npos);

  // unknown sim name: configuration error listing valid names
  const RunResult bad_sim = run_cli("sim --name ex000 --out " + ws.file("simout"));
  CHECK(bad_sim.exit_code == 2);
  CHECK(bad_sim.output.find("ex411") != std::string::npos);
}

TEST_CASE("config file supplies values and flags override them") {
  Workspace ws("config");
  const GeneratedData data = make_linear_data(1, 0.3, 16);
  write_dataset_csv(ws.file("prim.csv"), data.primary);
  write_dataset_csv(ws.file("aux.csv"), data.auxiliaries[0]);
  {
    std::ofstream cfg(ws.file("run.json"));
    cfg << R"({"primary": ")" << ws.file("prim.csv") << R"(", "aux": [")" << ws.file("aux.csv")
        << R"("], "response": "y", "task": "regression", "learner": ["ols"], "seed": 21,)"
        << R"( "splits": 4, "out": ")" << ws.file("from_config.json") << R"("})";
  }
  const RunResult from_config = run_cli("fit --config " + ws.file("run.json"));
  INFO(from_config.output);
  REQUIRE(from_config.exit_code == 0);
  const SavedModel a = load_model(ws.file("from_config.json"));
  CHECK(a.model.config_used.n_splits == 4);
  CHECK(a.model.config_used.seed == 21);

  // --seed on the command line beats the config value
  const RunResult overridden =
      run_cli("fit --config " + ws.file("run.json") + " --seed 99 --out " + ws.file("b.json"));
  REQUIRE(overridden.exit_code == 0);
  CHECK(load_model(ws.file("b.json")).model.config_used.seed == 99);
}

TEST_CASE("sim runs are reproducible byte for byte") {
  Workspace ws("sim");
  const RunResult a =
      run_cli("sim --name ex411 --profile fast --seed 31 --out " + ws.file("run_a"));
  INFO(a.output);
  REQUIRE(a.exit_code == 0);
  const RunResult b =
      run_cli("sim --name ex411 --profile fast --seed 31 --out " + ws.file("run_b"));
  REQUIRE(b.exit_code == 0);
  const std::string results_a = read_file(ws.file("run_a/results.csv"));
  CHECK(results_a == read_file(ws.file("run_b/results.csv")));
  CHECK(read_file(ws.file("run_a/summary.csv")) == read_file(ws.file("run_b/summary.csv")));
  CHECK(results_a.rfind("method,M,xi,replication,error", 0) == 0);
  CHECK(fs::exists(ws.file("run_a/manifest.json")));
  // expected methods appear
  CHECK(results_a.find("ART-LS") != std::string::npos);
  CHECK(results_a.find("pool-LS") != std::string::npos);
  CHECK(read_file(ws.file("run_a/summary.csv")).rfind("method,M,xi,mean,sd,se,n_reps", 0) == 0);
}
