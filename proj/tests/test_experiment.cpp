#include <filesystem>
#include <fstream>
#include <sstream>

#include "cgx/errors.hpp"
#include "cgx/experiment.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace cgx;
namespace fs = std::filesystem;

namespace {

std::string config_error(const std::string& text) {
  try {
    config_from_json(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

ExperimentConfig tiny_config(const std::string& out) {
  ExperimentConfig cfg = default_experiment_config();
  cfg.name = "tiny";
  cfg.dataset.n_samples = 200;
  cfg.dataset.dims = 4;
  cfg.folds = 3;
  cfg.dnn.topology = {16};
  cfg.dnn.epochs = 40;
  cfg.metrics.stability_seeds = {0, 1};
  cfg.output_dir = out;
  return cfg;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("config defaults survive a round trip") {
  const ExperimentConfig d = default_experiment_config();
  CHECK(d.dnn.seed == 100);
  CHECK(config_to_json(config_from_json(config_to_json(d))) == config_to_json(d));
  CHECK(config_to_json(config_from_json("{}")) == config_to_json(d));
}

TEST_CASE("config errors carry the field path") {
  CHECK(config_error(R"({"dataset": {"sead": 3}})").rfind("dataset.sead:", 0) == 0);
  CHECK(config_error(R"({"dnn": {"epochs": "many"}})").rfind("dnn.epochs:", 0) == 0);
  CHECK(config_error(R"({"dnn": {"epochs": -3}})").rfind("dnn.epochs:", 0) == 0);
  CHECK(config_error(R"({"extraction": {"cg": {"penalty_scale": "huge"}}})")
            .rfind("extraction.cg.penalty_scale:", 0) == 0);
  CHECK(config_error(R"({"dnn": {"activation": "tanh"}})").rfind("dnn.activation:", 0) == 0);
  CHECK_FALSE(config_error("{not json").empty());
}

TEST_CASE("overrides") {
  ExperimentConfig cfg = default_experiment_config();
  apply_override(cfg, "dnn.topology=[8,4]");
  apply_override(cfg, "name=run7");
  apply_override(cfg, "extraction.cg.lambda1=0.01");
  apply_override(cfg, "extraction.cg.positive_class=0");
  CHECK(cfg.dnn.topology == std::vector<std::size_t>{8, 4});
  CHECK(cfg.name == "run7");
  CHECK(cfg.extraction.cg.lambda1 == 0.01);
  CHECK(cfg.extraction.cg.positive_class == 0);
  CHECK_THROWS_AS(apply_override(cfg, "dnn.depth=3"), ConfigError);
  CHECK_THROWS_AS(apply_override(cfg, "no-equals-sign"), ConfigError);
}

TEST_CASE("validation") {
  ExperimentConfig cfg = default_experiment_config();
  CHECK_NOTHROW(validate(cfg));
  cfg.folds = 1;
  CHECK_THROWS_WITH_AS(validate(cfg), doctest::Contains("folds"), ConfigError);
  cfg = default_experiment_config();
  cfg.dataset.kind = "csv";
  cfg.dataset.path = "/nonexistent/data.csv";
  cfg.dataset.label_column = "y";
  CHECK_THROWS_WITH_AS(validate(cfg), doctest::Contains("dataset.path"), ConfigError);
  cfg = default_experiment_config();
  cfg.metrics.p = 1.0;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg = default_experiment_config();
  cfg.extraction.k = 0;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
}

TEST_CASE("hashes") {
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
  ExperimentConfig a = default_experiment_config();
  ExperimentConfig b = default_experiment_config();
  CHECK(config_hash(a) == config_hash(b));
  b.dnn.seed = 101;
  CHECK(config_hash(a) != config_hash(b));
  const Dataset d1 = load_dataset(a.dataset);
  const Dataset d2 = load_dataset(a.dataset);
  CHECK(data_hash(d1) == data_hash(d2));
  a.dataset.seed = 43;
  CHECK(data_hash(load_dataset(a.dataset)) != data_hash(d1));
}

TEST_CASE("mode names") {
  CHECK(parse_mode("ped") == Mode::kPed);
  CHECK(parse_mode("dec") == Mode::kDec);
  CHECK(mode_name(Mode::kDec) == "dec");
  CHECK_THROWS_AS(parse_mode("both"), ParameterError);
}

TEST_CASE("experiment writes a reproducible tree") {
  const fs::path root = fs::temp_directory_path() / "cgx_experiment_test";
  fs::remove_all(root);
  const ExperimentConfig cfg = tiny_config(root.string());
  const ExperimentOutcome first = run_experiment(cfg, true);
  const ExperimentOutcome second = run_experiment(cfg, false);
  CHECK_FALSE(first.failed);
  CHECK(first.summary_csv == second.summary_csv);
  CHECK(first.folds_csv == second.folds_csv);
  CHECK(first.decomposition_csv == second.decomposition_csv);
  REQUIRE(first.folds.size() == 3);

  const std::string hash = config_hash(cfg);
  const fs::path dir = root / "tiny";
  CHECK(slurp(dir / "summary.csv") == first.summary_csv);
  CHECK(first.summary_csv.find(hash) != std::string::npos);
  for (int f = 0; f < 3; ++f) {
    const fs::path fold = dir / ("fold_" + std::to_string(f));
    for (const char* mode : {"ped", "dec"}) {
      const auto rs = nlohmann::json::parse(slurp(fold / mode / "ruleset.json"));
      CHECK(rs["provenance"]["config_hash"] == hash);
      CHECK(rs["provenance"]["seeds"].contains("dnn_fold"));
      const RuleSet parsed = from_json(slurp(fold / mode / "ruleset.json"));
      CHECK(rulesets_equal(parsed, from_text(slurp(fold / mode / "ruleset.txt"))));
      const auto report = nlohmann::json::parse(slurp(fold / mode / "report.json"));
      CHECK(report["test"]["split"] == "test");
      CHECK(report["train"]["split"] == "train");
      CHECK(report["provenance"]["config_hash"] == hash);
    }
    const auto model = nlohmann::json::parse(slurp(fold / "model.json"));
    CHECK(model["provenance"]["config_hash"] == hash);
    CHECK(nlohmann::json::parse(slurp(fold / "manifest.json"))["ok"] == true);
  }
  // header line, column line, one row per fold and mode
  std::size_t lines = 0;
  for (char c : first.folds_csv) lines += c == '\n' ? 1 : 0;
  CHECK(lines == 2 + 3 * 2);
  fs::remove_all(root);
}
