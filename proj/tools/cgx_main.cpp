#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cgx/errors.hpp"
#include "cgx/experiment.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace cgx;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

struct Common {
  std::string config;
  std::vector<std::string> sets;
  std::string data;  // "xor" or a csv path; empty keeps the config's dataset
  std::string label;
  std::size_t fold = 0;
};

void add_common(CLI::App* cmd, Common& c, bool with_data = true) {
  cmd->add_option("--config", c.config, "JSON config file");
  cmd->add_option("--set", c.sets, "Override a config key, e.g. --set dnn.epochs=50");
  if (with_data) {
    cmd->add_option("--data", c.data, "'xor' or a CSV path");
    cmd->add_option("--label", c.label, "Label column of the CSV");
    cmd->add_option("--fold", c.fold, "Fold whose train split is used")->capture_default_str();
  }
}

ExperimentConfig resolve_config(const Common& c) {
  ExperimentConfig cfg = c.config.empty() ? default_experiment_config() : load_config(c.config);
  for (const auto& s : c.sets) apply_override(cfg, s);
  if (c.data == "xor") {
    cfg.dataset.kind = "xor";
  } else if (!c.data.empty()) {
    cfg.dataset.kind = "csv";
    cfg.dataset.path = c.data;
  }
  if (!c.label.empty()) cfg.dataset.label_column = c.label;
  validate(cfg);
  if (c.fold >= cfg.folds) {
    throw ConfigError("--fold: " + std::to_string(c.fold) + " is not below folds=" +
                      std::to_string(cfg.folds));
  }
  return cfg;
}

struct FoldData {
  Dataset all;
  Dataset train;
  Dataset test;
};

FoldData fold_data(const ExperimentConfig& cfg, std::size_t fold) {
  FoldData fd;
  fd.all = load_dataset(cfg.dataset);
  fd.all.validate();
  const auto splits = split_folds(fd.all, cfg.folds, cfg.fold_seed);
  fd.train = fd.all.subset(splits[fold].train_indices);
  fd.test = fd.all.subset(splits[fold].test_indices);
  return fd;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << content;
}

fs::path sibling(const fs::path& path, const std::string& suffix) {
  fs::path out = path;
  out.replace_extension();
  return out.string() + suffix;
}

json with_provenance(const std::string& body, const std::string& prov) {
  json j = json::parse(body);
  j["provenance"] = json::parse(prov);
  return j;
}

std::string csv_row(const ExperimentConfig& cfg, const std::string& mode, std::size_t fold,
                    const MetricsReport& r) {
  std::ostringstream os;
  os << cfg.name << ',' << mode << ',' << fold << ',' << r.fidelity << ',' << r.accuracy << ','
     << r.n_rules << ',' << r.n_terms << ',';
  if (r.rbo) os << *r.rbo;
  return os.str();
}

int cmd_train(const Common& c, const std::vector<std::size_t>& topology, std::optional<std::size_t> epochs,
              std::optional<double> lr, std::optional<std::uint64_t> seed, const std::string& out) {
  ExperimentConfig cfg = resolve_config(c);
  if (!topology.empty()) cfg.dnn.topology = topology;
  if (epochs) cfg.dnn.epochs = *epochs;
  if (lr) cfg.dnn.learning_rate = *lr;
  if (seed) cfg.dnn.seed = *seed;
  validate(cfg);
  const FoldData fd = fold_data(cfg, c.fold);
  TrainOptions opts = cfg.dnn;
  opts.seed = fold_training_seed(cfg, c.fold);
  const TrainResult result = train(fd.train.features, fd.train.labels, opts);
  const std::string prov = provenance_json(cfg, fd.all, c.fold);
  write_file(out, with_provenance(model_to_json(result.model), prov).dump(2) + "\n");
  const double test_acc = accuracy(fd.test.labels, predict_labels(result.model, fd.test.features));
  json manifest = {{"provenance", json::parse(prov)},
                   {"model", fs::path(out).filename().string()},
                   {"train_size", fd.train.n_samples()},
                   {"test_size", fd.test.n_samples()},
                   {"final_loss", result.loss_history.empty() ? 0.0 : result.loss_history.back()},
                   {"test_accuracy", test_acc},
                   {"config", json::parse(config_to_json(cfg))}};
  write_file(sibling(out, ".manifest.json"), manifest.dump(2) + "\n");
  std::cout << "wrote " << out << " (test accuracy " << test_acc << ")\n";
  return kExitOk;
}

int cmd_extract(const Common& c, const std::string& mode_str, const std::string& model_path,
                const std::string& out, const std::string& report_path) {
  const Mode mode = parse_mode(mode_str);
  const ExperimentConfig cfg = resolve_config(c);
  const MlpModel model = load(model_path);
  const FoldData fd = fold_data(cfg, c.fold);
  const ExtractionResult result = run_extraction(mode, model, fd.train, cfg.extraction);
  const std::string prov = provenance_json(cfg, fd.all, c.fold);

  json rs = with_provenance(to_json(result.ruleset), prov);
  rs["extraction_log"] = json::parse(extraction_log_json(result));
  write_file(out, rs.dump(2) + "\n");
  write_file(sibling(out, ".txt"), "# config_hash=" + config_hash(cfg) + " mode=" + mode_name(mode) +
                                       "\n" + to_text(result.ruleset, fd.all.feature_names));
  std::cout << to_text(result.ruleset, fd.all.feature_names);

  if (!report_path.empty()) {
    MetricsReport train_r = evaluate(result.ruleset, fd.train.features, fd.train.labels,
                                     predict_labels(model, fd.train.features), "train");
    MetricsReport test_r = evaluate(result.ruleset, fd.test.features, fd.test.labels,
                                    predict_labels(model, fd.test.features), "test");
    train_r.provenance_json = test_r.provenance_json = prov;
    json report = {{"provenance", json::parse(prov)},
                   {"mode", mode_name(mode)},
                   {"train", json::parse(to_json(train_r))},
                   {"test", json::parse(to_json(test_r))}};
    write_file(report_path, report.dump(2) + "\n");
  }
  return kExitOk;
}

int cmd_evaluate(const Common& c, const std::string& rules_path, const std::string& model_path,
                 const std::string& mode_label, const std::string& out) {
  const ExperimentConfig cfg = resolve_config(c);
  const MlpModel model = load(model_path);
  const RuleSet rs = from_json(read_file(rules_path));
  const FoldData fd = fold_data(cfg, c.fold);
  if (model.input_dim() != fd.all.n_features()) {
    throw ShapeError("model expects " + std::to_string(model.input_dim()) + " features, data has " +
                     std::to_string(fd.all.n_features()));
  }
  for (const auto& rule : rs.rules()) {
    for (const auto& lit : rule.literals()) {
      if (lit.feature >= fd.all.n_features()) {
        throw ShapeError("rule uses feature " + std::to_string(lit.feature) + " but data has " +
                         std::to_string(fd.all.n_features()));
      }
    }
  }
  const std::string prov = provenance_json(cfg, fd.all, c.fold);
  MetricsReport train_r = evaluate(rs, fd.train.features, fd.train.labels,
                                   predict_labels(model, fd.train.features), "train");
  MetricsReport test_r = evaluate(rs, fd.test.features, fd.test.labels,
                                  predict_labels(model, fd.test.features), "test");
  const AlignmentResult al = feature_alignment(rs, model, fd.train.features, fd.train.labels,
                                               {cfg.metrics.p, cfg.metrics.repeats, cfg.metrics.seed});
  train_r.rbo = test_r.rbo = al.rbo;
  train_r.provenance_json = test_r.provenance_json = prov;
  json report = {{"provenance", json::parse(prov)},
                 {"mode", mode_label},
                 {"train", json::parse(to_json(train_r))},
                 {"test", json::parse(to_json(test_r))}};
  const std::string text = report.dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
  } else {
    write_file(out, text);
  }
  std::cout << "# config_hash=" << config_hash(cfg) << "\n"
            << "dataset,mode,fold,fidelity,accuracy,n_rules,n_terms,rbo\n"
            << csv_row(cfg, mode_label, c.fold, test_r) << "\n";
  return kExitOk;
}

int cmd_run_experiment(const Common& c, const std::string& out_dir) {
  ExperimentConfig cfg = resolve_config(c);
  if (!out_dir.empty()) cfg.output_dir = out_dir;
  const ExperimentOutcome outcome = run_experiment(cfg, true);
  for (const auto& fo : outcome.folds) {
    if (!fo.ok) std::cerr << "fold " << fo.fold << " failed: " << fo.error << "\n";
  }
  std::cout << outcome.summary_csv;
  if (outcome.failed) {
    std::cerr << "experiment failed: more than half of the folds failed\n";
    return kExitRuntime;
  }
  return kExitOk;
}

int cmd_stability(const Common& c, const std::string& mode_str, const std::string& model_path,
                  std::vector<std::uint64_t> seeds) {
  const Mode mode = parse_mode(mode_str);
  const ExperimentConfig cfg = resolve_config(c);
  if (seeds.empty()) seeds = cfg.metrics.stability_seeds;
  const MlpModel model = load(model_path);
  const FoldData fd = fold_data(cfg, c.fold);
  const StabilityResult st = stability_check(
      [&](std::uint64_t seed) {
        ExtractionConfig ec = cfg.extraction;
        ec.seed = seed;
        ec.cg.seed = seed;
        return run_extraction(mode, model, fd.train, ec).ruleset;
      },
      seeds);
  json out = {{"provenance", json::parse(provenance_json(cfg, fd.all, c.fold))},
              {"mode", mode_name(mode)},
              {"seeds", seeds},
              {"stable", st.stable},
              {"warning", st.warning}};
  std::cout << out.dump(2) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rule-set surrogates for neural networks via column generation"};
  app.require_subcommand(1);

  Common common;

  auto* train_cmd = app.add_subcommand("train", "Train the network on one fold");
  add_common(train_cmd, common);
  std::vector<std::size_t> topology;
  std::optional<std::size_t> epochs;
  std::optional<double> lr;
  std::optional<std::uint64_t> seed;
  std::string model_out = "model.json";
  train_cmd->add_option("--topology", topology, "Hidden layer widths");
  train_cmd->add_option("--epochs", epochs, "Training epochs");
  train_cmd->add_option("--lr", lr, "Learning rate");
  train_cmd->add_option("--seed", seed, "Base training seed");
  train_cmd->add_option("--out", model_out, "Model JSON")->capture_default_str();

  auto* extract_cmd = app.add_subcommand("extract", "Extract a rule set from a trained network");
  add_common(extract_cmd, common);
  std::string mode = "ped";
  std::string model_path;
  std::string rules_out = "ruleset.json";
  std::string report_out;
  extract_cmd->add_option("--mode", mode, "ped or dec")->capture_default_str();
  extract_cmd->add_option("--model", model_path, "Model JSON")->required();
  extract_cmd->add_option("--out", rules_out, "Rule set JSON; a .txt copy is written beside it")->capture_default_str();
  extract_cmd->add_option("--report", report_out, "Metrics report JSON");

  auto* eval_cmd = app.add_subcommand("evaluate", "Score a rule set against a network and data");
  add_common(eval_cmd, common);
  std::string rules_path;
  std::string eval_mode = "ped";
  std::string eval_out;
  eval_cmd->add_option("--rules", rules_path, "Rule set JSON")->required();
  eval_cmd->add_option("--model", model_path, "Model JSON")->required();
  eval_cmd->add_option("--mode", eval_mode, "Label for the CSV row")->capture_default_str();
  eval_cmd->add_option("--out", eval_out, "Report JSON (stdout if empty)");

  auto* run_cmd = app.add_subcommand("run-experiment", "Cross-validated experiment over all folds");
  add_common(run_cmd, common);
  std::string out_dir;
  run_cmd->add_option("--out", out_dir, "Output directory (overrides output_dir)");

  auto* stab_cmd = app.add_subcommand("stability", "Check extraction reproducibility across seeds");
  add_common(stab_cmd, common);
  std::vector<std::uint64_t> seeds;
  stab_cmd->add_option("--mode", mode)->capture_default_str();
  stab_cmd->add_option("--model", model_path, "Model JSON")->required();
  stab_cmd->add_option("--seeds", seeds, "Extractor seeds");

  auto* print_cmd = app.add_subcommand("print-config", "Print the effective config");
  add_common(print_cmd, common, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*train_cmd) return cmd_train(common, topology, epochs, lr, seed, model_out);
    if (*extract_cmd) return cmd_extract(common, mode, model_path, rules_out, report_out);
    if (*eval_cmd) return cmd_evaluate(common, rules_path, model_path, eval_mode, eval_out);
    if (*run_cmd) return cmd_run_experiment(common, out_dir);
    if (*stab_cmd) return cmd_stability(common, mode, model_path, seeds);
    if (*print_cmd) {
      ExperimentConfig cfg =
          common.config.empty() ? default_experiment_config() : load_config(common.config);
      for (const auto& s : common.sets) apply_override(cfg, s);
      std::cout << config_to_json(cfg) << "\n";
      return kExitOk;
    }
  } catch (const ParameterError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitRuntime;
}
