#include "cgx/experiment.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cgx/errors.hpp"
#include "cgx/random.hpp"
#include "json.hpp"

namespace cgx {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

[[noreturn]] void config_fail(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

std::string penalty_name(PenaltyScale s) {
  return s == PenaltyScale::kPerSample ? "per_sample" : "absolute";
}

json to_tree(const ExperimentConfig& cfg) {
  const auto& d = cfg.dataset;
  const auto& e = cfg.extraction;
  const auto& c = e.cg;
  json j;
  j["name"] = cfg.name;
  j["output_dir"] = cfg.output_dir;
  j["folds"] = cfg.folds;
  j["fold_seed"] = cfg.fold_seed;
  j["dataset"] = {{"kind", d.kind},
                  {"n_samples", d.n_samples},
                  {"dims", d.dims},
                  {"seed", d.seed},
                  {"label_noise", d.label_noise},
                  {"third_feature", d.third_feature},
                  {"path", d.path},
                  {"label_column", d.label_column},
                  {"delimiter", d.delimiter},
                  {"categorical", d.categorical}};
  j["dnn"] = {{"topology", cfg.dnn.topology},
              {"epochs", cfg.dnn.epochs},
              {"learning_rate", cfg.dnn.learning_rate},
              {"momentum", cfg.dnn.momentum},
              {"weight_decay", cfg.dnn.weight_decay},
              {"batch_size", cfg.dnn.batch_size},
              {"activation", activation_name(cfg.dnn.hidden_activation)},
              {"seed", cfg.dnn.seed}};
  json cg = {{"lambda0", c.lambda0},
             {"lambda1", c.lambda1},
             {"max_rule_len", c.max_rule_len},
             {"max_iter", c.max_iterations},
             {"epsilon", c.epsilon},
             {"seed", c.seed},
             {"penalty_scale", penalty_name(c.penalty_scale)},
             {"positive_class", nullptr},
             {"class_penalty_multiplier", c.class_penalty_multiplier},
             {"exhaustive_selection_limit", c.exhaustive_selection_limit},
             {"pricing_budget", c.pricing_budget}};
  if (c.positive_class) cg["positive_class"] = *c.positive_class;
  j["extraction"] = {{"bins", e.bins},
                     {"k", e.k},
                     {"substitution_max_len", e.substitution_max_len},
                     {"seed", e.seed},
                     {"gate", e.gate == AdmissionGate::kStrict ? "strict" : "penalized"},
                     {"cg", cg}};
  j["metrics"] = {{"p", cfg.metrics.p},
                  {"repeats", cfg.metrics.repeats},
                  {"seed", cfg.metrics.seed},
                  {"stability_seeds", cfg.metrics.stability_seeds}};
  return j;
}

bool compatible(const json& def, const json& given) {
  if (def.is_null()) return given.is_null() || given.is_number_integer();
  if (def.is_number()) return given.is_number();
  return def.type() == given.type();
}

// Overlays `given` onto `base`, rejecting keys the defaults do not have.
void merge(json& base, const json& given, const std::string& path) {
  if (!given.is_object()) config_fail(path.empty() ? "<root>" : path, "expected an object");
  for (auto it = given.begin(); it != given.end(); ++it) {
    const std::string key_path = path.empty() ? it.key() : path + "." + it.key();
    if (!base.contains(it.key())) config_fail(key_path, "unknown key");
    json& slot = base[it.key()];
    if (slot.is_object()) {
      merge(slot, it.value(), key_path);
    } else {
      if (!compatible(slot, it.value())) config_fail(key_path, "wrong type");
      slot = it.value();
    }
  }
}

std::size_t get_count(const json& j, const std::string& path) {
  if (!j.is_number_integer() || (j.is_number_integer() && !j.is_number_unsigned() && j.get<long long>() < 0)) {
    config_fail(path, "expected a non-negative integer");
  }
  return j.get<std::size_t>();
}

std::uint64_t get_seed(const json& j, const std::string& path) {
  return static_cast<std::uint64_t>(get_count(j, path));
}

double get_real(const json& j, const std::string& path) {
  if (!j.is_number()) config_fail(path, "expected a number");
  return j.get<double>();
}

ExperimentConfig from_tree(const json& j) {
  ExperimentConfig cfg;
  cfg.name = j["name"].get<std::string>();
  cfg.output_dir = j["output_dir"].get<std::string>();
  cfg.folds = get_count(j["folds"], "folds");
  cfg.fold_seed = get_seed(j["fold_seed"], "fold_seed");

  const json& d = j["dataset"];
  cfg.dataset.kind = d["kind"].get<std::string>();
  cfg.dataset.n_samples = get_count(d["n_samples"], "dataset.n_samples");
  cfg.dataset.dims = get_count(d["dims"], "dataset.dims");
  cfg.dataset.seed = get_seed(d["seed"], "dataset.seed");
  cfg.dataset.label_noise = get_real(d["label_noise"], "dataset.label_noise");
  cfg.dataset.third_feature = d["third_feature"].get<bool>();
  cfg.dataset.path = d["path"].get<std::string>();
  cfg.dataset.label_column = d["label_column"].get<std::string>();
  cfg.dataset.delimiter = d["delimiter"].get<std::string>();
  cfg.dataset.categorical.clear();
  for (std::size_t i = 0; i < d["categorical"].size(); ++i) {
    const json& v = d["categorical"][i];
    if (!v.is_string()) config_fail("dataset.categorical[" + std::to_string(i) + "]", "expected a string");
    cfg.dataset.categorical.push_back(v.get<std::string>());
  }

  const json& n = j["dnn"];
  cfg.dnn.topology.clear();
  for (std::size_t i = 0; i < n["topology"].size(); ++i) {
    cfg.dnn.topology.push_back(get_count(n["topology"][i], "dnn.topology[" + std::to_string(i) + "]"));
  }
  cfg.dnn.epochs = get_count(n["epochs"], "dnn.epochs");
  cfg.dnn.learning_rate = get_real(n["learning_rate"], "dnn.learning_rate");
  cfg.dnn.momentum = get_real(n["momentum"], "dnn.momentum");
  cfg.dnn.weight_decay = get_real(n["weight_decay"], "dnn.weight_decay");
  cfg.dnn.batch_size = get_count(n["batch_size"], "dnn.batch_size");
  try {
    cfg.dnn.hidden_activation = parse_activation(n["activation"].get<std::string>());
  } catch (const Error& e) {
    config_fail("dnn.activation", e.what());
  }
  cfg.dnn.seed = get_seed(n["seed"], "dnn.seed");

  const json& e = j["extraction"];
  cfg.extraction.bins = get_count(e["bins"], "extraction.bins");
  cfg.extraction.k = get_count(e["k"], "extraction.k");
  cfg.extraction.substitution_max_len =
      get_count(e["substitution_max_len"], "extraction.substitution_max_len");
  cfg.extraction.seed = get_seed(e["seed"], "extraction.seed");
  const std::string gate = e["gate"].get<std::string>();
  if (gate == "strict") {
    cfg.extraction.gate = AdmissionGate::kStrict;
  } else if (gate == "penalized") {
    cfg.extraction.gate = AdmissionGate::kPenalized;
  } else {
    config_fail("extraction.gate", "expected 'strict' or 'penalized'");
  }
  const json& c = e["cg"];
  auto& cg = cfg.extraction.cg;
  cg.lambda0 = get_real(c["lambda0"], "extraction.cg.lambda0");
  cg.lambda1 = get_real(c["lambda1"], "extraction.cg.lambda1");
  cg.max_rule_len = get_count(c["max_rule_len"], "extraction.cg.max_rule_len");
  cg.max_iterations = get_count(c["max_iter"], "extraction.cg.max_iter");
  cg.epsilon = get_real(c["epsilon"], "extraction.cg.epsilon");
  cg.seed = get_seed(c["seed"], "extraction.cg.seed");
  const std::string scale = c["penalty_scale"].get<std::string>();
  if (scale == "per_sample") {
    cg.penalty_scale = PenaltyScale::kPerSample;
  } else if (scale == "absolute") {
    cg.penalty_scale = PenaltyScale::kAbsolute;
  } else {
    config_fail("extraction.cg.penalty_scale", "expected 'per_sample' or 'absolute'");
  }
  if (c["positive_class"].is_null()) {
    cg.positive_class.reset();
  } else {
    cg.positive_class = c["positive_class"].get<int>();
  }
  if (c["class_penalty_multiplier"].size() != 2) {
    config_fail("extraction.cg.class_penalty_multiplier", "expected two numbers");
  }
  for (std::size_t i = 0; i < 2; ++i) {
    cg.class_penalty_multiplier[i] = get_real(c["class_penalty_multiplier"][i],
                                              "extraction.cg.class_penalty_multiplier");
  }
  cg.exhaustive_selection_limit =
      get_count(c["exhaustive_selection_limit"], "extraction.cg.exhaustive_selection_limit");
  cg.pricing_budget = get_count(c["pricing_budget"], "extraction.cg.pricing_budget");

  const json& m = j["metrics"];
  cfg.metrics.p = get_real(m["p"], "metrics.p");
  cfg.metrics.repeats = get_count(m["repeats"], "metrics.repeats");
  cfg.metrics.seed = get_seed(m["seed"], "metrics.seed");
  cfg.metrics.stability_seeds.clear();
  for (std::size_t i = 0; i < m["stability_seeds"].size(); ++i) {
    cfg.metrics.stability_seeds.push_back(
        get_seed(m["stability_seeds"][i], "metrics.stability_seeds[" + std::to_string(i) + "]"));
  }
  return cfg;
}

void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << content;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

// Sample standard deviation; zero for a single value.
MeanStd mean_std(const std::vector<double>& v) {
  MeanStd out;
  if (v.empty()) return out;
  for (double x : v) out.mean += x;
  out.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - out.mean) * (x - out.mean);
    out.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return out;
}

json ranking_json(const RankedFeatures& r) {
  json arr = json::array();
  for (std::size_t i = 0; i < r.size(); ++i) {
    arr.push_back({{"feature", r.features[i]}, {"score", r.scores[i]}});
  }
  return arr;
}

}  // namespace

ExperimentConfig default_experiment_config() {
  ExperimentConfig cfg;
  cfg.dnn.seed = 100;
  return cfg;
}

ExperimentConfig config_from_json(const std::string& text) {
  json given;
  try {
    given = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("<file>: not valid JSON: ") + e.what());
  }
  json tree = to_tree(default_experiment_config());
  merge(tree, given, "");
  try {
    return from_tree(tree);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("<config>: ") + e.what());
  }
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config: cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return config_from_json(buf.str());
}

std::string config_to_json(const ExperimentConfig& cfg) { return to_tree(cfg).dump(2); }

void apply_override(ExperimentConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("--set: expected key.path=value, got '" + assignment + "'");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;  // bare string
  }
  json patch = value;
  std::vector<std::string> parts;
  std::stringstream ss(key);
  for (std::string part; std::getline(ss, part, '.');) parts.push_back(part);
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) patch = json{{*it, patch}};
  json tree = to_tree(cfg);
  merge(tree, patch, "");
  cfg = from_tree(tree);
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.name.empty() || cfg.name.find('/') != std::string::npos) {
    config_fail("name", "must be a non-empty name without '/'");
  }
  if (cfg.folds < 2) config_fail("folds", "must be >= 2");
  const auto& d = cfg.dataset;
  if (d.kind == "xor") {
    if (d.dims < 2) config_fail("dataset.dims", "must be >= 2");
    if (d.third_feature && d.dims < 3) config_fail("dataset.third_feature", "needs dims >= 3");
    if (d.n_samples < cfg.folds) config_fail("dataset.n_samples", "must be >= folds");
    if (!(d.label_noise >= 0.0 && d.label_noise <= 1.0)) {
      config_fail("dataset.label_noise", "must lie in [0, 1]");
    }
  } else if (d.kind == "csv") {
    if (d.path.empty()) config_fail("dataset.path", "required for csv datasets");
    if (!fs::exists(d.path)) config_fail("dataset.path", "file '" + d.path + "' does not exist");
    if (d.label_column.empty()) config_fail("dataset.label_column", "required for csv datasets");
    if (d.delimiter.size() != 1) config_fail("dataset.delimiter", "must be one character");
  } else {
    config_fail("dataset.kind", "expected 'xor' or 'csv'");
  }
  const auto& n = cfg.dnn;
  if (n.topology.empty()) config_fail("dnn.topology", "must list at least one hidden layer");
  for (std::size_t w : n.topology) {
    if (w == 0) config_fail("dnn.topology", "widths must be positive");
  }
  if (n.epochs < 1) config_fail("dnn.epochs", "must be >= 1");
  if (!(n.learning_rate > 0.0)) config_fail("dnn.learning_rate", "must be positive");
  if (!(n.momentum >= 0.0 && n.momentum < 1.0)) config_fail("dnn.momentum", "must lie in [0, 1)");
  if (!(n.weight_decay >= 0.0)) config_fail("dnn.weight_decay", "must be >= 0");
  if (n.batch_size < 1) config_fail("dnn.batch_size", "must be >= 1");
  if (n.hidden_activation == Activation::kSoftmax) config_fail("dnn.activation", "relu or sigmoid");
  const auto& e = cfg.extraction;
  if (e.bins < 1) config_fail("extraction.bins", "must be >= 1");
  if (e.k < 1) config_fail("extraction.k", "must be >= 1");
  if (e.substitution_max_len < 1) config_fail("extraction.substitution_max_len", "must be >= 1");
  try {
    e.validate();
  } catch (const ParameterError& err) {
    config_fail("extraction", err.what());
  }
  const auto& m = cfg.metrics;
  if (!(m.p > 0.0 && m.p < 1.0)) config_fail("metrics.p", "must lie in (0, 1)");
  if (m.repeats < 1) config_fail("metrics.repeats", "must be >= 1");
  if (m.stability_seeds.empty()) config_fail("metrics.stability_seeds", "must not be empty");
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string config_hash(const ExperimentConfig& cfg) { return fnv1a_hex(to_tree(cfg).dump()); }

std::string data_hash(const Dataset& ds) {
  std::string bytes;
  bytes.reserve(ds.features.values().size() * 8 + ds.labels.size());
  for (double v : ds.features.values()) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int b = 0; b < 8; ++b) bytes.push_back(static_cast<char>((bits >> (8 * b)) & 0xff));
  }
  for (int y : ds.labels) bytes.push_back(static_cast<char>(y));
  return fnv1a_hex(bytes);
}

Dataset load_dataset(const DatasetSpec& spec) {
  if (spec.kind == "xor") {
    XorOptions opts;
    opts.label_noise = spec.label_noise;
    opts.third_feature = spec.third_feature;
    return generate_xor(spec.n_samples, spec.dims, spec.seed, opts);
  }
  if (spec.kind == "csv") {
    CsvOptions opts;
    if (spec.delimiter.size() != 1) throw ConfigError("dataset.delimiter: must be one character");
    opts.delimiter = spec.delimiter[0];
    for (const auto& name : spec.categorical) opts.schema[name] = FeatureKind::kCategorical;
    return load_csv(spec.path, spec.label_column, opts);
  }
  throw ConfigError("dataset.kind: expected 'xor' or 'csv'");
}

std::uint64_t fold_training_seed(const ExperimentConfig& cfg, std::size_t fold) {
  return mix_seed(cfg.dnn.seed, fold);
}

std::string mode_name(Mode mode) { return mode == Mode::kPed ? "ped" : "dec"; }

Mode parse_mode(const std::string& name) {
  if (name == "ped") return Mode::kPed;
  if (name == "dec") return Mode::kDec;
  throw ParameterError("unknown mode '" + name + "' (expected ped or dec)");
}

ExtractionResult run_extraction(Mode mode, const MlpModel& model, const Dataset& train,
                                const ExtractionConfig& cfg) {
  if (model.input_dim() != train.n_features()) {
    throw ShapeError("model expects " + std::to_string(model.input_dim()) + " features, data has " +
                     std::to_string(train.n_features()));
  }
  return mode == Mode::kPed ? cgx_ped(model, train.features, cfg, train.feature_kinds)
                            : cgx_dec(model, train.features, cfg, train.feature_kinds);
}

FoldOutcome run_fold(const ExperimentConfig& cfg, const Dataset& ds, const FoldSplit& split,
                     std::size_t fold) {
  FoldOutcome out;
  out.fold = fold;
  out.training_seed = fold_training_seed(cfg, fold);
  try {
    const Dataset train_ds = ds.subset(split.train_indices);
    const Dataset test_ds = ds.subset(split.test_indices);
    TrainOptions topts = cfg.dnn;
    topts.seed = out.training_seed;
    out.model = train(train_ds.features, train_ds.labels, topts).model;
    const Labels y_dnn_train = predict_labels(out.model, train_ds.features);
    const Labels y_dnn_test = predict_labels(out.model, test_ds.features);
    out.dnn_test_accuracy = accuracy(test_ds.labels, y_dnn_test);

    for (Mode mode : {Mode::kPed, Mode::kDec}) {
      ModeOutcome mo;
      mo.mode = mode;
      mo.extraction = run_extraction(mode, out.model, train_ds, cfg.extraction);
      const RuleSet& rs = mo.extraction.ruleset;
      mo.reports.train = evaluate(rs, train_ds.features, train_ds.labels, y_dnn_train, "train");
      mo.reports.test = evaluate(rs, test_ds.features, test_ds.labels, y_dnn_test, "test");
      mo.alignment = feature_alignment(rs, out.model, train_ds.features, train_ds.labels,
                                       {cfg.metrics.p, cfg.metrics.repeats, cfg.metrics.seed});
      mo.reports.train.rbo = mo.alignment.rbo;
      mo.reports.test.rbo = mo.alignment.rbo;
      const Extractor extractor = [&](std::uint64_t seed) {
        ExtractionConfig ec = cfg.extraction;
        ec.seed = seed;
        ec.cg.seed = seed;
        return run_extraction(mode, out.model, train_ds, ec).ruleset;
      };
      mo.stability = stability_check(extractor, cfg.metrics.stability_seeds);
      mo.reports.train.stability = mo.stability.stable;
      mo.reports.test.stability = mo.stability.stable;
      out.modes.push_back(std::move(mo));
    }
    out.ok = true;
  } catch (const Error& e) {
    out.ok = false;
    out.error = e.what();
    out.modes.clear();
  }
  return out;
}

std::string provenance_json(const ExperimentConfig& cfg, const Dataset& ds,
                            std::optional<std::size_t> fold) {
  json p;
  p["config_hash"] = config_hash(cfg);
  p["data_hash"] = data_hash(ds);
  json seeds = {{"dataset", cfg.dataset.seed},
                {"fold_split", cfg.fold_seed},
                {"dnn", cfg.dnn.seed},
                {"extraction", cfg.extraction.seed},
                {"cg", cfg.extraction.cg.seed},
                {"metrics", cfg.metrics.seed},
                {"stability", cfg.metrics.stability_seeds}};
  if (fold) {
    p["fold"] = *fold;
    seeds["dnn_fold"] = fold_training_seed(cfg, *fold);
  }
  p["seeds"] = seeds;
  return p.dump();
}

std::string extraction_log_json(const ExtractionResult& result) {
  json j;
  j["ped_fidelity"] = result.ped_fidelity;
  j["final_fidelity"] = result.final_fidelity;
  j["hit_iteration_limit"] = result.hit_iteration_limit;
  json layers = json::array();
  for (const auto& l : result.per_layer_log) {
    layers.push_back({{"layer", l.layer},
                      {"n_errors", l.n_errors},
                      {"n_error_rules", l.n_error_rules},
                      {"n_substituted", l.n_substituted},
                      {"n_admitted", l.n_admitted},
                      {"skipped", l.skipped}});
  }
  j["per_layer_log"] = layers;
  json admissions = json::array();
  for (const auto& a : result.admissions) {
    admissions.push_back({{"layer", a.layer},
                          {"hidden_rule", to_text(RuleSet({a.hidden_rule}, a.hidden_rule.class_label()))},
                          {"input_rule", to_text(RuleSet({Rule(a.input_rule.literals(), 1)}, 1))},
                          {"assigned_class", a.assigned_class},
                          {"substitution_error", a.substitution_error},
                          {"fidelity_before", a.fidelity_before},
                          {"fidelity_after", a.fidelity_after}});
  }
  j["admissions"] = admissions;
  return j.dump();
}

ExperimentOutcome run_experiment(const ExperimentConfig& cfg, bool write_files) {
  validate(cfg);
  const Dataset ds = load_dataset(cfg.dataset);
  ds.validate();
  const auto splits = split_folds(ds, cfg.folds, cfg.fold_seed);
  const std::string prov = provenance_json(cfg, ds);
  const json prov_tree = json::parse(prov);
  const fs::path root = fs::path(cfg.output_dir) / cfg.name;

  std::string seeds_line;
  for (const auto& [k, v] : prov_tree["seeds"].items()) {
    seeds_line += (seeds_line.empty() ? "" : ",") + k + ":" + v.dump();
  }
  const std::string csv_header = "# config_hash=" + prov_tree["config_hash"].get<std::string>() +
                                 " data_hash=" + prov_tree["data_hash"].get<std::string>() +
                                 " seeds=" + seeds_line + "\n";

  ExperimentOutcome outcome;
  std::size_t failures = 0;
  for (std::size_t f = 0; f < splits.size(); ++f) {
    FoldOutcome fo = run_fold(cfg, ds, splits[f], f);
    if (!fo.ok) ++failures;
    if (write_files) {
      const fs::path dir = root / ("fold_" + std::to_string(f));
      const json fold_prov = json::parse(provenance_json(cfg, ds, f));
      json manifest = {{"provenance", fold_prov},
                       {"ok", fo.ok},
                       {"error", fo.error},
                       {"train_size", splits[f].train_indices.size()},
                       {"test_size", splits[f].test_indices.size()},
                       {"dnn_test_accuracy", fo.dnn_test_accuracy}};
      write_file(dir / "manifest.json", manifest.dump(2) + "\n");
      if (fo.ok) {
        json model = json::parse(model_to_json(fo.model));
        model["provenance"] = fold_prov;
        write_file(dir / "model.json", model.dump(2) + "\n");
        for (const auto& mo : fo.modes) {
          const fs::path mdir = dir / mode_name(mo.mode);
          json rs = json::parse(to_json(mo.extraction.ruleset));
          rs["provenance"] = fold_prov;
          write_file(mdir / "ruleset.json", rs.dump(2) + "\n");
          write_file(mdir / "ruleset.txt", "# config_hash=" + fold_prov["config_hash"].get<std::string>() +
                                               " fold=" + std::to_string(f) + "\n" +
                                               to_text(mo.extraction.ruleset, ds.feature_names));
          MetricsReport train_r = mo.reports.train;
          MetricsReport test_r = mo.reports.test;
          train_r.provenance_json = test_r.provenance_json = fold_prov.dump();
          json report = {{"provenance", fold_prov},
                         {"mode", mode_name(mo.mode)},
                         {"train", json::parse(to_json(train_r))},
                         {"test", json::parse(to_json(test_r))},
                         {"alignment",
                          {{"p", cfg.metrics.p},
                           {"split", "train"},
                           {"rule_ranking", ranking_json(mo.alignment.rule_ranking)},
                           {"dnn_ranking", ranking_json(mo.alignment.dnn_ranking)}}},
                         {"stability",
                          {{"stable", mo.stability.stable},
                           {"seeds", cfg.metrics.stability_seeds},
                           {"warning", mo.stability.warning}}},
                         {"extraction", json::parse(extraction_log_json(mo.extraction))}};
          write_file(mdir / "report.json", report.dump(2) + "\n");
        }
      }
    }
    outcome.folds.push_back(std::move(fo));
  }
  outcome.failed = failures * 2 > splits.size();

  // Per-fold rows and the decomposition record use the test split.
  std::string folds_csv = csv_header + "dataset,mode,fold,fidelity,accuracy,n_rules,n_terms,rbo\n";
  std::string decomposition_csv =
      csv_header + "dataset,fold,dnn_error,ped_fidelity,dec_fidelity,fidelity_gain\n";
  std::string summary_csv =
      csv_header +
      "dataset,mode,split,n_folds,fidelity_mean,fidelity_std,accuracy_mean,accuracy_std,"
      "n_rules_mean,n_rules_std,n_terms_mean,n_terms_std,rbo_mean,rbo_std,stable_folds\n";
  for (const auto& fo : outcome.folds) {
    if (!fo.ok) continue;
    for (const auto& mo : fo.modes) {
      const auto& r = mo.reports.test;
      folds_csv += cfg.name + "," + mode_name(mo.mode) + "," + std::to_string(fo.fold) + "," +
                   fmt(r.fidelity) + "," + fmt(r.accuracy) + "," + std::to_string(r.n_rules) + "," +
                   std::to_string(r.n_terms) + "," + (r.rbo ? fmt(*r.rbo) : "") + "\n";
    }
    const double ped = fo.modes[0].reports.test.fidelity;
    const double dec = fo.modes[1].reports.test.fidelity;
    decomposition_csv += cfg.name + "," + std::to_string(fo.fold) + "," +
                         fmt(1.0 - fo.dnn_test_accuracy) + "," + fmt(ped) + "," + fmt(dec) + "," +
                         fmt(dec - ped) + "\n";
  }
  for (std::size_t m = 0; m < 2; ++m) {
    for (const char* split : {"train", "test"}) {
      std::vector<double> fid, acc, rules, terms, rbo;
      std::size_t stable = 0;
      for (const auto& fo : outcome.folds) {
        if (!fo.ok) continue;
        const auto& mo = fo.modes[m];
        const MetricsReport& r = std::string(split) == "train" ? mo.reports.train : mo.reports.test;
        fid.push_back(r.fidelity);
        acc.push_back(r.accuracy);
        rules.push_back(static_cast<double>(r.n_rules));
        terms.push_back(static_cast<double>(r.n_terms));
        if (r.rbo) rbo.push_back(*r.rbo);
        stable += mo.stability.stable ? 1 : 0;
      }
      const auto a = mean_std(fid), b = mean_std(acc), c = mean_std(rules), d = mean_std(terms),
                 e = mean_std(rbo);
      summary_csv += cfg.name + "," + mode_name(m == 0 ? Mode::kPed : Mode::kDec) + "," + split +
                     "," + std::to_string(fid.size()) + "," + fmt(a.mean) + "," + fmt(a.std) + "," +
                     fmt(b.mean) + "," + fmt(b.std) + "," + fmt(c.mean) + "," + fmt(c.std) + "," +
                     fmt(d.mean) + "," + fmt(d.std) + "," + fmt(e.mean) + "," + fmt(e.std) + "," +
                     std::to_string(stable) + "\n";
    }
  }
  outcome.summary_csv = summary_csv;
  outcome.folds_csv = folds_csv;
  outcome.decomposition_csv = decomposition_csv;
  if (write_files) {
    write_file(root / "summary.csv", summary_csv);
    write_file(root / "folds.csv", folds_csv);
    write_file(root / "decomposition.csv", decomposition_csv);
    write_file(root / "config.json", config_to_json(cfg) + "\n");
  }
  return outcome;
}

}  // namespace cgx
