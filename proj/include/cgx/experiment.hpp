#pragma once

// Experiment configuration and the fold pipeline shared by the command-line
// tool, the acceptance suite and the Python module.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cgx/data.hpp"
#include "cgx/extract.hpp"
#include "cgx/metrics.hpp"
#include "cgx/mlp.hpp"

namespace cgx {

struct DatasetSpec {
  std::string kind = "xor";  // "xor" or "csv"
  // xor
  std::size_t n_samples = 1000;
  std::size_t dims = 10;
  std::uint64_t seed = 42;
  double label_noise = 0.0;
  bool third_feature = false;
  // csv
  std::string path;
  std::string label_column;
  std::string delimiter = ",";
  std::vector<std::string> categorical;
};

struct MetricsSpec {
  double p = kDefaultRboP;
  std::size_t repeats = 5;
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> stability_seeds = {0, 1, 2, 3, 4};
};

struct ExperimentConfig {
  std::string name = "xor";
  DatasetSpec dataset;
  std::size_t folds = 5;
  std::uint64_t fold_seed = 7;
  TrainOptions dnn;
  ExtractionConfig extraction;
  MetricsSpec metrics;
  std::string output_dir = "out";
};

// Defaults used when a key is absent. The dnn seed differs from TrainOptions'.
ExperimentConfig default_experiment_config();

// Parses a JSON config on top of the defaults. Unknown keys and bad values
// raise ConfigError naming the offending field path.
ExperimentConfig config_from_json(const std::string& text);
ExperimentConfig load_config(const std::string& path);
std::string config_to_json(const ExperimentConfig& cfg);

// Sets one field from "a.b.c=value", value given as JSON (bare strings allowed).
void apply_override(ExperimentConfig& cfg, const std::string& assignment);

// Checks ranges and that referenced files exist.
void validate(const ExperimentConfig& cfg);

// 64-bit FNV-1a, hex encoded.
std::string fnv1a_hex(std::string_view bytes);
std::string config_hash(const ExperimentConfig& cfg);
std::string data_hash(const Dataset& ds);

Dataset load_dataset(const DatasetSpec& spec);

// Seed of the network trained on a fold.
std::uint64_t fold_training_seed(const ExperimentConfig& cfg, std::size_t fold);

enum class Mode { kPed, kDec };
std::string mode_name(Mode mode);
Mode parse_mode(const std::string& name);

ExtractionResult run_extraction(Mode mode, const MlpModel& model, const Dataset& train,
                                const ExtractionConfig& cfg);

struct SplitReports {
  MetricsReport train;
  MetricsReport test;
};

struct ModeOutcome {
  Mode mode = Mode::kPed;
  ExtractionResult extraction;
  SplitReports reports;
  AlignmentResult alignment;
  StabilityResult stability;
};

struct FoldOutcome {
  std::size_t fold = 0;
  bool ok = false;
  std::string error;
  std::uint64_t training_seed = 0;
  double dnn_test_accuracy = 0.0;
  MlpModel model;
  std::vector<ModeOutcome> modes;
};

// Trains, extracts with both modes, evaluates and checks stability on one
// fold. Does not write files.
FoldOutcome run_fold(const ExperimentConfig& cfg, const Dataset& ds, const FoldSplit& split,
                     std::size_t fold);

struct ExperimentOutcome {
  std::vector<FoldOutcome> folds;
  std::string summary_csv;
  std::string folds_csv;
  std::string decomposition_csv;
  bool failed = false;  // more than half of the folds failed
};

// Full loop over folds. Writes the output tree when write_files is set.
ExperimentOutcome run_experiment(const ExperimentConfig& cfg, bool write_files = true);

// JSON provenance block: config hash, data hash and every seed.
std::string provenance_json(const ExperimentConfig& cfg, const Dataset& ds,
                            std::optional<std::size_t> fold = std::nullopt);

std::string extraction_log_json(const ExtractionResult& result);

}  // namespace cgx
