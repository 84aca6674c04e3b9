#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "cgx/cg.hpp"
#include "cgx/data.hpp"
#include "cgx/mlp.hpp"
#include "cgx/ruleset.hpp"

namespace cgx {

enum class AdmissionGate : std::uint8_t {
  // Admit when train fidelity strictly increases.
  kStrict,
  // Also require the penalized objective (1 - fidelity + lambda0 * rules +
  // lambda1 * terms, per-sample units) to strictly decrease.
  kPenalized,
};

struct ExtractionConfig {
  CgConfig cg;
  std::size_t bins = kDefaultBins;
  // Beam width of the substitution search.
  std::size_t k = 16;
  std::size_t substitution_max_len = 3;
  std::uint64_t seed = 0;
  AdmissionGate gate = AdmissionGate::kPenalized;

  void validate() const;
};

struct LayerLog {
  std::size_t layer = 0;  // 1-based hidden layer index
  std::size_t n_errors = 0;
  std::size_t n_error_rules = 0;
  std::size_t n_substituted = 0;
  std::size_t n_admitted = 0;
  bool skipped = false;  // no residual error to learn
};

struct Admission {
  std::size_t layer = 0;
  Rule hidden_rule;
  Rule input_rule;
  int assigned_class = 0;
  double substitution_error = 0.0;
  double fidelity_before = 0.0;
  double fidelity_after = 0.0;
};

struct ExtractionResult {
  RuleSet ruleset;
  std::vector<LayerLog> per_layer_log;
  std::vector<Admission> admissions;
  double ped_fidelity = 0.0;    // train split
  double final_fidelity = 0.0;  // train split
  bool hit_iteration_limit = false;
  LiteralCatalog catalog;
};

// Empty `kinds` means every input feature is continuous.
ExtractionResult cgx_ped(const MlpModel& model, const Matrix& X, const ExtractionConfig& cfg,
                         std::span<const FeatureKind> kinds = {});

struct SubstitutionResult {
  // Input-space conjunction; class label is a placeholder until assigned.
  Rule rule;
  double error = 0.0;
  std::size_t mismatches = 0;
};

// Rewrites a rule over one hidden layer's units as the input-space
// conjunction that best agrees with it on the training samples.
SubstitutionResult substitute(const Rule& hidden_rule, const Matrix& layer_activations,
                              const BinarizedDataset& inputs, const ExtractionConfig& cfg);

// The same search over an explicit target vector.
SubstitutionResult best_conjunction(const BitVector& target, const BinarizedDataset& inputs,
                                    const ExtractionConfig& cfg);

// Rule set that predicts `cls` wherever `rule` fires and rs otherwise.
// For cls == rs.positive_class() this is a union; for the default class the
// rule is negated into each existing rule.
RuleSet merge_rule(const RuleSet& rs, const Rule& rule, int cls, const LiteralCatalog& catalog);

ExtractionResult cgx_dec(const MlpModel& model, const Matrix& X, const ExtractionConfig& cfg,
                         std::span<const FeatureKind> kinds = {});

}  // namespace cgx
