#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cgx/data.hpp"
#include "cgx/mlp.hpp"
#include "cgx/ruleset.hpp"

namespace cgx {

// Fraction of positions where a and b agree.
double fidelity(std::span<const int> a, std::span<const int> b);
// Same computation against ground-truth labels.
double accuracy(std::span<const int> truth, std::span<const int> predicted);

// Feature indices, most important first, with non-increasing scores.
struct RankedFeatures {
  std::vector<std::size_t> features;
  std::vector<double> scores;

  std::size_t size() const { return features.size(); }
  bool empty() const { return features.empty(); }
};

// Sorts (feature, score) pairs by descending score, ties by feature index.
RankedFeatures rank_scores(std::span<const double> scores, bool positive_only = false);

inline constexpr double kDefaultRboP = 0.9;

// Truncated rank-biased overlap normalized by the weight sum, evaluated to
// depth min(|S|, |T|).
double rbo(std::span<const std::size_t> s, std::span<const std::size_t> t, double p = kDefaultRboP);
inline double rbo(const RankedFeatures& s, const RankedFeatures& t, double p = kDefaultRboP) {
  return rbo(s.features, t.features, p);
}

// score(f) = sum over rules of coverage(rule) * share of the rule's literals
// on f. Only features with a positive score are ranked.
RankedFeatures rule_feature_importance(const RuleSet& rs, const Matrix& X);

// Mean accuracy drop when a feature column is permuted, clamped at zero.
// Every (feature, repeat) pair draws from its own seeded stream.
RankedFeatures dnn_feature_importance(const MlpModel& model, const Matrix& X, const Labels& y,
                                      std::size_t repeats, std::uint64_t seed);

struct AlignmentResult {
  RankedFeatures rule_ranking;
  RankedFeatures dnn_ranking;
  // Absent when the rule set ranks no feature.
  std::optional<double> rbo;
};

struct AlignmentOptions {
  double p = kDefaultRboP;
  std::size_t repeats = 5;
  std::uint64_t seed = 0;
};

AlignmentResult feature_alignment(const RuleSet& rs, const MlpModel& model, const Matrix& X,
                                  const Labels& y, const AlignmentOptions& options = {});

struct StabilityResult {
  bool stable = true;
  std::vector<RuleSet> rulesets;
  // Set when fewer than two seeds made the check vacuous.
  std::string warning;
};

using Extractor = std::function<RuleSet(std::uint64_t seed)>;

// Runs the extractor once per seed; stable iff all outputs are pairwise equal.
StabilityResult stability_check(const Extractor& extractor, std::span<const std::uint64_t> seeds);

struct MetricsReport {
  std::string split;  // "train" or "test"
  double fidelity = 0.0;
  double accuracy = 0.0;
  std::size_t n_rules = 0;
  std::size_t n_terms = 0;
  std::optional<double> rbo;
  std::optional<bool> stability;
  // Free-form provenance (config hash, seeds) serialized as given.
  std::string provenance_json = "{}";
};

MetricsReport evaluate(const RuleSet& rs, const Matrix& X, const Labels& y_true,
                       const Labels& y_model, const std::string& split);

std::string to_json(const MetricsReport& report);
MetricsReport report_from_json(const std::string& text);

}  // namespace cgx
