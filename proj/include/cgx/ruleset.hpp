#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cgx/data.hpp"
#include "cgx/literal.hpp"

namespace cgx {

// A conjunction of literals predicting class_label.
//
// Always canonical: literals sorted by (feature, op, threshold), and at most
// one literal per (feature, op), keeping the tighter bound. Two different
// equality literals on one feature can never hold together and are rejected.
class Rule {
 public:
  Rule(std::vector<Literal> literals, int class_label);

  const std::vector<Literal>& literals() const { return literals_; }
  int class_label() const { return class_label_; }
  std::size_t size() const { return literals_.size(); }

  // True iff every literal holds for x.
  bool fires(std::span<const double> x) const;

  friend auto operator<=>(const Rule& a, const Rule& b) {
    return a.literals_ <=> b.literals_;
  }
  friend bool operator==(const Rule&, const Rule&) = default;

 private:
  std::vector<Literal> literals_;
  int class_label_;
};

bool eval_rule(const Rule& rule, std::span<const double> x);

struct Complexity {
  std::size_t n_rules = 0;
  std::size_t n_terms = 0;
  friend bool operator==(const Complexity&, const Complexity&) = default;
};

// Single-polarity DNF: positive_class if any rule fires, default_class
// otherwise. Canonical on construction: rules sorted and deduplicated.
class RuleSet {
 public:
  RuleSet() = default;
  RuleSet(std::vector<Rule> rules, int positive_class);

  const std::vector<Rule>& rules() const { return rules_; }
  int positive_class() const { return positive_class_; }
  int default_class() const { return 1 - positive_class_; }
  bool empty() const { return rules_.empty(); }

  int predict(std::span<const double> x) const;
  Labels predict(const Matrix& X) const;
  // Samples on which at least one rule fires.
  BitVector coverage(const Matrix& X) const;

  Complexity complexity() const;

  // Bit-exact structural equality.
  friend bool operator==(const RuleSet&, const RuleSet&) = default;

 private:
  std::vector<Rule> rules_;
  int positive_class_ = 1;
};

int predict(const RuleSet& rs, std::span<const double> x);
Complexity complexity(const RuleSet& rs);

// Canonical form of an arbitrary collection of rules. Rules whose label is not
// positive_class are rejected.
RuleSet canonicalize(std::vector<Rule> rules, int positive_class);
RuleSet canonicalize(const RuleSet& rs);

// Structural identity after canonicalization, thresholds compared bit-for-bit.
bool rulesets_equal(const RuleSet& a, const RuleSet& b);

// Default feature names: x1, x2, ...
std::vector<std::string> default_feature_names(std::size_t n_features);

// One "IF ... THEN class=c" line per rule plus a final "ELSE class=d" line.
// Thresholds are printed in shortest round-trip form. The parser skips blank
// lines and lines starting with '#'.
std::string to_text(const RuleSet& rs, std::span<const std::string> feature_names = {});
RuleSet from_text(std::string_view text, std::span<const std::string> feature_names = {});

inline constexpr int kRuleSetFormatVersion = 1;

std::string to_json(const RuleSet& rs);
RuleSet from_json(std::string_view json);

// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

}  // namespace cgx
