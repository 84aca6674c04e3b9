#pragma once

// Column-generation learner for single-polarity DNF rule sets.
//
// Restricted master LP over a pool of clauses k (sample counts as units):
//
//   min  sum_{i in P} xi_i + sum_k (zcov_k + cost_k) w_k
//   s.t. xi_i + sum_k cover_ik w_k >= 1   for every positive sample i
//        w, xi >= 0
//
// where zcov_k counts negatives covered by clause k and
// cost_k = lambda0 + lambda1 * |k| (scaled to sample units). The pricing
// problem searches conjunctions for the most negative reduced cost
//
//   zcov_k + lambda * cost_k - sum_{i in P} mu_i cover_ik.

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "cgx/bitvector.hpp"
#include "cgx/data.hpp"
#include "cgx/ruleset.hpp"

namespace cgx {

enum class PenaltyScale : std::uint8_t {
  // lambda values are per-sample fractions: the loss is divided by N.
  kPerSample,
  // lambda values are in sample-count units.
  kAbsolute,
};

struct CgConfig {
  double lambda0 = 0.001;
  double lambda1 = 0.0005;
  std::size_t max_rule_len = 5;
  std::size_t max_iterations = 100;
  double epsilon = 1e-6;
  // Recorded for provenance. No step of the learner is randomized.
  std::uint64_t seed = 0;
  PenaltyScale penalty_scale = PenaltyScale::kPerSample;
  // Class the rules describe; defaults to the minority class of y.
  std::optional<int> positive_class;
  // Multiplies lambda0 and lambda1 when the given class is the positive one.
  std::array<double, 2> class_penalty_multiplier = {1.0, 1.0};
  // Final selection is exhaustive up to this pool size, greedy beyond it.
  std::size_t exhaustive_selection_limit = 20;
  // Clause evaluations allowed per pricing call; 0 means unlimited. When the
  // budget runs out the best clause found so far is returned.
  std::size_t pricing_budget = 1000000;

  void validate() const;
};

// Sorted literal indices into a LiteralCatalog.
using Clause = std::vector<std::size_t>;

// A binarized instance viewed from the positive class.
class RuleProblem {
 public:
  RuleProblem(const BinarizedDataset& data, const Labels& y, const CgConfig& cfg);

  const BinarizedDataset& data() const { return *data_; }
  const CgConfig& config() const { return cfg_; }
  int positive_class() const { return positive_class_; }
  const BitVector& positives() const { return positives_; }
  const BitVector& negatives() const { return negatives_; }
  std::size_t n_positive() const { return n_positive_; }
  // One of the classes has no samples.
  bool degenerate() const { return positives_.none() || negatives_.none(); }

  // Complexity cost of a clause with `terms` literals, in sample units.
  double clause_cost(std::size_t terms) const { return rule_cost_ + term_cost_ * terms; }
  double rule_cost() const { return rule_cost_; }
  double term_cost() const { return term_cost_; }

  BitVector coverage(const Clause& clause) const;
  // Literals j and k cannot usefully appear together: same (feature, op).
  bool conflicts(std::size_t j, std::size_t k) const;

  // Integral objective of a DNF: uncovered positives + per-clause covered
  // negatives + complexity.
  double objective(const std::vector<Clause>& clauses) const;

  Rule to_rule(const Clause& clause) const;
  RuleSet to_ruleset(const std::vector<Clause>& clauses) const;

 private:
  const BinarizedDataset* data_;
  CgConfig cfg_;
  int positive_class_ = 1;
  BitVector positives_;
  BitVector negatives_;
  std::size_t n_positive_ = 0;
  double rule_cost_ = 0.0;
  double term_cost_ = 0.0;
};

struct MasterSolution {
  std::vector<double> weights;  // per pool clause
  std::vector<double> xi;       // per sample, zero outside P
  // mu_i per sample; zero outside P.
  std::vector<double> sample_duals;
  // Multiplier of the complexity cost. The master carries complexity as a
  // unit-weight penalty, which is the budget form's shadow price, so this is 1.
  double complexity_dual = 1.0;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  std::size_t simplex_iterations = 0;
};

MasterSolution solve_master(const std::vector<Clause>& pool, const RuleProblem& problem);

struct PricedClause {
  Clause clause;
  double reduced_cost = 0.0;
};

struct PricingOutcome {
  std::optional<PricedClause> best;
  // False when the evaluation budget cut the search short.
  bool exhaustive = true;
  std::size_t evaluations = 0;
};

// Reduced cost of a clause with the given coverage and length. The sum over
// covered samples runs in increasing sample order.
double reduced_cost(const RuleProblem& problem, const BitVector& coverage, std::size_t terms,
                    std::span<const double> sample_duals, double complexity_dual);

// Pricing by depth-first branch and bound over clauses of at most
// max_rule_len literals, exact unless pricing_budget runs out. Ties: lower reduced cost, then fewer literals, then
// lexicographically smaller literal indices. Returns nothing unless the best
// reduced cost is below -epsilon.
std::optional<PricedClause> price(std::span<const double> sample_duals, double complexity_dual,
                                  const RuleProblem& problem);
PricingOutcome price_search(std::span<const double> sample_duals, double complexity_dual,
                            const RuleProblem& problem);

struct CgIteration {
  std::size_t iteration = 0;
  const std::vector<Clause>* pool = nullptr;
  const MasterSolution* master = nullptr;
  const std::optional<PricedClause>* priced = nullptr;
};
using CgObserver = std::function<void(const CgIteration&)>;

struct CgFitResult {
  RuleSet ruleset;
  std::vector<Clause> selected;
  std::vector<Clause> pool;
  double objective = 0.0;     // integral objective of the selection
  double lp_objective = 0.0;  // final restricted-master optimum
  double complexity_dual = 1.0;
  std::size_t iterations = 0;
  bool converged = false;
  bool hit_iteration_limit = false;
  // Pricing calls that ran out of budget.
  std::size_t truncated_pricings = 0;
};

CgFitResult fit(const BinarizedDataset& data, const Labels& y, const CgConfig& cfg,
                const CgObserver& observer = {});

struct ExactFitResult {
  RuleSet ruleset;
  std::vector<Clause> selected;
  double objective = 0.0;
};

inline constexpr std::size_t kExactMaxLiterals = 12;
inline constexpr std::size_t kExactMaxClauses = 3;

// Exhaustive minimizer of the integral objective over DNFs with at most
// max_clauses clauses of at most max_rule_len literals. Test oracle; refuses
// instances with more than 12 literals or 3 clauses.
ExactFitResult exact_fit_bruteforce(const BinarizedDataset& data, const Labels& y,
                                    const CgConfig& cfg, std::size_t max_clauses);

}  // namespace cgx
