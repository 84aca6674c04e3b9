#include "cgx/cg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "cgx/errors.hpp"
#include "cgx/lp.hpp"

namespace cgx {

void CgConfig::validate() const {
  if (!(lambda0 >= 0.0) || !(lambda1 >= 0.0)) throw ParameterError("lambda0 and lambda1 must be >= 0");
  if (max_rule_len < 1) throw ParameterError("max_rule_len must be >= 1");
  if (!(epsilon > 0.0) || epsilon > 1e-4) throw ParameterError("epsilon must lie in (0, 1e-4]");
  if (positive_class && *positive_class != 0 && *positive_class != 1) {
    throw ParameterError("positive_class must be 0 or 1");
  }
  for (double m : class_penalty_multiplier) {
    if (!(m >= 0.0)) throw ParameterError("class penalty multipliers must be >= 0");
  }
}

RuleProblem::RuleProblem(const BinarizedDataset& data, const Labels& y, const CgConfig& cfg)
    : data_(&data), cfg_(cfg) {
  cfg.validate();
  if (y.size() != data.n_samples) {
    throw ShapeError("label count " + std::to_string(y.size()) + " does not match " +
                     std::to_string(data.n_samples) + " binarized samples");
  }
  std::size_t ones = 0;
  for (int v : y) {
    if (v != 0 && v != 1) throw ParameterError("labels must be 0 or 1");
    ones += static_cast<std::size_t>(v);
  }
  const std::size_t zeros = y.size() - ones;
  positive_class_ = cfg.positive_class.value_or(ones <= zeros ? 1 : 0);

  positives_ = BitVector(y.size());
  negatives_ = BitVector(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    (y[i] == positive_class_ ? positives_ : negatives_).set(i);
  }
  n_positive_ = positives_.count();

  const double scale = cfg.penalty_scale == PenaltyScale::kPerSample
                           ? static_cast<double>(y.size())
                           : 1.0;
  const double multiplier = cfg.class_penalty_multiplier[static_cast<std::size_t>(positive_class_)];
  rule_cost_ = cfg.lambda0 * scale * multiplier;
  term_cost_ = cfg.lambda1 * scale * multiplier;
}

BitVector RuleProblem::coverage(const Clause& clause) const {
  BitVector cov(data_->n_samples, true);
  for (std::size_t j : clause) cov &= data_->columns[j];
  return cov;
}

bool RuleProblem::conflicts(std::size_t j, std::size_t k) const {
  const Literal& a = data_->catalog.literals[j];
  const Literal& b = data_->catalog.literals[k];
  return a.feature == b.feature && a.op == b.op;
}

double RuleProblem::objective(const std::vector<Clause>& clauses) const {
  BitVector covered(data_->n_samples);
  std::size_t covered_negatives = 0;
  double cost = 0.0;
  for (const auto& clause : clauses) {
    const BitVector cov = coverage(clause);
    covered |= cov;
    covered_negatives += BitVector::count_and(cov, negatives_);
    cost += clause_cost(clause.size());
  }
  const std::size_t uncovered = n_positive_ - BitVector::count_and(covered, positives_);
  return static_cast<double>(uncovered + covered_negatives) + cost;
}

Rule RuleProblem::to_rule(const Clause& clause) const {
  std::vector<Literal> literals;
  literals.reserve(clause.size());
  for (std::size_t j : clause) literals.push_back(data_->catalog.literals[j]);
  return Rule(std::move(literals), positive_class_);
}

RuleSet RuleProblem::to_ruleset(const std::vector<Clause>& clauses) const {
  std::vector<Rule> rules;
  rules.reserve(clauses.size());
  for (const auto& c : clauses) rules.push_back(to_rule(c));
  return RuleSet(std::move(rules), positive_class_);
}

MasterSolution solve_master(const std::vector<Clause>& pool, const RuleProblem& problem) {
  const std::size_t n = problem.data().n_samples;
  std::vector<std::size_t> pos_index;
  problem.positives().for_each_set([&](std::size_t i) { pos_index.push_back(i); });

  // Solved through its dual: max sum(mu) s.t. sum_{i in P} cover_ik mu_i <=
  // zcov_k + cost_k, 0 <= mu <= 1. The row shadow prices are the weights.
  lp::Problem dual;
  dual.n_vars = pos_index.size();
  dual.n_rows = pool.size();
  dual.objective.assign(dual.n_vars, 1.0);
  dual.upper.assign(dual.n_vars, 1.0);
  dual.matrix.assign(dual.n_rows * dual.n_vars, 0.0);
  dual.rhs.resize(dual.n_rows);
  std::vector<BitVector> coverage;
  coverage.reserve(pool.size());
  std::vector<double> column_cost(pool.size());
  for (std::size_t k = 0; k < pool.size(); ++k) {
    coverage.push_back(problem.coverage(pool[k]));
    for (std::size_t p = 0; p < pos_index.size(); ++p) {
      if (coverage[k].test(pos_index[p])) dual.matrix[k * dual.n_vars + p] = 1.0;
    }
    column_cost[k] = static_cast<double>(BitVector::count_and(coverage[k], problem.negatives())) +
                     problem.clause_cost(pool[k].size());
    dual.rhs[k] = column_cost[k];
  }

  const lp::Solution sol = lp::maximize(dual);
  if (sol.status != lp::Status::kOptimal) {
    throw Error("restricted master dual is unbounded; this indicates a bug");
  }

  MasterSolution out;
  out.simplex_iterations = sol.iterations;
  out.weights = sol.duals;
  out.sample_duals.assign(n, 0.0);
  out.xi.assign(n, 0.0);
  for (std::size_t p = 0; p < pos_index.size(); ++p) out.sample_duals[pos_index[p]] = sol.x[p];
  out.dual_objective = sol.objective;

  double primal = 0.0;
  for (std::size_t p = 0; p < pos_index.size(); ++p) {
    double covered = 0.0;
    for (std::size_t k = 0; k < pool.size(); ++k) {
      if (coverage[k].test(pos_index[p])) covered += out.weights[k];
    }
    out.xi[pos_index[p]] = std::max(0.0, 1.0 - covered);
    primal += out.xi[pos_index[p]];
  }
  for (std::size_t k = 0; k < pool.size(); ++k) primal += column_cost[k] * out.weights[k];
  out.primal_objective = primal;
  return out;
}

double reduced_cost(const RuleProblem& problem, const BitVector& coverage, std::size_t terms,
                    std::span<const double> sample_duals, double complexity_dual) {
  const std::size_t z = BitVector::count_and(coverage, problem.negatives());
  double mu = 0.0;
  (coverage & problem.positives()).for_each_set([&](std::size_t i) { mu += sample_duals[i]; });
  return static_cast<double>(z) + complexity_dual * problem.clause_cost(terms) - mu;
}

namespace {

constexpr double kTieTolerance = 1e-12;

class Pricer {
 public:
  Pricer(std::span<const double> duals, double complexity_dual, const RuleProblem& problem)
      : duals_(duals), lambda_(complexity_dual), problem_(problem),
        data_(problem.data()), max_len_(problem.config().max_rule_len),
        budget_(problem.config().pricing_budget), best_rc_(-problem.config().epsilon) {
    levels_.resize(max_len_ + 1);
  }

  PricingOutcome run() {
    PricingOutcome out;
    const std::size_t n_lit = data_.n_literals();
    Node root;
    root.cov = BitVector(data_.n_samples, true);
    root.z = problem_.negatives().count();
    root.mu = 0.0;
    weighted_ = BitVector(data_.n_samples);
    problem_.positives().for_each_set([&](std::size_t i) {
      root.mu += duals_[i];
      if (duals_[i] != 0.0) weighted_.set(i);
    });
    if (n_lit == 0 || !(root.mu > 0.0)) return out;

    warm_start();
    clause_.clear();
    expand(0, root);
    out.exhaustive = !exhausted_;
    out.evaluations = evaluations_;
    if (found_) out.best = PricedClause{best_, best_rc_};
    return out;
  }

 private:
  struct Node {
    std::size_t literal = 0;
    BitVector cov;
    std::size_t z = 0;
    double mu = 0.0;
  };

  // (covered negatives, covered dual mass), summed in sample order.
  std::pair<std::size_t, double> tally(const BitVector& cov) const {
    const std::size_t z = BitVector::count_and(cov, problem_.negatives());
    double mu = 0.0;
    const auto& cw = cov.words();
    const auto& pw = weighted_.words();
    for (std::size_t w = 0; w < cw.size(); ++w) {
      std::uint64_t bits = cw[w] & pw[w];
      while (bits != 0) {
        mu += duals_[w * 64 + static_cast<std::size_t>(std::countr_zero(bits))];
        bits &= bits - 1;
      }
    }
    return {z, mu};
  }

  double rc_of(std::size_t z, double mu, std::size_t terms) const {
    return static_cast<double>(z) + lambda_ * problem_.clause_cost(terms) - mu;
  }

  bool pruned(double bound) const {
    return bound > best_rc_ + 1e-9 * std::max(1.0, std::fabs(best_rc_));
  }

  void consider(const Clause& clause, std::size_t z, double mu) {
    const double rc = rc_of(z, mu, clause.size());
    bool better;
    if (!found_) {
      better = rc < best_rc_;
    } else {
      // summation order differs between paths, so ties are within kTieTolerance
      better = rc < best_rc_ - kTieTolerance ||
               (rc <= best_rc_ + kTieTolerance &&
                (clause.size() < best_.size() ||
                 (clause.size() == best_.size() && clause < best_)));
    }
    if (better) {
      best_rc_ = rc;
      best_ = clause;
      found_ = true;
    }
  }

  bool clashes(const Clause& clause, std::size_t j) const {
    for (std::size_t k : clause) {
      if (k == j || problem_.conflicts(j, k)) return true;
    }
    return false;
  }

  // Small beam over extensions. Only seeds the incumbent so the exact search
  // prunes early; it cannot change the exact minimizer.
  void warm_start() {
    constexpr std::size_t kWidth = 8;
    const std::size_t n_lit = data_.n_literals();
    struct Item {
      Clause clause;
      BitVector cov;
      double rc;
    };
    auto by_rc = [](const Item& a, const Item& b) {
      if (a.rc != b.rc) return a.rc < b.rc;
      return a.clause < b.clause;
    };
    std::vector<Item> beam;
    for (std::size_t j = 0; j < n_lit; ++j) {
      const auto [z, mu] = tally(data_.columns[j]);
      if (!(mu > 0.0)) continue;
      beam.push_back({{j}, data_.columns[j], rc_of(z, mu, 1)});
    }
    auto trim = [&](std::vector<Item>& items) {
      std::sort(items.begin(), items.end(), by_rc);
      if (items.size() > kWidth) items.resize(kWidth);
    };
    trim(beam);
    for (std::size_t depth = 2; depth <= max_len_ && !beam.empty(); ++depth) {
      std::vector<Item> next;
      for (const auto& item : beam) {
        for (std::size_t j = 0; j < n_lit; ++j) {
          if (clashes(item.clause, j)) continue;
          BitVector cov = item.cov & data_.columns[j];
          if (cov == item.cov) continue;
          const auto [z, mu] = tally(cov);
          if (!(mu > 0.0)) continue;
          Clause c = item.clause;
          c.insert(std::upper_bound(c.begin(), c.end(), j), j);
          next.push_back({std::move(c), std::move(cov), rc_of(z, mu, depth)});
        }
      }
      trim(next);
      next.erase(std::unique(next.begin(), next.end(),
                             [](const Item& a, const Item& b) { return a.clause == b.clause; }),
                 next.end());
      for (const auto& item : next) {
        const auto [z, mu] = tally(item.cov);
        consider(item.clause, z, mu);
      }
      beam = std::move(next);
    }
  }

  // Children of `node` (clause_ holds its literals, `depth` of them): every
  // later literal that keeps some dual mass and actually shrinks coverage.
  void expand(std::size_t depth, const Node& node) {
    const std::size_t remaining = max_len_ - depth;
    if (remaining == 0) return;
    const std::size_t n_lit = data_.n_literals();
    auto& kids = levels_[depth];
    std::size_t n_kids = 0;
    const std::size_t first = clause_.empty() ? 0 : clause_.back() + 1;
    for (std::size_t j = first; j < n_lit; ++j) {
      if (clashes(clause_, j)) continue;
      if (budget_ != 0 && evaluations_ >= budget_) {
        exhausted_ = true;
        break;
      }
      ++evaluations_;
      if (kids.size() <= n_kids) kids.emplace_back();
      Node& kid = kids[n_kids];
      kid.cov = node.cov;
      kid.cov &= data_.columns[j];
      // A literal that removes nothing is dominated by the shorter clause.
      if (kid.cov == node.cov) continue;
      const auto [z, mu] = tally(kid.cov);
      if (!(mu > 0.0)) continue;
      kid.literal = j;
      kid.z = z;
      kid.mu = mu;
      ++n_kids;
    }
    for (std::size_t c = 0; c < n_kids; ++c) {
      clause_.push_back(kids[c].literal);
      consider(clause_, kids[c].z, kids[c].mu);
      clause_.pop_back();
    }
    if (remaining == 1 || n_kids < 2) return;

    // Bound for the subtree below kid c. Its clauses add at least one later
    // sibling literal, so covered mass is at most min(mu_c, max later mu),
    // and at most remaining-1 further literals each remove no more negatives
    // than they remove from this node.
    const std::size_t extra = remaining - 1;
    std::vector<double> bound(n_kids, 0.0);
    std::vector<std::size_t> top;  // largest exclusions among later siblings
    double later_mu = 0.0;
    for (std::size_t c = n_kids; c-- > 0;) {
      const Node& kid = kids[c];
      std::size_t removable = 0;
      for (std::size_t t : top) removable += t;
      const double negatives = kid.z > removable ? static_cast<double>(kid.z - removable) : 0.0;
      const double mass = std::min(kid.mu, later_mu);
      bound[c] = c + 1 == n_kids
                     ? std::numeric_limits<double>::infinity()
                     : lambda_ * problem_.clause_cost(depth + 2) + negatives - mass;
      const std::size_t excluded = node.z - kid.z;
      top.insert(std::upper_bound(top.begin(), top.end(), excluded, std::greater<>()), excluded);
      if (top.size() > extra) top.pop_back();
      later_mu = std::max(later_mu, kid.mu);
    }

    for (std::size_t c = 0; c < n_kids && !exhausted_; ++c) {
      if (pruned(bound[c])) continue;
      const Node& kid = kids[c];
      clause_.push_back(kid.literal);
      expand(depth + 1, kid);
      clause_.pop_back();
    }
  }

  std::span<const double> duals_;
  double lambda_;
  const RuleProblem& problem_;
  const BinarizedDataset& data_;
  std::size_t max_len_;
  std::vector<std::vector<Node>> levels_;
  BitVector weighted_;  // positives with nonzero dual
  std::size_t budget_;
  std::size_t evaluations_ = 0;
  bool exhausted_ = false;
  Clause clause_;
  Clause best_;
  double best_rc_;
  bool found_ = false;
};

// Ordering of candidate selections with equal objective.
bool preferred(const std::vector<std::size_t>& a, std::size_t a_terms,
               const std::vector<std::size_t>& b, std::size_t b_terms) {
  if (a.size() != b.size()) return a.size() < b.size();
  if (a_terms != b_terms) return a_terms < b_terms;
  return a < b;
}

// Best {0,1} weighting of the pool. Pool is sorted canonically.
std::vector<std::size_t> select_clauses(const std::vector<Clause>& pool,
                                        const RuleProblem& problem) {
  const std::size_t K = pool.size();
  const std::size_t n = problem.data().n_samples;
  std::vector<BitVector> pos_cov;
  std::vector<std::size_t> zcov(K);
  std::vector<double> cost(K);
  for (std::size_t k = 0; k < K; ++k) {
    const BitVector cov = problem.coverage(pool[k]);
    pos_cov.push_back(cov & problem.positives());
    zcov[k] = BitVector::count_and(cov, problem.negatives());
    cost[k] = problem.clause_cost(pool[k].size());
  }
  const std::size_t n_pos = problem.n_positive();

  std::vector<std::size_t> best_set;
  double best_obj = static_cast<double>(n_pos);
  std::size_t best_terms = 0;
  auto offer = [&](const std::vector<std::size_t>& set, double obj) {
    std::size_t terms = 0;
    for (std::size_t k : set) terms += pool[k].size();
    if (obj < best_obj || (obj == best_obj && preferred(set, terms, best_set, best_terms))) {
      best_obj = obj;
      best_set = set;
      best_terms = terms;
    }
  };

  if (K <= problem.config().exhaustive_selection_limit) {
    std::vector<BitVector> suffix(K + 1, BitVector(n));
    for (std::size_t k = K; k-- > 0;) suffix[k] = suffix[k + 1] | pos_cov[k];
    std::vector<std::size_t> chosen;
    std::function<void(std::size_t, const BitVector&, std::size_t, double)> dfs =
        [&](std::size_t from, const BitVector& covered, std::size_t zsum, double costsum) {
          for (std::size_t k = from; k < K; ++k) {
            const BitVector next = covered | pos_cov[k];
            const std::size_t z = zsum + zcov[k];
            const double c = costsum + cost[k];
            const std::size_t uncovered = n_pos - next.count();
            chosen.push_back(k);
            offer(chosen, static_cast<double>(uncovered + z) + c);
            // Later additions can at best cover every remaining positive.
            const std::size_t floor_uncovered = n_pos - (next | suffix[k + 1]).count();
            const double bound = static_cast<double>(floor_uncovered + z) + c;
            if (k + 1 < K && bound <= best_obj + 1e-9) dfs(k + 1, next, z, c);
            chosen.pop_back();
          }
        };
    dfs(0, BitVector(n), 0, 0.0);
    return best_set;
  }

  // Greedy objective descent.
  std::vector<std::size_t> chosen;
  std::vector<bool> used(K, false);
  BitVector covered(n);
  std::size_t zsum = 0;
  double costsum = 0.0;
  double current = static_cast<double>(n_pos);
  for (;;) {
    std::size_t pick = K;
    double pick_obj = current;
    for (std::size_t k = 0; k < K; ++k) {
      if (used[k]) continue;
      const std::size_t uncovered = n_pos - (covered | pos_cov[k]).count();
      const double obj = static_cast<double>(uncovered + zsum + zcov[k]) + (costsum + cost[k]);
      if (obj < pick_obj) {
        pick_obj = obj;
        pick = k;
      }
    }
    if (pick == K) break;
    used[pick] = true;
    chosen.push_back(pick);
    covered |= pos_cov[pick];
    zsum += zcov[pick];
    costsum += cost[pick];
    current = pick_obj;
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

}  // namespace

PricingOutcome price_search(std::span<const double> sample_duals, double complexity_dual,
                            const RuleProblem& problem) {
  if (sample_duals.size() != problem.data().n_samples) {
    throw ShapeError("dual vector length does not match sample count");
  }
  return Pricer(sample_duals, complexity_dual, problem).run();
}

std::optional<PricedClause> price(std::span<const double> sample_duals, double complexity_dual,
                                  const RuleProblem& problem) {
  return price_search(sample_duals, complexity_dual, problem).best;
}

CgFitResult fit(const BinarizedDataset& data, const Labels& y, const CgConfig& cfg,
                const CgObserver& observer) {
  const RuleProblem problem(data, y, cfg);
  CgFitResult result;

  if (problem.degenerate()) {
    // Every sample shares one class: predict it unconditionally.
    const int only = y.empty() ? problem.positive_class() : y.front();
    result.ruleset = RuleSet({}, 1 - only);
    result.converged = true;
    return result;
  }

  // Seed with the single literal of lowest training error.
  const std::size_t n_pos = problem.n_positive();
  std::size_t seed_literal = data.n_literals();
  std::size_t seed_error = 0;
  for (std::size_t j = 0; j < data.n_literals(); ++j) {
    const std::size_t tp = BitVector::count_and(data.columns[j], problem.positives());
    if (tp == 0) continue;
    const std::size_t err = (n_pos - tp) + BitVector::count_and(data.columns[j], problem.negatives());
    if (seed_literal == data.n_literals() || err < seed_error) {
      seed_literal = j;
      seed_error = err;
    }
  }
  std::vector<Clause>& pool = result.pool;
  if (seed_literal < data.n_literals()) pool.push_back({seed_literal});

  MasterSolution master;
  for (std::size_t it = 0; it < cfg.max_iterations; ++it) {
    master = solve_master(pool, problem);
    PricingOutcome outcome = price_search(master.sample_duals, master.complexity_dual, problem);
    std::optional<PricedClause>& priced = outcome.best;
    ++result.iterations;
    if (!outcome.exhaustive) ++result.truncated_pricings;
    if (observer) observer({it, &pool, &master, &priced});
    if (!priced || std::find(pool.begin(), pool.end(), priced->clause) != pool.end()) {
      // Without an exhaustive search, optimality of the master is not proven.
      result.converged = outcome.exhaustive;
      break;
    }
    pool.push_back(std::move(priced->clause));
  }
  if (result.iterations == cfg.max_iterations && !result.converged) {
    result.hit_iteration_limit = true;
    master = solve_master(pool, problem);
  }
  result.lp_objective = master.primal_objective;
  result.complexity_dual = master.complexity_dual;

  std::vector<Clause> sorted_pool = pool;
  std::sort(sorted_pool.begin(), sorted_pool.end());
  for (std::size_t k : select_clauses(sorted_pool, problem)) {
    result.selected.push_back(sorted_pool[k]);
  }
  result.objective = problem.objective(result.selected);
  result.ruleset = problem.to_ruleset(result.selected);
  return result;
}

ExactFitResult exact_fit_bruteforce(const BinarizedDataset& data, const Labels& y,
                                    const CgConfig& cfg, std::size_t max_clauses) {
  if (data.n_literals() > kExactMaxLiterals || max_clauses > kExactMaxClauses) {
    throw ParameterError("exact_fit_bruteforce refuses instances beyond 12 literals / 3 clauses");
  }
  const RuleProblem problem(data, y, cfg);
  const int pos = problem.positive_class();
  ExactFitResult result;
  if (problem.degenerate()) {
    const int only = y.empty() ? pos : y.front();
    result.ruleset = RuleSet({}, 1 - only);
    return result;
  }

  // Per-sample evaluation, independent of the column bitsets' AND path.
  const std::size_t n = data.n_samples;
  const std::size_t L = data.n_literals();
  struct Candidate {
    Clause clause;
    std::vector<bool> covers;
    std::size_t negatives = 0;
  };
  std::map<std::vector<bool>, Candidate> by_coverage;
  for (std::uint32_t mask = 1; mask < (1U << L); ++mask) {
    if (static_cast<std::size_t>(std::popcount(mask)) > cfg.max_rule_len) continue;
    Clause clause;
    for (std::size_t j = 0; j < L; ++j) {
      if (mask & (1U << j)) clause.push_back(j);
    }
    std::vector<bool> covers(n, true);
    bool any_positive = false;
    std::size_t negatives = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j : clause) {
        if (!data.bit(i, j)) {
          covers[i] = false;
          break;
        }
      }
      if (covers[i]) {
        if (y[i] == pos) {
          any_positive = true;
        } else {
          ++negatives;
        }
      }
    }
    // Clauses covering no positive only add cost.
    if (!any_positive) continue;
    auto it = by_coverage.find(covers);
    if (it == by_coverage.end()) {
      by_coverage.emplace(covers, Candidate{clause, covers, negatives});
    } else if (clause.size() < it->second.clause.size() ||
               (clause.size() == it->second.clause.size() && clause < it->second.clause)) {
      it->second.clause = clause;
    }
  }
  std::vector<Candidate> candidates;
  for (auto& [cov, cand] : by_coverage) candidates.push_back(std::move(cand));
  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate& a, const Candidate& b) { return a.clause < b.clause; });

  std::size_t n_pos = 0;
  for (int v : y) n_pos += v == pos ? 1 : 0;

  auto evaluate = [&](const std::vector<std::size_t>& set) {
    std::size_t covered_pos = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (y[i] != pos) continue;
      for (std::size_t k : set) {
        if (candidates[k].covers[i]) {
          ++covered_pos;
          break;
        }
      }
    }
    std::size_t negatives = 0;
    double cost = 0.0;
    for (std::size_t k : set) {
      negatives += candidates[k].negatives;
      cost += problem.rule_cost() + problem.term_cost() * candidates[k].clause.size();
    }
    return static_cast<double>(n_pos - covered_pos + negatives) + cost;
  };

  std::vector<std::size_t> best;
  double best_obj = static_cast<double>(n_pos);
  std::size_t best_terms = 0;
  std::vector<std::size_t> set;
  std::function<void(std::size_t)> enumerate = [&](std::size_t from) {
    if (set.size() == max_clauses) return;
    for (std::size_t k = from; k < candidates.size(); ++k) {
      set.push_back(k);
      const double obj = evaluate(set);
      std::size_t terms = 0;
      for (std::size_t s : set) terms += candidates[s].clause.size();
      if (obj < best_obj || (obj == best_obj && preferred(set, terms, best, best_terms))) {
        best_obj = obj;
        best = set;
        best_terms = terms;
      }
      enumerate(k + 1);
      set.pop_back();
    }
  };
  enumerate(0);

  for (std::size_t k : best) result.selected.push_back(candidates[k].clause);
  result.objective = best_obj;
  result.ruleset = problem.to_ruleset(result.selected);
  return result;
}

}  // namespace cgx
