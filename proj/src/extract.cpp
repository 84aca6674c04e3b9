#include "cgx/extract.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <string>

#include "cgx/errors.hpp"
#include "cgx/metrics.hpp"

namespace cgx {

void ExtractionConfig::validate() const {
  cg.validate();
  if (bins < 1) throw ParameterError("bins must be >= 1");
  if (k < 1) throw ParameterError("beam width k must be >= 1");
  if (substitution_max_len < 1) throw ParameterError("substitution_max_len must be >= 1");
}

namespace {

std::vector<FeatureKind> kinds_or_continuous(std::span<const FeatureKind> kinds,
                                             std::size_t width) {
  if (kinds.empty()) return std::vector<FeatureKind>(width, FeatureKind::kContinuous);
  if (kinds.size() != width) throw ShapeError("feature kind count does not match data width");
  return {kinds.begin(), kinds.end()};
}

struct Scored {
  Clause clause;
  std::size_t mismatches = 0;
};

bool better_scored(const Scored& a, const Scored& b) {
  if (a.mismatches != b.mismatches) return a.mismatches < b.mismatches;
  if (a.clause.size() != b.clause.size()) return a.clause.size() < b.clause.size();
  return a.clause < b.clause;
}

// x <= t and x > s with t <= s can never hold together.
bool satisfiable(const Rule& r) {
  const auto& lits = r.literals();
  for (std::size_t a = 0; a < lits.size(); ++a) {
    if (lits[a].op != Op::kLessEqual) continue;
    for (std::size_t b = 0; b < lits.size(); ++b) {
      if (lits[b].feature == lits[a].feature && lits[b].op == Op::kGreater &&
          lits[a].threshold <= lits[b].threshold) {
        return false;
      }
    }
  }
  return true;
}

// Every literal of `general` is implied by a literal of `specific`, so
// `specific` fires only where `general` does.
bool subsumes(const Rule& general, const Rule& specific) {
  for (const auto& g : general.literals()) {
    bool implied = false;
    for (const auto& s : specific.literals()) {
      if (s.feature != g.feature || s.op != g.op) continue;
      switch (g.op) {
        case Op::kLessEqual:
          implied = s.threshold <= g.threshold;
          break;
        case Op::kGreater:
          implied = s.threshold >= g.threshold;
          break;
        case Op::kEqual:
          implied = s == g;
          break;
      }
      if (implied) break;
    }
    if (!implied) return false;
  }
  return true;
}

RuleSet simplify(std::vector<Rule> rules, int positive_class) {
  const RuleSet canonical(std::move(rules), positive_class);
  const auto& sorted = canonical.rules();
  std::vector<Rule> kept;
  for (std::size_t b = 0; b < sorted.size(); ++b) {
    if (!satisfiable(sorted[b])) continue;
    bool absorbed = false;
    for (std::size_t a = 0; a < sorted.size() && !absorbed; ++a) {
      if (a == b || !satisfiable(sorted[a])) continue;
      // Mutual subsumption cannot happen between distinct canonical rules.
      absorbed = subsumes(sorted[a], sorted[b]);
    }
    if (!absorbed) kept.push_back(sorted[b]);
  }
  return RuleSet(std::move(kept), positive_class);
}

std::vector<Literal> negations(const Literal& lit, const LiteralCatalog& catalog) {
  switch (lit.op) {
    case Op::kLessEqual:
      return {{lit.feature, Op::kGreater, lit.threshold}};
    case Op::kGreater:
      return {{lit.feature, Op::kLessEqual, lit.threshold}};
    case Op::kEqual:
      break;
  }
  std::vector<Literal> out;
  for (const auto& other : catalog.literals) {
    if (other.feature == lit.feature && other.op == Op::kEqual && !(other == lit)) {
      out.push_back(other);
    }
  }
  return out;
}

}  // namespace

ExtractionResult cgx_ped(const MlpModel& model, const Matrix& X, const ExtractionConfig& cfg,
                         std::span<const FeatureKind> kinds) {
  cfg.validate();
  const Labels y_dnn = predict_labels(model, X);
  const auto feature_kinds = kinds_or_continuous(kinds, X.cols());
  const BinarizedDataset X_bin = binarize(X, feature_kinds, cfg.bins);
  const CgFitResult fitted = fit(X_bin, y_dnn, cfg.cg);

  ExtractionResult result;
  result.ruleset = canonicalize(fitted.ruleset);
  result.hit_iteration_limit = fitted.hit_iteration_limit;
  result.ped_fidelity = fidelity(y_dnn, result.ruleset.predict(X));
  result.final_fidelity = result.ped_fidelity;
  result.catalog = X_bin.catalog;
  return result;
}

SubstitutionResult best_conjunction(const BitVector& target, const BinarizedDataset& inputs,
                                    const ExtractionConfig& cfg) {
  const std::size_t n = inputs.n_samples;
  const std::size_t n_lit = inputs.n_literals();
  if (target.size() != n) throw ShapeError("substitution target length mismatch");
  if (n == 0) throw SubstitutionError("no samples to substitute against");

  if (target.none() || target.count() == n) {
    // A constant target is matched exactly by a literal that is constant on
    // every finite input.
    const Op op = target.none() ? Op::kLessEqual : Op::kGreater;
    SubstitutionResult out{Rule({{0, op, std::numeric_limits<double>::lowest()}}, 1), 0.0, 0};
    return out;
  }
  if (n_lit == 0) throw SubstitutionError("input catalog has no literals to build candidates from");

  auto mismatches = [&](const BitVector& cov) {
    std::size_t m = 0;
    const auto& cw = cov.words();
    const auto& tw = target.words();
    for (std::size_t w = 0; w < cw.size(); ++w) m += static_cast<std::size_t>(std::popcount(cw[w] ^ tw[w]));
    return m;
  };
  auto conflicts = [&](std::size_t a, std::size_t b) {
    const Literal& la = inputs.catalog.literals[a];
    const Literal& lb = inputs.catalog.literals[b];
    return la.feature == lb.feature && la.op == lb.op;
  };

  Scored best;
  bool have_best = false;
  auto offer = [&](const Scored& s) {
    if (!have_best || better_scored(s, best)) {
      best = s;
      have_best = true;
    }
  };

  // All single literals, then beam extension one literal at a time.
  std::vector<Scored> level;
  std::vector<BitVector> level_cov;
  for (std::size_t j = 0; j < n_lit; ++j) {
    if (inputs.columns[j].none()) continue;
    Scored s{{j}, mismatches(inputs.columns[j])};
    offer(s);
    level.push_back(std::move(s));
  }
  auto prune_to_beam = [&](std::vector<Scored>& items) {
    std::sort(items.begin(), items.end(), better_scored);
    if (items.size() > cfg.k) items.resize(cfg.k);
  };
  prune_to_beam(level);

  for (std::size_t depth = 2; depth <= cfg.substitution_max_len && !level.empty(); ++depth) {
    std::set<Clause> seen;
    std::vector<Scored> next;
    for (const auto& parent : level) {
      BitVector parent_cov(n, true);
      for (std::size_t j : parent.clause) parent_cov &= inputs.columns[j];
      for (std::size_t j = 0; j < n_lit; ++j) {
        bool skip = false;
        for (std::size_t p : parent.clause) {
          if (p == j || conflicts(p, j)) {
            skip = true;
            break;
          }
        }
        if (skip) continue;
        Clause clause = parent.clause;
        clause.insert(std::upper_bound(clause.begin(), clause.end(), j), j);
        if (!seen.insert(clause).second) continue;
        BitVector cov = parent_cov & inputs.columns[j];
        // Dominated by the parent: same coverage, one more literal.
        if (cov == parent_cov) continue;
        // A conjunction that never fires cannot stand in for a rule.
        if (cov.none()) continue;
        Scored s{std::move(clause), mismatches(cov)};
        offer(s);
        next.push_back(std::move(s));
      }
    }
    prune_to_beam(next);
    level = std::move(next);
  }

  if (!have_best) throw SubstitutionError("no input literal fires on any sample");
  std::vector<Literal> literals;
  for (std::size_t j : best.clause) literals.push_back(inputs.catalog.literals[j]);
  return {Rule(std::move(literals), 1),
          static_cast<double>(best.mismatches) / static_cast<double>(n), best.mismatches};
}

SubstitutionResult substitute(const Rule& hidden_rule, const Matrix& layer_activations,
                              const BinarizedDataset& inputs, const ExtractionConfig& cfg) {
  if (layer_activations.rows() != inputs.n_samples) {
    throw ShapeError("activation trace and input data have different sample counts");
  }
  for (const auto& lit : hidden_rule.literals()) {
    if (lit.feature >= layer_activations.cols()) {
      throw ShapeError("hidden rule references unit " + std::to_string(lit.feature) +
                       " beyond the layer width " + std::to_string(layer_activations.cols()));
    }
  }
  BitVector target(inputs.n_samples);
  for (std::size_t i = 0; i < inputs.n_samples; ++i) {
    if (hidden_rule.fires(layer_activations.row(i))) target.set(i);
  }
  return best_conjunction(target, inputs, cfg);
}

RuleSet merge_rule(const RuleSet& rs, const Rule& rule, int cls, const LiteralCatalog& catalog) {
  const int pos = rs.positive_class();
  std::vector<Rule> rules;
  if (cls == pos) {
    rules = rs.rules();
    rules.emplace_back(rule.literals(), pos);
    return simplify(std::move(rules), pos);
  }
  // rs AND NOT rule, distributed into DNF.
  for (const auto& r : rs.rules()) {
    for (const auto& lit : rule.literals()) {
      for (const auto& neg : negations(lit, catalog)) {
        std::vector<Literal> literals = r.literals();
        literals.push_back(neg);
        try {
          rules.emplace_back(std::move(literals), pos);
        } catch (const ParameterError&) {
          // Two different categories on one feature: never fires.
        }
      }
    }
  }
  return simplify(std::move(rules), pos);
}

namespace {

double penalized_objective(const RuleSet& rs, double fid, const CgConfig& cg, std::size_t n) {
  const Complexity c = rs.complexity();
  double cost = cg.lambda0 * static_cast<double>(c.n_rules) + cg.lambda1 * static_cast<double>(c.n_terms);
  if (cg.penalty_scale == PenaltyScale::kAbsolute) cost /= static_cast<double>(n);
  return (1.0 - fid) + cost;
}

}  // namespace

ExtractionResult cgx_dec(const MlpModel& model, const Matrix& X, const ExtractionConfig& cfg,
                         std::span<const FeatureKind> kinds) {
  ExtractionResult result = cgx_ped(model, X, cfg, kinds);
  const Labels y_dnn = predict_labels(model, X);
  const auto feature_kinds = kinds_or_continuous(kinds, X.cols());
  const BinarizedDataset X_bin = binarize(X, feature_kinds, cfg.bins);
  const ActivationTrace trace = hidden_activations(model, X);

  RuleSet current = result.ruleset;
  double current_fid = result.ped_fidelity;

  CgConfig error_cfg = cfg.cg;
  error_cfg.positive_class = 1;

  for (std::size_t layer = 1; layer <= trace.size(); ++layer) {
    LayerLog log;
    log.layer = layer;
    // Residual error of the current rule set, not the pedagogical one.
    const Labels predicted = current.predict(X);
    Labels error(predicted.size());
    for (std::size_t i = 0; i < predicted.size(); ++i) {
      error[i] = predicted[i] != y_dnn[i] ? 1 : 0;
      log.n_errors += static_cast<std::size_t>(error[i]);
    }
    if (log.n_errors == 0) {
      log.skipped = true;
      result.per_layer_log.push_back(log);
      continue;
    }

    const Matrix& activations = trace[layer - 1];
    const std::vector<FeatureKind> unit_kinds(activations.cols(), FeatureKind::kContinuous);
    const BinarizedDataset H_bin = binarize(activations, unit_kinds, cfg.bins);
    const CgFitResult error_fit = fit(H_bin, error, error_cfg);
    result.hit_iteration_limit = result.hit_iteration_limit || error_fit.hit_iteration_limit;
    // An all-error layer yields an empty set with default class 1: nothing to add.
    if (error_fit.ruleset.positive_class() != 1) {
      result.per_layer_log.push_back(log);
      continue;
    }
    log.n_error_rules = error_fit.ruleset.rules().size();

    for (const auto& hidden_rule : error_fit.ruleset.rules()) {
      const SubstitutionResult sub = substitute(hidden_rule, activations, X_bin, cfg);
      ++log.n_substituted;

      const int pos = current.positive_class();
      RuleSet with_pos = merge_rule(current, sub.rule, pos, X_bin.catalog);
      RuleSet with_neg = merge_rule(current, sub.rule, 1 - pos, X_bin.catalog);
      const double fid_pos = fidelity(y_dnn, with_pos.predict(X));
      const double fid_neg = fidelity(y_dnn, with_neg.predict(X));
      const bool use_neg = fid_neg > fid_pos;
      const double candidate_fid = use_neg ? fid_neg : fid_pos;

      const RuleSet& candidate = use_neg ? with_neg : with_pos;
      bool admit = candidate_fid > current_fid;
      if (admit && cfg.gate == AdmissionGate::kPenalized) {
        admit = penalized_objective(candidate, candidate_fid, cfg.cg, X.rows()) <
                penalized_objective(current, current_fid, cfg.cg, X.rows());
      }
      if (admit) {
        Admission adm{layer,
                      hidden_rule,
                      sub.rule,
                      use_neg ? 1 - pos : pos,
                      sub.error,
                      current_fid,
                      candidate_fid};
        current = use_neg ? std::move(with_neg) : std::move(with_pos);
        current_fid = candidate_fid;
        result.admissions.push_back(std::move(adm));
        ++log.n_admitted;
      }
    }
    result.per_layer_log.push_back(log);
  }

  result.ruleset = canonicalize(current);
  result.final_fidelity = current_fid;
  return result;
}

}  // namespace cgx
