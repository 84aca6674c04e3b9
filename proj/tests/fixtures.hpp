#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "cgx/cg.hpp"
#include "cgx/data.hpp"
#include "cgx/mlp.hpp"
#include "cgx/random.hpp"
#include "oracles.hpp"

namespace fixture {

struct BinaryInstance {
  cgx::Matrix X;
  cgx::Labels y;
  cgx::BinarizedDataset data;
};

// Random 0/1 features with labels of both classes, binarized at 0.5.
inline BinaryInstance random_binary(std::uint64_t seed, std::size_t max_samples = 12,
                                    std::size_t max_features = 4) {
  cgx::Rng rng(seed);
  BinaryInstance inst;
  while (true) {
    const std::size_t n = 4 + cgx::uniform_index(rng, max_samples - 3);
    const std::size_t f = 1 + cgx::uniform_index(rng, max_features);
    inst.X = cgx::Matrix(n, f);
    inst.y.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < f; ++j) inst.X(i, j) = static_cast<double>(cgx::uniform_index(rng, 2));
      inst.y[i] = static_cast<int>(cgx::uniform_index(rng, 2));
    }
    std::size_t ones = 0;
    for (int v : inst.y) ones += static_cast<std::size_t>(v);
    if (ones == 0 || ones == n) continue;
    const std::vector<cgx::FeatureKind> kinds(f, cgx::FeatureKind::kContinuous);
    inst.data = cgx::binarize(inst.X, kinds, 1);
    if (inst.data.n_literals() == 0) continue;
    return inst;
  }
}

struct PricingAnswer {
  cgx::Clause clause;
  double reduced_cost = 0.0;
};

// Enumerates every clause up to max_rule_len. Ties: lower reduced cost, then
// fewer literals, then lexicographically smaller indices.
inline std::optional<PricingAnswer> brute_force_price(const cgx::RuleProblem& problem,
                                                      const std::vector<double>& mu,
                                                      double complexity_dual) {
  const auto& data = problem.data();
  const auto& cfg = problem.config();
  std::optional<PricingAnswer> best;
  for (const auto& clause : oracle::subsets(data.n_literals(), cfg.max_rule_len)) {
    double z = 0.0;
    double covered_mu = 0.0;
    for (std::size_t i = 0; i < data.n_samples; ++i) {
      bool fires = true;
      for (std::size_t j : clause) fires = fires && data.bit(i, j);
      if (!fires) continue;
      if (problem.positives().test(i)) {
        covered_mu += mu[i];
      } else {
        z += 1.0;
      }
    }
    const double rc =
        z + complexity_dual * problem.clause_cost(clause.size()) - covered_mu;
    if (!best || rc < best->reduced_cost - 1e-12) best = PricingAnswer{clause, rc};
  }
  if (best && best->reduced_cost < -cfg.epsilon) return best;
  return std::nullopt;
}

// Integral DNF objective computed from scratch.
inline double dnf_objective(const cgx::BinarizedDataset& data, const cgx::BitVector& positives,
                            const std::vector<cgx::Clause>& clauses, double rule_cost,
                            double term_cost) {
  double obj = 0.0;
  for (std::size_t i = 0; i < data.n_samples; ++i) {
    if (!positives.test(i)) continue;
    bool any = false;
    for (const auto& c : clauses) {
      bool fires = true;
      for (std::size_t j : c) fires = fires && data.bit(i, j);
      any = any || fires;
    }
    obj += any ? 0.0 : 1.0;
  }
  for (const auto& c : clauses) {
    for (std::size_t i = 0; i < data.n_samples; ++i) {
      if (positives.test(i)) continue;
      bool fires = true;
      for (std::size_t j : c) fires = fires && data.bit(i, j);
      obj += fires ? 1.0 : 0.0;
    }
    obj += rule_cost + term_cost * static_cast<double>(c.size());
  }
  return obj;
}

// Best DNF of at most max_clauses distinct clauses, by enumeration.
inline double brute_force_dnf(const cgx::RuleProblem& problem, std::size_t max_clauses) {
  const auto& data = problem.data();
  const auto clauses = oracle::subsets(data.n_literals(), problem.config().max_rule_len);
  double best = dnf_objective(data, problem.positives(), {}, 0, 0);
  for (const auto& pick : oracle::subsets(clauses.size(), max_clauses)) {
    std::vector<cgx::Clause> dnf;
    for (std::size_t k : pick) dnf.push_back(clauses[k]);
    best = std::min(best, dnf_objective(data, problem.positives(), dnf, problem.rule_cost(),
                                        problem.term_cost()));
  }
  return best;
}

// Model with identity standardization and the given layers.
inline cgx::MlpModel hand_model(std::size_t input_dim, std::vector<cgx::DenseLayer> layers) {
  cgx::MlpModel m;
  m.input_mean.assign(input_dim, 0.0);
  m.input_std.assign(input_dim, 1.0);
  m.layers = std::move(layers);
  m.validate();
  return m;
}

inline cgx::DenseLayer dense(std::size_t in, std::size_t out, std::vector<double> w,
                             std::vector<double> b, cgx::Activation act) {
  return {in, out, std::move(w), std::move(b), act};
}

}  // namespace fixture
