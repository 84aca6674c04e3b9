#include <algorithm>
#include <cmath>

#include "cgx/cg.hpp"
#include "cgx/data.hpp"
#include "cgx/errors.hpp"
#include "doctest.h"
#include "fixtures.hpp"

using namespace cgx;

TEST_CASE("config validation") {
  CgConfig cfg;
  cfg.lambda0 = -1.0;
  CHECK_THROWS_AS(cfg.validate(), ParameterError);
  cfg = {};
  cfg.max_rule_len = 0;
  CHECK_THROWS_AS(cfg.validate(), ParameterError);
  cfg = {};
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("pricing with zero duals finds nothing") {
  const auto inst = fixture::random_binary(3);
  CgConfig cfg;
  cfg.penalty_scale = PenaltyScale::kAbsolute;
  const RuleProblem problem(inst.data, inst.y, cfg);
  const std::vector<double> mu(inst.y.size(), 0.0);
  CHECK_FALSE(price(mu, 1.0, problem).has_value());
}

TEST_CASE("single positive with dual 2") {
  Matrix X(3, 1);
  X(0, 0) = 1.0;
  X(1, 0) = 0.0;
  X(2, 0) = 0.0;
  const Labels y = {1, 0, 0};
  LiteralCatalog catalog;
  catalog.n_features = 1;
  catalog.literals.push_back({0, Op::kGreater, 0.5});
  const BinarizedDataset data = apply_catalog(catalog, X);
  CgConfig cfg;
  cfg.lambda0 = 0.0;
  cfg.lambda1 = 0.0;
  cfg.positive_class = 1;
  const RuleProblem problem(data, y, cfg);
  const std::vector<double> mu = {2.0, 0.0, 0.0};
  const auto priced = price(mu, 1.0, problem);
  REQUIRE(priced.has_value());
  CHECK(priced->clause == Clause{0});
  CHECK(priced->reduced_cost == doctest::Approx(-2.0));
}

TEST_CASE("pricing equals clause enumeration") {
  Rng rng(21);
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto inst = fixture::random_binary(1000 + seed, 8, 4);
    CgConfig cfg;
    cfg.penalty_scale = PenaltyScale::kAbsolute;
    cfg.lambda0 = static_cast<double>(uniform_index(rng, 3)) * 0.5;
    cfg.lambda1 = static_cast<double>(uniform_index(rng, 3)) * 0.05;
    cfg.max_rule_len = 1 + uniform_index(rng, 4);
    const RuleProblem problem(inst.data, inst.y, cfg);
    std::vector<double> mu(inst.y.size(), 0.0);
    for (std::size_t i = 0; i < mu.size(); ++i) {
      // duals on a coarse grid to provoke ties
      if (problem.positives().test(i)) mu[i] = static_cast<double>(uniform_index(rng, 5)) * 0.5;
    }
    const auto expected = fixture::brute_force_price(problem, mu, 1.0);
    const auto got = price_search(mu, 1.0, problem);
    CHECK(got.exhaustive);
    REQUIRE(got.best.has_value() == expected.has_value());
    if (expected) {
      CHECK(got.best->clause == expected->clause);
      CHECK(got.best->reduced_cost == doctest::Approx(expected->reduced_cost).epsilon(1e-12));
    }
  }
}

TEST_CASE("pricing respects the evaluation budget") {
  const Dataset ds = generate_xor(400, 10, 3);
  const BinarizedDataset data = binarize(ds);
  CgConfig cfg;
  cfg.pricing_budget = 50;
  const RuleProblem problem(data, ds.labels, cfg);
  std::vector<double> mu(ds.labels.size(), 0.0);
  for (std::size_t i = 0; i < mu.size(); ++i) mu[i] = problem.positives().test(i) ? 1.0 : 0.0;
  const PricingOutcome out = price_search(mu, 1.0, problem);
  CHECK_FALSE(out.exhaustive);
  CHECK(out.evaluations <= 50 + data.n_literals());
  CHECK(out.best.has_value());
}

TEST_CASE("threshold labels give the single literal") {
  const Dataset ds = generate_xor(500, 3, 17);
  Labels y(ds.labels.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = ds.features(i, 0) > 0.5 ? 1 : 0;
  LiteralCatalog catalog;
  catalog.n_features = 3;
  for (std::size_t f = 0; f < 3; ++f) {
    for (double t : {0.25, 0.5, 0.75}) catalog.literals.push_back({f, Op::kLessEqual, t});
    for (double t : {0.25, 0.5, 0.75}) catalog.literals.push_back({f, Op::kGreater, t});
  }
  const BinarizedDataset data = apply_catalog(catalog, ds.features);
  CgConfig cfg;
  cfg.positive_class = 1;
  const CgFitResult r = fit(data, y, cfg);
  const RuleSet expected({Rule({{0, Op::kGreater, 0.5}}, 1)}, 1);
  CHECK(rulesets_equal(r.ruleset, expected));
  CHECK(r.converged);
}

TEST_CASE("xor labels give two two-term rules") {
  const Dataset ds = generate_xor(1000, 10, 42);
  // quartile grid per feature so that 0.5 is an available threshold
  LiteralCatalog catalog;
  catalog.n_features = ds.features.cols();
  for (std::size_t f = 0; f < catalog.n_features; ++f) {
    for (double t : {0.25, 0.5, 0.75}) catalog.literals.push_back({f, Op::kLessEqual, t});
    for (double t : {0.25, 0.5, 0.75}) catalog.literals.push_back({f, Op::kGreater, t});
  }
  const BinarizedDataset data = apply_catalog(catalog, ds.features);
  const CgFitResult r = fit(data, ds.labels, CgConfig{});
  REQUIRE(r.ruleset.rules().size() == 2);
  // class 1 needs opposite sides, class 0 the same side
  const bool same_side = r.ruleset.positive_class() == 0;
  for (const auto& rule : r.ruleset.rules()) {
    REQUIRE(rule.size() == 2);
    CHECK(rule.literals()[0].feature == 0);
    CHECK(rule.literals()[1].feature == 1);
    CHECK((rule.literals()[0].op == rule.literals()[1].op) == same_side);
    CHECK(rule.literals()[0].threshold == 0.5);
    CHECK(rule.literals()[1].threshold == 0.5);
  }
  CHECK(r.ruleset.predict(ds.features) == ds.labels);
}

TEST_CASE("xor with decile thresholds stays close to the labels") {
  const Dataset ds = generate_xor(1000, 10, 42);
  const BinarizedDataset data = binarize(ds);
  const CgFitResult r = fit(data, ds.labels, CgConfig{});
  CHECK(r.ruleset.rules().size() <= 4);
  // the two-clause xor built from the deciles nearest 0.5 is feasible, so the
  // fit can only do better
  auto nearest = [&](std::size_t f, Op op) {
    std::size_t best = 0;
    double gap = 1e9;
    for (std::size_t j = 0; j < data.n_literals(); ++j) {
      const Literal& l = data.catalog.literals[j];
      if (l.feature == f && l.op == op && std::abs(l.threshold - 0.5) < gap) {
        gap = std::abs(l.threshold - 0.5);
        best = j;
      }
    }
    return best;
  };
  const RuleProblem problem(data, ds.labels, CgConfig{});
  std::vector<Clause> hand;
  if (problem.positive_class() == 1) {
    hand = {{nearest(0, Op::kGreater), nearest(1, Op::kLessEqual)},
            {nearest(0, Op::kLessEqual), nearest(1, Op::kGreater)}};
  } else {
    hand = {{nearest(0, Op::kLessEqual), nearest(1, Op::kLessEqual)},
            {nearest(0, Op::kGreater), nearest(1, Op::kGreater)}};
  }
  for (auto& c : hand) std::sort(c.begin(), c.end());
  CHECK(r.objective <= problem.objective(hand) + 1e-9);
  const Labels pred = r.ruleset.predict(ds.features);
  std::size_t agree = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) agree += pred[i] == ds.labels[i] ? 1 : 0;
  CHECK(agree >= 950);
}

TEST_CASE("degenerate labels") {
  const auto inst = fixture::random_binary(5);
  const Labels ones(inst.y.size(), 1);
  const CgFitResult r = fit(inst.data, ones, CgConfig{});
  CHECK(r.ruleset.empty());
  CHECK(r.ruleset.default_class() == 1);
  const ExactFitResult e = exact_fit_bruteforce(inst.data, Labels(inst.y.size(), 0), CgConfig{}, 2);
  CHECK(e.ruleset.empty());
  CHECK(e.objective == 0.0);
}

TEST_CASE("exact solver equals DNF enumeration") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto inst = fixture::random_binary(500 + seed, 10, 3);
    CgConfig cfg;
    cfg.penalty_scale = PenaltyScale::kAbsolute;
    cfg.lambda0 = 0.5;
    cfg.lambda1 = 0.05 * static_cast<double>(seed % 3);
    cfg.max_rule_len = 2;
    const RuleProblem problem(inst.data, inst.y, cfg);
    const ExactFitResult e = exact_fit_bruteforce(inst.data, inst.y, cfg, 3);
    CHECK(e.objective == doctest::Approx(fixture::brute_force_dnf(problem, 3)).epsilon(1e-12));
    CHECK(e.objective == doctest::Approx(problem.objective(e.selected)).epsilon(1e-12));
  }
}

TEST_CASE("greedy single clause loses to the two-clause optimum") {
  // Positives split in two groups that no single clause covers cleanly.
  const double rows[10][3] = {{1, 1, 0}, {1, 1, 0}, {1, 1, 1}, {0, 0, 1}, {0, 1, 1},
                              {1, 0, 0}, {0, 1, 0}, {0, 0, 0}, {1, 0, 1}, {0, 1, 0}};
  const Labels y = {1, 1, 1, 1, 1, 0, 0, 0, 0, 0};
  Matrix X(10, 3);
  for (std::size_t i = 0; i < 10; ++i) {
    for (std::size_t j = 0; j < 3; ++j) X(i, j) = rows[i][j];
  }
  const std::vector<FeatureKind> kinds(3, FeatureKind::kContinuous);
  const BinarizedDataset data = binarize(X, kinds, 1);
  CgConfig cfg;
  cfg.penalty_scale = PenaltyScale::kAbsolute;
  cfg.lambda0 = 0.1;
  cfg.lambda1 = 0.01;
  cfg.max_rule_len = 2;
  cfg.positive_class = 1;
  const RuleProblem problem(data, y, cfg);
  const ExactFitResult one = exact_fit_bruteforce(data, y, cfg, 1);
  const ExactFitResult two = exact_fit_bruteforce(data, y, cfg, 2);
  CHECK(two.selected.size() == 2);
  CHECK(two.objective < one.objective);
  CHECK(two.objective == doctest::Approx(fixture::brute_force_dnf(problem, 2)).epsilon(1e-12));
}

TEST_CASE("oracle never loses to column generation") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto inst = fixture::random_binary(700 + seed, 12, 4);
    CgConfig cfg;
    cfg.penalty_scale = PenaltyScale::kAbsolute;
    cfg.lambda0 = 0.5;
    cfg.lambda1 = 0.05;
    const CgFitResult f = fit(inst.data, inst.y, cfg);
    const ExactFitResult e = exact_fit_bruteforce(inst.data, inst.y, cfg, 3);
    if (f.selected.size() <= 3) CHECK(e.objective <= f.objective + 1e-9);
  }
}

TEST_CASE("column generation observer sees a zero duality gap") {
  const Dataset ds = generate_xor(300, 4, 9);
  const BinarizedDataset data = binarize(ds, 5);
  CgConfig cfg;
  std::size_t calls = 0;
  const CgFitResult r = fit(data, ds.labels, cfg, [&](const CgIteration& it) {
    ++calls;
    CHECK(std::abs(it.master->primal_objective - it.master->dual_objective) <= 1e-6);
  });
  CHECK(calls == r.iterations);
  CHECK(r.converged);
  CHECK_FALSE(r.hit_iteration_limit);
}

TEST_CASE("iteration limit is reported") {
  const Dataset ds = generate_xor(300, 4, 9);
  const BinarizedDataset data = binarize(ds, 5);
  CgConfig cfg;
  cfg.max_iterations = 1;
  const CgFitResult r = fit(data, ds.labels, cfg);
  CHECK(r.hit_iteration_limit);
  CHECK_FALSE(r.converged);
}

TEST_CASE("fit is deterministic") {
  const Dataset ds = generate_xor(400, 6, 4);
  const BinarizedDataset data = binarize(ds);
  CgConfig a;
  CgConfig b;
  b.seed = 99;
  CHECK(rulesets_equal(fit(data, ds.labels, a).ruleset, fit(data, ds.labels, b).ruleset));
}
