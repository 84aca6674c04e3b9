#include <cmath>
#include <set>

#include "cgx/data.hpp"
#include "cgx/errors.hpp"
#include "cgx/extract.hpp"
#include "cgx/metrics.hpp"
#include "doctest.h"
#include "fixtures.hpp"
#include "json.hpp"

using namespace cgx;

namespace {

// Rank-biased overlap written straight from its definition.
double rbo_by_definition(const std::vector<std::size_t>& s, const std::vector<std::size_t>& t,
                         double p) {
  const std::size_t depth = std::min(s.size(), t.size());
  double num = 0.0;
  double den = 0.0;
  for (std::size_t d = 1; d <= depth; ++d) {
    std::size_t common = 0;
    for (std::size_t a = 0; a < d; ++a) {
      for (std::size_t b = 0; b < d; ++b) common += s[a] == t[b] ? 1 : 0;
    }
    const double w = std::pow(p, static_cast<double>(d - 1));
    num += w * static_cast<double>(common) / static_cast<double>(d);
    den += w;
  }
  return num / den;
}

}  // namespace

TEST_CASE("agreement") {
  const Labels a = {1, 0, 1, 1};
  const Labels b = {1, 1, 1, 0};
  CHECK(fidelity(a, a) == 1.0);
  CHECK(fidelity(a, Labels{0, 1, 0, 0}) == 0.0);
  CHECK(fidelity(a, b) == 0.5);
  CHECK_THROWS_AS(fidelity(a, Labels{1}), ShapeError);
  CHECK_THROWS_AS(fidelity(Labels{}, Labels{}), ParameterError);
}

TEST_CASE("rank-biased overlap") {
  const std::vector<std::size_t> abc = {0, 1, 2};
  const std::vector<std::size_t> bac = {1, 0, 2};
  CHECK(rbo(abc, abc, 0.9) == 1.0);
  CHECK(rbo(abc, abc, 0.3) == 1.0);
  CHECK(rbo(abc, std::vector<std::size_t>{3, 4, 5}, 0.9) == 0.0);
  CHECK(rbo(abc, bac, 0.9) == doctest::Approx(0.6310).epsilon(1e-4 / 0.6310));
  CHECK(std::abs(rbo(abc, bac, 0.9) - (0.9 + 0.81) / 2.71) < 1e-12);
  CHECK_THROWS_AS(rbo(abc, std::vector<std::size_t>{}, 0.9), ParameterError);
  CHECK_THROWS_AS(rbo(abc, bac, 1.0), ParameterError);
  CHECK_THROWS_AS(rbo(std::vector<std::size_t>{0, 0}, abc, 0.5), ParameterError);

  Rng rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::size_t> s(8);
    std::vector<std::size_t> t(8);
    for (std::size_t i = 0; i < 8; ++i) s[i] = t[i] = i;
    shuffle(std::span<std::size_t>(s), rng);
    shuffle(std::span<std::size_t>(t), rng);
    s.resize(1 + uniform_index(rng, 8));
    t.resize(1 + uniform_index(rng, 8));
    const double p = 0.05 + 0.9 * uniform01(rng);
    CHECK(rbo(s, t, p) == doctest::Approx(rbo_by_definition(s, t, p)).epsilon(1e-12));
  }
}

TEST_CASE("rule importance") {
  Matrix X(10, 2);
  for (std::size_t i = 0; i < 10; ++i) X(i, 0) = i < 4 ? 0.9 : 0.1;
  const RuleSet one({Rule({{0, Op::kGreater, 0.5}}, 1)}, 1);
  const RankedFeatures r = rule_feature_importance(one, X);
  CHECK(r.features == std::vector<std::size_t>{0});
  CHECK(r.scores[0] == doctest::Approx(0.4));
  CHECK(rule_feature_importance(RuleSet({}, 1), X).empty());

  const RuleSet two({Rule({{0, Op::kGreater, 0.5}, {1, Op::kLessEqual, 0.5}}, 1)}, 1);
  const RankedFeatures tie = rule_feature_importance(two, X);
  CHECK(tie.features == std::vector<std::size_t>{0, 1});
  CHECK(tie.scores[0] == tie.scores[1]);
}

TEST_CASE("xor rankings put x1 and x2 first") {
  const Dataset ds = generate_xor(1000, 10, 42);
  TrainOptions opts;
  opts.seed = 100;
  const MlpModel m = train(ds.features, ds.labels, opts).model;
  const RankedFeatures dnn = dnn_feature_importance(m, ds.features, ds.labels, 5, 0);
  REQUIRE(dnn.size() == 10);
  CHECK(std::set<std::size_t>{dnn.features[0], dnn.features[1]} == std::set<std::size_t>{0, 1});
  for (std::size_t k = 1; k < dnn.size(); ++k) CHECK(dnn.scores[k - 1] >= dnn.scores[k]);
  for (double s : dnn.scores) CHECK(s >= 0.0);
  const RankedFeatures again = dnn_feature_importance(m, ds.features, ds.labels, 5, 0);
  CHECK(again.features == dnn.features);
  CHECK(again.scores == dnn.scores);

  const ExtractionResult ex = cgx_ped(m, ds.features, ExtractionConfig{});
  const RankedFeatures rules = rule_feature_importance(ex.ruleset, ds.features);
  REQUIRE(rules.size() >= 2);
  CHECK(std::set<std::size_t>{rules.features[0], rules.features[1]} == std::set<std::size_t>{0, 1});
}

TEST_CASE("unused feature scores zero") {
  const MlpModel m = fixture::hand_model(
      2, {fixture::dense(2, 1, {1, 0}, {-0.5}, Activation::kRelu),
          fixture::dense(1, 2, {0, 1}, {0, 0}, Activation::kSoftmax)});
  const Dataset ds = generate_xor(300, 2, 3);
  Labels y = predict_labels(m, ds.features);
  const RankedFeatures r = dnn_feature_importance(m, ds.features, y, 3, 1);
  REQUIRE(r.size() == 2);
  CHECK(r.features[0] == 0);
  CHECK(r.scores[0] > 0.0);
  CHECK(r.scores[1] == 0.0);
}

TEST_CASE("alignment on disjoint features is low") {
  // network reads x1 and x2, rules read x3 and x4
  const MlpModel m = fixture::hand_model(
      4, {fixture::dense(4, 2, {1, 0, 0, 0, 0, 1, 0, 0}, {-0.5, -0.5}, Activation::kRelu),
          fixture::dense(2, 2, {0, 0, 1, 1}, {0, -0.1}, Activation::kSoftmax)});
  const Dataset ds = generate_xor(400, 4, 9);
  const Labels y = predict_labels(m, ds.features);
  const RuleSet rs({Rule({{2, Op::kGreater, 0.5}, {3, Op::kGreater, 0.3}}, 1)}, 1);
  const AlignmentResult a = feature_alignment(rs, m, ds.features, y);
  REQUIRE(a.rbo.has_value());
  CHECK(*a.rbo < 0.3);
  CHECK_FALSE(feature_alignment(RuleSet({}, 1), m, ds.features, y).rbo.has_value());
}

TEST_CASE("stability check") {
  const Dataset ds = generate_xor(300, 4, 21);
  TrainOptions opts;
  opts.topology = {16};
  opts.epochs = 40;
  const MlpModel m = train(ds.features, ds.labels, opts).model;
  const Extractor ped = [&](std::uint64_t seed) {
    ExtractionConfig cfg;
    cfg.seed = seed;
    cfg.cg.seed = seed;
    return cgx_ped(m, ds.features, cfg).ruleset;
  };
  const std::vector<std::uint64_t> seeds = {0, 1, 2};
  const StabilityResult st = stability_check(ped, seeds);
  CHECK(st.stable);
  CHECK(st.warning.empty());

  const Extractor dummy = [](std::uint64_t seed) {
    return RuleSet({Rule({{0, Op::kGreater, static_cast<double>(seed)}}, 1)}, 1);
  };
  CHECK_FALSE(stability_check(dummy, seeds).stable);
  const std::vector<std::uint64_t> single = {4};
  const StabilityResult one = stability_check(dummy, single);
  CHECK(one.stable);
  CHECK_FALSE(one.warning.empty());
  CHECK_THROWS_AS(stability_check(dummy, std::vector<std::uint64_t>{}), ParameterError);
}

TEST_CASE("metrics report round trip and schema") {
  const Dataset ds = generate_xor(100, 2, 3);
  const RuleSet rs({Rule({{0, Op::kGreater, 0.5}}, 1)}, 1);
  MetricsReport r = evaluate(rs, ds.features, ds.labels, ds.labels, "test");
  r.rbo = 0.75;
  r.provenance_json = R"({"config_hash":"abc"})";
  const auto j = nlohmann::json::parse(to_json(r));
  for (const char* key : {"split", "fidelity", "accuracy", "n_rules", "n_terms", "rbo", "stability", "provenance"}) {
    CHECK(j.contains(key));
  }
  CHECK(j["n_rules"] == 1);
  CHECK(j["stability"].is_null());
  const MetricsReport back = report_from_json(to_json(r));
  CHECK(back.fidelity == r.fidelity);
  CHECK(back.rbo == r.rbo);
  CHECK(back.split == "test");
  CHECK_THROWS_AS(report_from_json("{}"), ParseError);
}
