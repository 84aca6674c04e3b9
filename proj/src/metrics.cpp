#include "cgx/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "cgx/errors.hpp"
#include "cgx/random.hpp"
#include "json.hpp"

namespace cgx {

double fidelity(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) {
    throw ShapeError("label vectors differ in length: " + std::to_string(a.size()) + " vs " +
                     std::to_string(b.size()));
  }
  if (a.empty()) throw ParameterError("cannot compute agreement of empty label vectors");
  std::size_t same = 0;
  for (std::size_t i = 0; i < a.size(); ++i) same += a[i] == b[i] ? 1 : 0;
  return static_cast<double>(same) / static_cast<double>(a.size());
}

double accuracy(std::span<const int> truth, std::span<const int> predicted) {
  return fidelity(truth, predicted);
}

RankedFeatures rank_scores(std::span<const double> scores, bool positive_only) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  RankedFeatures out;
  for (std::size_t f : order) {
    if (positive_only && !(scores[f] > 0.0)) continue;
    out.features.push_back(f);
    out.scores.push_back(scores[f]);
  }
  return out;
}

double rbo(std::span<const std::size_t> s, std::span<const std::size_t> t, double p) {
  if (s.empty() || t.empty()) throw ParameterError("rank-biased overlap needs non-empty rankings");
  if (!(p > 0.0 && p < 1.0)) throw ParameterError("rbo persistence p must lie in (0, 1)");
  const std::size_t depth = std::min(s.size(), t.size());
  std::set<std::size_t> seen_s;
  std::set<std::size_t> seen_t;
  std::size_t overlap = 0;
  double weighted = 0.0;
  double norm = 0.0;
  double w = 1.0;
  for (std::size_t d = 1; d <= depth; ++d) {
    const std::size_t a = s[d - 1];
    const std::size_t b = t[d - 1];
    if (!seen_s.insert(a).second || !seen_t.insert(b).second) {
      throw ParameterError("ranking lists must not repeat a feature");
    }
    if (a == b) {
      ++overlap;
    } else {
      overlap += seen_t.count(a) + seen_s.count(b);
    }
    weighted += w * static_cast<double>(overlap) / static_cast<double>(d);
    norm += w;
    w *= p;
  }
  return weighted / norm;
}

RankedFeatures rule_feature_importance(const RuleSet& rs, const Matrix& X) {
  std::vector<double> scores(X.cols(), 0.0);
  if (rs.empty() || X.rows() == 0) return {};
  for (const auto& rule : rs.rules()) {
    std::size_t fired = 0;
    for (std::size_t i = 0; i < X.rows(); ++i) fired += rule.fires(X.row(i)) ? 1 : 0;
    const double cov = static_cast<double>(fired) / static_cast<double>(X.rows());
    const double share = 1.0 / static_cast<double>(rule.size());
    for (const auto& lit : rule.literals()) scores[lit.feature] += cov * share;
  }
  return rank_scores(scores, true);
}

RankedFeatures dnn_feature_importance(const MlpModel& model, const Matrix& X, const Labels& y,
                                      std::size_t repeats, std::uint64_t seed) {
  if (repeats < 1) throw ParameterError("repeats must be >= 1");
  if (X.rows() != y.size()) throw ShapeError("feature rows and labels differ in length");
  const double base = accuracy(y, predict_labels(model, X));
  std::vector<double> scores(X.cols(), 0.0);
  for (std::size_t f = 0; f < X.cols(); ++f) {
    double drop = 0.0;
    for (std::size_t r = 0; r < repeats; ++r) {
      Rng rng(mix_seed(mix_seed(seed, f), r));
      std::vector<double> column = X.column(f);
      shuffle(std::span<double>(column), rng);
      Matrix permuted = X;
      for (std::size_t i = 0; i < X.rows(); ++i) permuted(i, f) = column[i];
      drop += base - accuracy(y, predict_labels(model, permuted));
    }
    scores[f] = std::max(0.0, drop / static_cast<double>(repeats));
  }
  return rank_scores(scores);
}

AlignmentResult feature_alignment(const RuleSet& rs, const MlpModel& model, const Matrix& X,
                                  const Labels& y, const AlignmentOptions& options) {
  AlignmentResult out;
  out.rule_ranking = rule_feature_importance(rs, X);
  out.dnn_ranking = dnn_feature_importance(model, X, y, options.repeats, options.seed);
  if (!out.rule_ranking.empty() && !out.dnn_ranking.empty()) {
    out.rbo = rbo(out.rule_ranking, out.dnn_ranking, options.p);
  }
  return out;
}

StabilityResult stability_check(const Extractor& extractor, std::span<const std::uint64_t> seeds) {
  if (seeds.empty()) throw ParameterError("stability check needs at least one seed");
  StabilityResult out;
  for (std::uint64_t s : seeds) out.rulesets.push_back(canonicalize(extractor(s)));
  if (seeds.size() < 2) {
    out.warning = "only one seed given; stability holds vacuously";
    return out;
  }
  for (std::size_t i = 1; i < out.rulesets.size(); ++i) {
    if (!rulesets_equal(out.rulesets[0], out.rulesets[i])) out.stable = false;
  }
  return out;
}

MetricsReport evaluate(const RuleSet& rs, const Matrix& X, const Labels& y_true,
                       const Labels& y_model, const std::string& split) {
  const Labels predicted = rs.predict(X);
  MetricsReport report;
  report.split = split;
  report.fidelity = fidelity(y_model, predicted);
  report.accuracy = accuracy(y_true, predicted);
  const Complexity c = rs.complexity();
  report.n_rules = c.n_rules;
  report.n_terms = c.n_terms;
  return report;
}

std::string to_json(const MetricsReport& report) {
  nlohmann::ordered_json j;
  j["split"] = report.split;
  j["fidelity"] = report.fidelity;
  j["accuracy"] = report.accuracy;
  j["n_rules"] = report.n_rules;
  j["n_terms"] = report.n_terms;
  j["rbo"] = report.rbo ? nlohmann::ordered_json(*report.rbo) : nlohmann::ordered_json(nullptr);
  j["stability"] =
      report.stability ? nlohmann::ordered_json(*report.stability) : nlohmann::ordered_json(nullptr);
  j["provenance"] = nlohmann::ordered_json::parse(report.provenance_json);
  return j.dump(2);
}

MetricsReport report_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    MetricsReport r;
    r.split = j.at("split").get<std::string>();
    r.fidelity = j.at("fidelity").get<double>();
    r.accuracy = j.at("accuracy").get<double>();
    r.n_rules = j.at("n_rules").get<std::size_t>();
    r.n_terms = j.at("n_terms").get<std::size_t>();
    if (!j.at("rbo").is_null()) r.rbo = j.at("rbo").get<double>();
    if (!j.at("stability").is_null()) r.stability = j.at("stability").get<bool>();
    r.provenance_json = j.at("provenance").dump();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed metrics report: ") + e.what());
  }
}

}  // namespace cgx
