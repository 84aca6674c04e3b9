#include "cgx/ruleset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

#include "json.hpp"

#include "cgx/errors.hpp"

namespace cgx {

std::string_view op_symbol(Op op) {
  switch (op) {
    case Op::kLessEqual:
      return "<=";
    case Op::kGreater:
      return ">";
    case Op::kEqual:
      return "=";
  }
  return "?";
}

std::optional<Op> parse_op(std::string_view symbol) {
  if (symbol == "<=") return Op::kLessEqual;
  if (symbol == ">") return Op::kGreater;
  if (symbol == "=" || symbol == "==") return Op::kEqual;
  return std::nullopt;
}

std::string format_double(double value) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, end);
}

Rule::Rule(std::vector<Literal> literals, int class_label) : class_label_(class_label) {
  if (literals.empty()) throw ParameterError("a rule needs at least one literal");
  if (class_label != 0 && class_label != 1) throw ParameterError("class label must be 0 or 1");
  for (const auto& lit : literals) {
    if (!std::isfinite(lit.threshold)) throw ParameterError("rule threshold must be finite");
  }
  std::sort(literals.begin(), literals.end());
  for (const auto& lit : literals) {
    if (!literals_.empty() && literals_.back().feature == lit.feature &&
        literals_.back().op == lit.op) {
      Literal& kept = literals_.back();
      switch (lit.op) {
        // Sorted ascending, so the later literal has the larger threshold.
        case Op::kLessEqual:
          break;
        case Op::kGreater:
          kept = lit;
          break;
        case Op::kEqual:
          if (!(kept == lit)) {
            throw ParameterError("rule requires feature " + std::to_string(lit.feature) +
                                 " to equal two different categories");
          }
          break;
      }
      continue;
    }
    literals_.push_back(lit);
  }
}

bool Rule::fires(std::span<const double> x) const {
  for (const auto& lit : literals_) {
    if (lit.feature >= x.size()) {
      throw EvaluationError("rule references feature " + std::to_string(lit.feature) +
                            " but the input has " + std::to_string(x.size()) + " features");
    }
    if (!lit.holds(x[lit.feature])) return false;
  }
  return true;
}

bool eval_rule(const Rule& rule, std::span<const double> x) { return rule.fires(x); }

RuleSet::RuleSet(std::vector<Rule> rules, int positive_class)
    : positive_class_(positive_class) {
  if (positive_class != 0 && positive_class != 1) {
    throw ParameterError("positive class must be 0 or 1");
  }
  for (const auto& r : rules) {
    if (r.class_label() != positive_class) {
      throw ParameterError("every rule must predict the positive class");
    }
  }
  std::sort(rules.begin(), rules.end());
  rules.erase(std::unique(rules.begin(), rules.end()), rules.end());
  rules_ = std::move(rules);
}

int RuleSet::predict(std::span<const double> x) const {
  for (const auto& r : rules_) {
    if (r.fires(x)) return positive_class_;
  }
  return default_class();
}

Labels RuleSet::predict(const Matrix& X) const {
  Labels out(X.rows());
  for (std::size_t i = 0; i < X.rows(); ++i) out[i] = predict(X.row(i));
  return out;
}

BitVector RuleSet::coverage(const Matrix& X) const {
  BitVector out(X.rows());
  for (std::size_t i = 0; i < X.rows(); ++i) {
    for (const auto& r : rules_) {
      if (r.fires(X.row(i))) {
        out.set(i);
        break;
      }
    }
  }
  return out;
}

Complexity RuleSet::complexity() const {
  Complexity c;
  c.n_rules = rules_.size();
  for (const auto& r : rules_) c.n_terms += r.size();
  return c;
}

int predict(const RuleSet& rs, std::span<const double> x) { return rs.predict(x); }
Complexity complexity(const RuleSet& rs) { return rs.complexity(); }

RuleSet canonicalize(std::vector<Rule> rules, int positive_class) {
  std::vector<Rule> normalized;
  normalized.reserve(rules.size());
  // Rule construction re-sorts and merges literals.
  for (auto& r : rules) normalized.emplace_back(r.literals(), r.class_label());
  return RuleSet(std::move(normalized), positive_class);
}

RuleSet canonicalize(const RuleSet& rs) {
  return canonicalize(rs.rules(), rs.positive_class());
}

bool rulesets_equal(const RuleSet& a, const RuleSet& b) {
  return canonicalize(a) == canonicalize(b);
}

std::vector<std::string> default_feature_names(std::size_t n_features) {
  std::vector<std::string> names;
  names.reserve(n_features);
  for (std::size_t i = 0; i < n_features; ++i) names.push_back("x" + std::to_string(i + 1));
  return names;
}

namespace {

std::string feature_label(std::size_t feature, std::span<const std::string> names) {
  if (feature < names.size()) return names[feature];
  return "x" + std::to_string(feature + 1);
}

[[noreturn]] void parse_fail(std::size_t line, std::size_t column, const std::string& what) {
  throw ParseError("line " + std::to_string(line) + ", column " + std::to_string(column) +
                   ": " + what);
}

std::string_view trim_view(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool parse_double(std::string_view s, double& out) {
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return !s.empty() && ec == std::errc() && end == s.data() + s.size() && std::isfinite(out);
}

int parse_class(std::string_view s, std::size_t line, std::size_t column) {
  s = trim_view(s);
  if (s.rfind("class=", 0) != 0) parse_fail(line, column, "expected 'class=<0|1>'");
  s.remove_prefix(6);
  if (s == "0") return 0;
  if (s == "1") return 1;
  parse_fail(line, column + 6, "class must be 0 or 1");
}

}  // namespace

std::string to_text(const RuleSet& rs, std::span<const std::string> feature_names) {
  std::ostringstream out;
  for (const auto& rule : rs.rules()) {
    out << "IF ";
    bool first = true;
    for (const auto& lit : rule.literals()) {
      if (!first) out << " AND ";
      first = false;
      out << feature_label(lit.feature, feature_names) << ' ' << op_symbol(lit.op) << ' '
          << format_double(lit.threshold);
    }
    out << " THEN class=" << rule.class_label() << '\n';
  }
  out << "ELSE class=" << rs.default_class() << '\n';
  return out.str();
}

RuleSet from_text(std::string_view text, std::span<const std::string> feature_names) {
  std::map<std::string, std::size_t, std::less<>> by_name;
  for (std::size_t i = 0; i < feature_names.size(); ++i) by_name.emplace(feature_names[i], i);

  auto resolve = [&](std::string_view name, std::size_t line,
                     std::size_t column) -> std::size_t {
    if (auto it = by_name.find(name); it != by_name.end()) return it->second;
    if (name.size() > 1 && name[0] == 'x') {
      std::size_t index = 0;
      const auto [end, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), index);
      if (ec == std::errc() && end == name.data() + name.size() && index >= 1) return index - 1;
    }
    parse_fail(line, column, "unknown feature '" + std::string(name) + "'");
  };

  std::vector<Rule> rules;
  std::optional<int> default_class;
  std::optional<int> rule_class;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, eol - pos);
    ++line_no;
    pos = eol + 1;
    // Blank lines and '#' comments are ignored.
    if (trim_view(line).empty() || trim_view(line).front() == '#') {
      if (eol == text.size()) break;
      continue;
    }
    if (default_class) parse_fail(line_no, 1, "content after the ELSE line");

    if (line.rfind("ELSE ", 0) == 0) {
      default_class = parse_class(line.substr(5), line_no, 6);
      continue;
    }
    if (line.rfind("IF ", 0) != 0) parse_fail(line_no, 1, "expected 'IF' or 'ELSE'");
    const std::size_t then_at = line.rfind(" THEN ");
    if (then_at == std::string_view::npos) parse_fail(line_no, line.size() + 1, "missing 'THEN'");
    const int cls = parse_class(line.substr(then_at + 6), line_no, then_at + 7);
    if (rule_class && *rule_class != cls) {
      parse_fail(line_no, then_at + 7, "rules predict different classes");
    }
    rule_class = cls;

    std::vector<Literal> literals;
    std::size_t start = 3;
    while (start < then_at) {
      std::size_t stop = line.find(" AND ", start);
      if (stop == std::string_view::npos || stop > then_at) stop = then_at;
      const std::string_view term = line.substr(start, stop - start);
      // The comparison operator is the last operator token in the term.
      std::size_t op_at = std::string_view::npos;
      std::size_t op_len = 0;
      for (std::string_view token : {" <= ", " > ", " = "}) {
        const std::size_t at = term.rfind(token);
        if (at != std::string_view::npos && (op_at == std::string_view::npos || at > op_at)) {
          op_at = at;
          op_len = token.size();
        }
      }
      if (op_at == std::string_view::npos) {
        parse_fail(line_no, start + 1, "expected '<=', '>' or '=' in '" + std::string(term) + "'");
      }
      Literal lit;
      lit.op = *parse_op(trim_view(term.substr(op_at, op_len)));
      lit.feature = resolve(trim_view(term.substr(0, op_at)), line_no, start + 1);
      if (!parse_double(trim_view(term.substr(op_at + op_len)), lit.threshold)) {
        parse_fail(line_no, start + op_at + op_len + 1, "invalid threshold");
      }
      literals.push_back(lit);
      start = stop + 5;
    }
    if (literals.empty()) parse_fail(line_no, 4, "rule has no literals");
    try {
      rules.emplace_back(std::move(literals), cls);
    } catch (const ParameterError& e) {
      parse_fail(line_no, 1, e.what());
    }
  }
  if (!default_class) parse_fail(line_no, 1, "missing 'ELSE class=<c>' line (truncated input?)");
  if (rule_class && *rule_class == *default_class) {
    parse_fail(line_no, 1, "ELSE class equals the rule class");
  }
  return RuleSet(std::move(rules), 1 - *default_class);
}

std::string to_json(const RuleSet& rs) {
  nlohmann::ordered_json j;
  j["format_version"] = kRuleSetFormatVersion;
  j["positive_class"] = rs.positive_class();
  j["default_class"] = rs.default_class();
  j["rules"] = nlohmann::ordered_json::array();
  for (const auto& rule : rs.rules()) {
    nlohmann::ordered_json literals = nlohmann::ordered_json::array();
    for (const auto& lit : rule.literals()) {
      literals.push_back(
          {{"feature", lit.feature}, {"op", op_symbol(lit.op)}, {"threshold", lit.threshold}});
    }
    j["rules"].push_back({{"literals", std::move(literals)}});
  }
  return j.dump(2);
}

RuleSet from_json(std::string_view json) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("rule-set JSON: ") + e.what());
  }
  try {
    const int version = j.at("format_version").get<int>();
    if (version != kRuleSetFormatVersion) {
      throw ParseError("rule-set JSON: unsupported format_version " + std::to_string(version));
    }
    const int positive = j.at("positive_class").get<int>();
    const int fallback = j.at("default_class").get<int>();
    if ((positive != 0 && positive != 1) || fallback != 1 - positive) {
      throw ParseError("rule-set JSON: classes must be 0/1 and differ");
    }
    std::vector<Rule> rules;
    const auto& rules_json = j.at("rules");
    for (std::size_t r = 0; r < rules_json.size(); ++r) {
      std::vector<Literal> literals;
      for (const auto& lj : rules_json[r].at("literals")) {
        Literal lit;
        lit.feature = lj.at("feature").get<std::size_t>();
        const auto op = parse_op(lj.at("op").get<std::string>());
        if (!op) throw ParseError("rule-set JSON: rules[" + std::to_string(r) + "]: bad op");
        lit.op = *op;
        lit.threshold = lj.at("threshold").get<double>();
        literals.push_back(lit);
      }
      try {
        rules.emplace_back(std::move(literals), positive);
      } catch (const ParameterError& e) {
        throw ParseError("rule-set JSON: rules[" + std::to_string(r) + "]: " + e.what());
      }
    }
    return RuleSet(std::move(rules), positive);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("rule-set JSON: ") + e.what());
  }
}

}  // namespace cgx
