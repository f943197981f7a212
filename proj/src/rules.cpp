#include "aquagauge/rules.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>

namespace aquagauge::rules {
namespace {

struct Token {
  std::string text;
  bool quoted = false;
};

struct FieldName {
  std::string_view name;
  Field field;
};

constexpr FieldName kFields[] = {
    {"wqi", Field::wqi}, {"nph", Field::nph}, {"ndo", Field::ndo}, {"nbdo", Field::nbdo},
    {"nec", Field::nec}, {"nna", Field::nna}, {"nco", Field::nco}, {"ph", Field::ph},
    {"do", Field::dissolved_oxygen}, {"bod", Field::bod}, {"ec", Field::ec}, {"na", Field::na},
    {"tc", Field::tc},
};

RuleError syntax(std::size_t line, const std::string& msg) {
  return RuleError(RuleErrorKind::syntax_error, line, "line " + std::to_string(line) + ": " + msg);
}

std::vector<Token> tokenize(std::string_view line, std::size_t line_no) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    const char c = line[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == '#') {
      break;
    } else if (c == '"') {
      Token t{{}, true};
      ++i;
      bool closed = false;
      while (i < line.size()) {
        if (line[i] == '\\' && i + 1 < line.size() && (line[i + 1] == '"' || line[i + 1] == '\\')) {
          t.text.push_back(line[i + 1]);
          i += 2;
        } else if (line[i] == '"') {
          closed = true;
          ++i;
          break;
        } else {
          t.text.push_back(line[i++]);
        }
      }
      if (!closed) throw syntax(line_no, "unterminated quoted string");
      tokens.push_back(std::move(t));
    } else {
      Token t;
      while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i])) && line[i] != '"') {
        t.text.push_back(line[i++]);
      }
      tokens.push_back(std::move(t));
    }
  }
  return tokens;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

class LineParser {
 public:
  LineParser(std::vector<Token> tokens, std::size_t line) : tokens_(std::move(tokens)), line_(line) {}

  Rule parse() {
    keyword("rule");
    Rule rule;
    rule.priority = integer();
    rule.disease = quoted("disease name");
    keyword("reason");
    rule.reason = quoted("reason");
    keyword("suggest");
    rule.suggestion = quoted("suggestion");
    keyword("when");
    rule.conditions.push_back(condition());
    while (pos_ < tokens_.size()) {
      keyword("and");
      rule.conditions.push_back(condition());
    }
    return rule;
  }

 private:
  const Token& next(const char* expected) {
    if (pos_ >= tokens_.size()) throw syntax(line_, std::string("expected ") + expected + " at end of line");
    return tokens_[pos_++];
  }

  void keyword(const char* kw) {
    const Token& t = next(kw);
    if (t.quoted || lower(t.text) != kw) throw syntax(line_, std::string("expected '") + kw + "', found '" + t.text + "'");
  }

  std::string quoted(const char* what) {
    const Token& t = next(what);
    if (!t.quoted) throw syntax(line_, std::string("expected quoted ") + what);
    return t.text;
  }

  int integer() {
    const Token& t = next("priority");
    int v = 0;
    const auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (t.quoted || ec != std::errc{} || ptr != t.text.data() + t.text.size() || v == kDefaultRulePriority) {
      throw syntax(line_, "bad priority '" + t.text + "'");
    }
    return v;
  }

  double number() {
    const Token& t = next("number");
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (t.quoted || t.text.empty() || ec != std::errc{} || ptr != t.text.data() + t.text.size() || !std::isfinite(v)) {
      throw syntax(line_, "bad number '" + t.text + "'");
    }
    return v;
  }

  Condition condition() {
    const Token& f = next("field");
    if (f.quoted) throw syntax(line_, "expected field name");
    auto field = parse_field(f.text);
    if (!field) {
      throw RuleError(RuleErrorKind::unknown_field, line_, "line " + std::to_string(line_) + ": unknown field '" + f.text + "'");
    }
    Condition c;
    c.field = *field;
    const Token& op = next("operator");
    if (op.text == "<") {
      c.op = Op::less;
    } else if (op.text == "<=" || op.text == "≤") {
      c.op = Op::less_equal;
    } else if (op.text == ">") {
      c.op = Op::greater;
    } else if (op.text == ">=" || op.text == "≥") {
      c.op = Op::greater_equal;
    } else if (lower(op.text) == "between") {
      c.op = Op::between;
    } else {
      throw syntax(line_, "unknown operator '" + op.text + "'");
    }
    if (op.quoted) throw syntax(line_, "operator must not be quoted");
    c.value = number();
    if (c.op == Op::between) {
      c.upper = number();
      if (c.upper < c.value) throw syntax(line_, "between range is empty");
    }
    return c;
  }

  std::vector<Token> tokens_;
  std::size_t line_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string_view field_name(Field f) {
  for (const auto& fn : kFields) {
    if (fn.field == f) return fn.name;
  }
  return "?";
}

std::optional<Field> parse_field(std::string_view name) {
  const std::string key = lower(name);
  for (const auto& fn : kFields) {
    if (fn.name == key) return fn.field;
  }
  return std::nullopt;
}

double field_value(const wqi::WqiRecord& rec, Field f) {
  switch (f) {
    case Field::wqi: return rec.wqi;
    case Field::nph: return rec.sub.nph;
    case Field::ndo: return rec.sub.ndo;
    case Field::nbdo: return rec.sub.nbdo;
    case Field::nec: return rec.sub.nec;
    case Field::nna: return rec.sub.nna;
    case Field::nco: return rec.sub.nco;
    case Field::ph: return rec.inputs.ph;
    case Field::dissolved_oxygen: return rec.inputs.dissolved_oxygen;
    case Field::bod: return rec.inputs.bod;
    case Field::ec: return rec.inputs.conductivity;
    case Field::na: return rec.inputs.nitrate;
    case Field::tc: return rec.inputs.total_coliform;
  }
  return std::nan("");
}

bool Condition::holds(const wqi::WqiRecord& rec) const {
  const double v = field_value(rec, field);
  switch (op) {
    case Op::less: return v < value;
    case Op::less_equal: return v <= value;
    case Op::greater: return v > value;
    case Op::greater_equal: return v >= value;
    case Op::between: return v >= value && v <= upper;
  }
  return false;
}

RuleSet::RuleSet() : RuleSet(std::vector<Rule>{}) {}

RuleSet::RuleSet(std::vector<Rule> rules) : rules_(std::move(rules)) {
  default_rule_ = Rule{kDefaultRulePriority, "No Disease", "No rule matched", "Comfortable", {}};
  std::stable_sort(rules_.begin(), rules_.end(), [](const Rule& a, const Rule& b) { return a.priority > b.priority; });
  for (std::size_t i = 0; i < rules_.size(); ++i) {
    if (rules_[i].conditions.empty()) {
      throw RuleError(RuleErrorKind::syntax_error, 0, "rule '" + rules_[i].disease + "' has no conditions");
    }
    if (i > 0 && rules_[i].priority == rules_[i - 1].priority) {
      throw RuleError(RuleErrorKind::duplicate_priority, 0,
                      "duplicate priority " + std::to_string(rules_[i].priority));
    }
  }
}

RuleSet load_rules(std::string_view text) {
  std::vector<Rule> rules;
  std::map<int, std::size_t> seen;
  std::size_t line_no = 0;
  while (!text.empty() || line_no == 0) {
    ++line_no;
    const auto nl = text.find('\n');
    const std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);

    auto tokens = tokenize(line, line_no);
    if (tokens.empty()) continue;
    Rule rule = LineParser(std::move(tokens), line_no).parse();
    if (auto [it, inserted] = seen.emplace(rule.priority, line_no); !inserted) {
      throw RuleError(RuleErrorKind::duplicate_priority, line_no,
                      "line " + std::to_string(line_no) + ": priority " + std::to_string(rule.priority) +
                          " already used on line " + std::to_string(it->second));
    }
    rules.push_back(std::move(rule));
  }
  return RuleSet(std::move(rules));
}

RuleSet default_ruleset() { return load_rules(default_rules_text()); }

Diagnosis diagnose(const wqi::WqiRecord& rec, const RuleSet& rs) {
  for (const Rule& rule : rs.rules()) {
    const bool fires = std::all_of(rule.conditions.begin(), rule.conditions.end(),
                                   [&](const Condition& c) { return c.holds(rec); });
    if (!fires) continue;
    Diagnosis d{rule.disease, rule.reason, rule.suggestion, rule.priority, {}};
    for (const Condition& c : rule.conditions) {
      const bool echoed = std::any_of(d.inputs_echo.begin(), d.inputs_echo.end(),
                                      [&](const auto& e) { return e.first == c.field; });
      if (!echoed) d.inputs_echo.emplace_back(c.field, field_value(rec, c.field));
    }
    return d;
  }
  const Rule& def = rs.default_rule();
  return Diagnosis{def.disease, def.reason, def.suggestion, def.priority, {}};
}

}  // namespace aquagauge::rules
