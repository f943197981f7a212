#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "aquagauge/error.hpp"
#include "aquagauge/wqi.hpp"

namespace aquagauge::rules {

enum class RuleErrorKind { syntax_error, duplicate_priority, unknown_field };

class RuleError : public KindedError<RuleErrorKind> {
 public:
  RuleError(RuleErrorKind kind, std::size_t line, const std::string& what)
      : KindedError(kind, what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

enum class Field { wqi, nph, ndo, nbdo, nec, nna, nco, ph, dissolved_oxygen, bod, ec, na, tc };

std::string_view field_name(Field f);
std::optional<Field> parse_field(std::string_view name);
double field_value(const wqi::WqiRecord& rec, Field f);

enum class Op { less, less_equal, greater, greater_equal, between };

struct Condition {
  Field field = Field::wqi;
  Op op = Op::less;
  double value = 0.0;
  double upper = 0.0;  // only for between (closed range)

  bool holds(const wqi::WqiRecord& rec) const;
};

struct Rule {
  int priority = 0;
  std::string disease;
  std::string reason;
  std::string suggestion;
  std::vector<Condition> conditions;
};

inline constexpr int kDefaultRulePriority = std::numeric_limits<int>::min();

// Rules in descending priority, plus the fallback "No Disease" rule.
class RuleSet {
 public:
  RuleSet();
  // Throws RuleError(duplicate_priority).
  explicit RuleSet(std::vector<Rule> rules);

  const std::vector<Rule>& rules() const noexcept { return rules_; }
  const Rule& default_rule() const noexcept { return default_rule_; }

 private:
  std::vector<Rule> rules_;
  Rule default_rule_;
};

struct Diagnosis {
  std::string disease;
  std::string reason;
  std::string suggestion;
  int matched_rule_priority = kDefaultRulePriority;
  std::vector<std::pair<Field, double>> inputs_echo;

  friend bool operator==(const Diagnosis&, const Diagnosis&) = default;
};

// Format, one rule per line, "#" starts a comment:
//   rule <priority> "<disease>" reason "<text>" suggest "<text>"
//       when <field> <op> <value> [and <field> <op> <value>]...
// op is one of < <= > >= (or ≤ ≥), or "between <lo> <hi>".
RuleSet load_rules(std::string_view text);

// Contents of data/default.rules, compiled in.
const std::string& default_rules_text();
RuleSet default_ruleset();

// The first rule, by descending priority, whose conditions all hold.
Diagnosis diagnose(const wqi::WqiRecord& rec, const RuleSet& rs);

}  // namespace aquagauge::rules
