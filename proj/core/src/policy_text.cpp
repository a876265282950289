#include <algorithm>
#include <cctype>
#include <regex>
#include <set>
#include <utility>

#include "secaudit/compliance.hpp"
#include "secaudit/errors.hpp"

namespace secaudit {
namespace {

std::string trim_copy(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

// Strips ASCII and typographic quotes so "'14 or more character(s)'" reads as
// plain prose.
std::string strip_quotes(std::string s) {
  static const std::string kTypographic[] = {"\xE2\x80\x98", "\xE2\x80\x99", "\xE2\x80\x9C", "\xE2\x80\x9D"};
  for (const auto& q : kTypographic) {
    for (auto pos = s.find(q); pos != std::string::npos; pos = s.find(q, pos)) s.erase(pos, q.size());
  }
  s.erase(std::remove_if(s.begin(), s.end(), [](char c) { return c == '\'' || c == '"' || c == '`'; }), s.end());
  return s;
}

std::optional<std::uint32_t> to_threshold(const std::string& digits) {
  if (digits.empty() || digits.size() > 9) return std::nullopt;
  return static_cast<std::uint32_t>(std::stoul(digits));
}

const std::regex& canonical_pattern() {
  static const std::regex re(
      R"(^\s*rule\s+([A-Za-z0-9_.\-]+)\s*:\s*([A-Za-z_]+)\s*(<=|>=|==|=)\s*(\d+)\s*(?:scope\s*=\s*([A-Za-z]+))?\s*$)",
      std::regex::icase);
  return re;
}

struct Keyword {
  std::string_view phrase;
  Parameter parameter;
};

// Longer / more specific phrases first.
constexpr Keyword kKeywords[] = {
    {"enforce password history", Parameter::PasswordHistoryLength},
    {"password history", Parameter::PasswordHistoryLength},
    {"maximum password age", Parameter::MaxPasswordAgeDays},
    {"minimum password age", Parameter::MinPasswordAgeDays},
    {"minimum password length", Parameter::MinPasswordLength},
    {"account lockout threshold", Parameter::LockoutThreshold},
    {"lockout threshold", Parameter::LockoutThreshold},
    {"account lockout duration", Parameter::LockoutDurationMinutes},
    {"lockout duration", Parameter::LockoutDurationMinutes},
};

struct ComparatorPattern {
  std::regex re;
  Comparator comparator;
};

const std::vector<ComparatorPattern>& comparator_patterns() {
  static const std::vector<ComparatorPattern> patterns = [] {
    std::vector<ComparatorPattern> p;
    p.push_back({std::regex(R"((\d+)\s+or\s+(?:fewer|less)\b)"), Comparator::AtMost});
    p.push_back({std::regex(R"((\d+)\s+or\s+(?:more|greater)\b)"), Comparator::AtLeast});
    p.push_back({std::regex(R"(at\s+least\s+(\d+))"), Comparator::AtLeast});
    p.push_back({std::regex(R"((?:at\s+most|no\s+more\s+than|not\s+exceed(?:ing)?)\s+(\d+))"), Comparator::AtMost});
    p.push_back({std::regex(R"(within\s+the\s+(?:last|past)\s+(\d+)\s+days?)"), Comparator::AtMost});
    return p;
  }();
  return patterns;
}

const std::regex& account_age_pattern() {
  static const std::regex re(R"(password.*\b(?:changed|last\s+set|rotated)\b.*within\s+the\s+(?:last|past)\s+\d+)");
  return re;
}

std::optional<std::pair<Comparator, std::uint32_t>> match_comparator(const std::string& text) {
  for (const auto& p : comparator_patterns()) {
    std::smatch m;
    if (std::regex_search(text, m, p.re)) {
      if (auto t = to_threshold(m[1].str())) return std::make_pair(p.comparator, *t);
    }
  }
  return std::nullopt;
}

std::optional<PolicyRule> parse_canonical(const std::string& line) {
  std::smatch m;
  if (!std::regex_match(line, m, canonical_pattern())) return std::nullopt;
  auto parameter = parameter_from_string(lower(m[2].str()));
  auto comparator = comparator_from_symbol(m[3].str());
  auto threshold = to_threshold(m[4].str());
  if (!parameter || !comparator || !threshold) return std::nullopt;

  Scope scope = scope_of(*parameter);
  if (m[5].matched) {
    std::string s = lower(m[5].str());
    if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
    auto declared = scope_from_string(s);
    // A scope contradicting the parameter cannot be evaluated.
    if (!declared || *declared != scope) return std::nullopt;
  }

  PolicyRule rule;
  rule.rule_id = m[1].str();
  rule.parameter = *parameter;
  rule.comparator = *comparator;
  rule.threshold = *threshold;
  rule.scope = scope;
  rule.title = std::string(to_string(*parameter)) + " " + std::string(symbol(*comparator)) + " " +
               std::to_string(*threshold);
  return rule;
}

std::optional<PolicyRule> parse_prose(const std::string& line) {
  const std::string text = lower(strip_quotes(line));

  std::optional<Parameter> parameter;
  std::string tail;
  for (const auto& k : kKeywords) {
    if (auto pos = text.find(k.phrase); pos != std::string::npos) {
      parameter = k.parameter;
      tail = text.substr(pos + k.phrase.size());
      break;
    }
  }
  if (!parameter && std::regex_search(text, account_age_pattern())) {
    parameter = Parameter::PasswordLastSetWithinDays;
    tail = text;
  }
  if (!parameter) return std::nullopt;

  auto cmp = match_comparator(tail);
  if (!cmp) return std::nullopt;

  PolicyRule rule;
  rule.parameter = *parameter;
  rule.comparator = cmp->first;
  rule.threshold = cmp->second;
  rule.scope = scope_of(*parameter);
  rule.title = trim_copy(line).substr(0, 160);
  return rule;
}

}  // namespace

PolicySet parse_policy_text(std::string_view text, std::string source_id) {
  PolicySet set;
  set.source_id = std::move(source_id);

  std::set<std::string> ids;
  std::set<std::pair<Parameter, Comparator>> seen;
  const auto accept = [&](PolicyRule rule) {
    if (!seen.emplace(rule.parameter, rule.comparator).second) return;
    if (ids.count(rule.rule_id)) return;
    ids.insert(rule.rule_id);
    set.rules.push_back(std::move(rule));
  };

  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string line(text.substr(pos, eol - pos));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    pos = eol + 1;
  }

  // Pass 1: canonical grammar.
  std::vector<bool> consumed(lines.size(), false);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (auto rule = parse_canonical(lines[i])) {
      consumed[i] = true;
      accept(std::move(*rule));
    }
  }

  // Pass 2: prose patterns.
  std::size_t prose_count = 0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (consumed[i]) continue;
    auto rule = parse_prose(lines[i]);
    if (!rule) continue;
    std::string id;
    do {
      id = "CIS-" + std::to_string(++prose_count);
    } while (ids.count(id));
    rule->rule_id = id;
    accept(std::move(*rule));
  }

  if (set.rules.empty())
    throw Error(ErrorCode::NoRulesExtracted, "no password policy rules found in " + set.source_id);
  return set;
}

}  // namespace secaudit
