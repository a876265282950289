#include "secaudit/compliance.hpp"

#include <algorithm>
#include <array>

#include "secaudit/errors.hpp"

namespace secaudit {
namespace {

struct ParameterName {
  Parameter parameter;
  std::string_view name;
};

constexpr std::array<ParameterName, 7> kParameterNames{{
    {Parameter::MaxPasswordAgeDays, "max_password_age_days"},
    {Parameter::MinPasswordAgeDays, "min_password_age_days"},
    {Parameter::MinPasswordLength, "min_password_length"},
    {Parameter::PasswordHistoryLength, "password_history_length"},
    {Parameter::LockoutThreshold, "lockout_threshold"},
    {Parameter::LockoutDurationMinutes, "lockout_duration_minutes"},
    {Parameter::PasswordLastSetWithinDays, "password_last_set_within_days"},
}};

std::string expected_text(const PolicyRule& rule) {
  return std::string(symbol(rule.comparator)) + " " + std::to_string(rule.threshold);
}

Verdict make_verdict(const PolicyRule& rule, std::string observed, bool compliant) {
  Verdict v;
  v.rule_id = rule.rule_id;
  v.observed = std::move(observed);
  v.expected = expected_text(rule);
  v.compliant = compliant;
  if (!compliant) {
    v.gap = std::string(to_string(rule.parameter)) + ": observed " + v.observed + ", expected " + v.expected;
    if (!rule.title.empty()) *v.gap += " (" + rule.title + ")";
  }
  return v;
}

Compliance conjunction(const std::vector<Verdict>& verdicts) {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.compliant; })
             ? Compliance::Compliant
             : Compliance::NonCompliant;
}

}  // namespace

std::string_view to_string(Parameter p) {
  for (const auto& n : kParameterNames)
    if (n.parameter == p) return n.name;
  return "unknown";
}

std::string_view to_string(Comparator c) {
  switch (c) {
    case Comparator::AtMost: return "AtMost";
    case Comparator::AtLeast: return "AtLeast";
    case Comparator::Equals: return "Equals";
  }
  return "AtMost";
}

std::string_view to_string(Scope s) { return s == Scope::Account ? "Account" : "Machine"; }

std::string_view to_string(Compliance c) { return c == Compliance::Compliant ? "Compliant" : "NonCompliant"; }

std::string_view symbol(Comparator c) {
  switch (c) {
    case Comparator::AtMost: return "<=";
    case Comparator::AtLeast: return ">=";
    case Comparator::Equals: return "==";
  }
  return "<=";
}

std::optional<Parameter> parameter_from_string(std::string_view name) {
  for (const auto& n : kParameterNames)
    if (n.name == name) return n.parameter;
  return std::nullopt;
}

std::optional<Comparator> comparator_from_symbol(std::string_view sym) {
  if (sym == "<=") return Comparator::AtMost;
  if (sym == ">=") return Comparator::AtLeast;
  if (sym == "==" || sym == "=") return Comparator::Equals;
  return std::nullopt;
}

std::optional<Comparator> comparator_from_string(std::string_view name) {
  if (name == "AtMost") return Comparator::AtMost;
  if (name == "AtLeast") return Comparator::AtLeast;
  if (name == "Equals") return Comparator::Equals;
  return std::nullopt;
}

std::optional<Scope> scope_from_string(std::string_view name) {
  if (name == "Account") return Scope::Account;
  if (name == "Machine") return Scope::Machine;
  return std::nullopt;
}

std::optional<Compliance> compliance_from_string(std::string_view name) {
  if (name == "Compliant") return Compliance::Compliant;
  if (name == "NonCompliant") return Compliance::NonCompliant;
  return std::nullopt;
}

Scope scope_of(Parameter p) {
  return p == Parameter::PasswordLastSetWithinDays ? Scope::Account : Scope::Machine;
}

std::size_t ComplianceReport::gap_count() const {
  return static_cast<std::size_t>(
      std::count_if(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.gap.has_value(); }));
}

bool satisfies(Observed observed, Comparator comparator, std::uint32_t threshold) {
  if (!observed) return comparator == Comparator::AtLeast;
  switch (comparator) {
    case Comparator::AtMost: return *observed <= threshold;
    case Comparator::AtLeast: return *observed >= threshold;
    case Comparator::Equals: return *observed == threshold;
  }
  return false;
}

ComplianceReport evaluate_account(const AccountInfo& account, const PolicySet& rules, Date audit_date) {
  if (account.password_last_set && days_between(*account.password_last_set, audit_date) < 0)
    throw Error(ErrorCode::FutureDate, "password for '" + account.username + "' was last set on " +
                                           to_iso(*account.password_last_set) + ", after the audit date " +
                                           to_iso(audit_date));

  ComplianceReport report;
  report.subject = account.username;
  report.audit_date = audit_date;
  for (const auto& rule : rules.rules) {
    if (rule.scope != Scope::Account) continue;
    if (rule.parameter != Parameter::PasswordLastSetWithinDays)
      throw Error(ErrorCode::UnknownParameter,
                  "rule " + rule.rule_id + ": " + std::string(to_string(rule.parameter)) + " is not an account attribute");
    if (!account.password_last_set) {
      Verdict v = make_verdict(rule, "unavailable", false);
      v.gap = std::string(to_string(rule.parameter)) + ": value unavailable, expected " + v.expected;
      report.verdicts.push_back(std::move(v));
      continue;
    }
    const auto age = static_cast<std::uint64_t>(days_between(*account.password_last_set, audit_date));
    report.verdicts.push_back(make_verdict(
        rule, std::to_string(age) + " days (last set " + to_iso(*account.password_last_set) + ")",
        satisfies(age, rule.comparator, rule.threshold)));
  }
  report.overall = conjunction(report.verdicts);
  return report;
}

ComplianceReport evaluate_machine(const MachinePasswordSettings& settings, const PolicySet& rules, Date audit_date) {
  ComplianceReport report;
  report.subject = "machine";
  report.audit_date = audit_date;
  for (const auto& rule : rules.rules) {
    if (rule.scope != Scope::Machine) continue;
    Observed observed;
    std::string rendered;
    switch (rule.parameter) {
      case Parameter::MaxPasswordAgeDays:
        observed = settings.max_password_age_days.value;
        rendered = observed ? std::to_string(*observed) : "Unlimited";
        break;
      case Parameter::MinPasswordAgeDays:
        observed = settings.min_password_age_days;
        rendered = std::to_string(*observed);
        break;
      case Parameter::MinPasswordLength:
        observed = settings.min_password_length;
        rendered = std::to_string(*observed);
        break;
      case Parameter::PasswordHistoryLength:
        observed = settings.password_history_length.value_or(0);
        rendered = settings.password_history_length ? std::to_string(*observed) : "None";
        break;
      case Parameter::LockoutThreshold:
        observed = settings.lockout_threshold.value;
        rendered = observed ? std::to_string(*observed) : "Never";
        break;
      case Parameter::LockoutDurationMinutes:
        observed = settings.lockout_duration_minutes;
        rendered = std::to_string(*observed);
        break;
      case Parameter::PasswordLastSetWithinDays:
        throw Error(ErrorCode::UnknownParameter,
                    "rule " + rule.rule_id + ": " + std::string(to_string(rule.parameter)) +
                        " has no machine settings field");
    }
    report.verdicts.push_back(make_verdict(rule, rendered, satisfies(observed, rule.comparator, rule.threshold)));
  }
  report.overall = conjunction(report.verdicts);
  return report;
}

std::string render_policy(const PolicySet& policy) {
  std::string out = "Password policy baseline from " + policy.source_id + " (" + std::to_string(policy.rules.size()) +
                    " rules):\n";
  for (const auto& r : policy.rules) {
    out += "- " + r.rule_id + " [" + std::string(to_string(r.scope)) + "] " + std::string(to_string(r.parameter)) +
           " " + std::string(symbol(r.comparator)) + " " + std::to_string(r.threshold);
    if (!r.title.empty()) out += " -- " + r.title;
    out += "\n";
  }
  return out;
}

}  // namespace secaudit
