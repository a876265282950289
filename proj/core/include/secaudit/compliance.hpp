#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "secaudit/date.hpp"
#include "secaudit/windows_parsers.hpp"

namespace secaudit {

enum class Parameter {
  MaxPasswordAgeDays,
  MinPasswordAgeDays,
  MinPasswordLength,
  PasswordHistoryLength,
  LockoutThreshold,
  LockoutDurationMinutes,
  PasswordLastSetWithinDays,
};

enum class Comparator { AtMost, AtLeast, Equals };

enum class Scope { Account, Machine };

enum class Compliance { Compliant, NonCompliant };

std::string_view to_string(Parameter p);  // snake_case, e.g. "max_password_age_days"
std::string_view to_string(Comparator c);  // "AtMost"
std::string_view to_string(Scope s);
std::string_view to_string(Compliance c);  // "Compliant" / "NonCompliant"
std::string_view symbol(Comparator c);     // "<=", ">=", "=="

std::optional<Parameter> parameter_from_string(std::string_view name);
std::optional<Comparator> comparator_from_symbol(std::string_view sym);
std::optional<Comparator> comparator_from_string(std::string_view name);
std::optional<Scope> scope_from_string(std::string_view name);
std::optional<Compliance> compliance_from_string(std::string_view name);

/// The scope a parameter is evaluated against. Only the password-age check
/// is per account.
Scope scope_of(Parameter p);

struct PolicyRule {
  std::string rule_id;
  std::string title;
  Parameter parameter = Parameter::MaxPasswordAgeDays;
  Comparator comparator = Comparator::AtMost;
  std::uint32_t threshold = 0;
  Scope scope = Scope::Machine;

  bool operator==(const PolicyRule&) const = default;
};

struct PolicySet {
  std::string source_id;
  std::vector<PolicyRule> rules;

  bool operator==(const PolicySet&) const = default;
};

struct Verdict {
  std::string rule_id;
  std::string observed;
  std::string expected;
  bool compliant = true;
  std::optional<std::string> gap;

  bool operator==(const Verdict&) const = default;
};

inline constexpr int kReportSchemaVersion = 1;

struct ComplianceReport {
  std::string subject;
  Date audit_date{};
  std::vector<Verdict> verdicts;
  Compliance overall = Compliance::Compliant;
  std::string task_query;

  std::size_t gap_count() const;
  bool operator==(const ComplianceReport&) const = default;
};

/// Observed value with unbounded semantics: nullopt compares greater than
/// every threshold.
using Observed = std::optional<std::uint64_t>;

bool satisfies(Observed observed, Comparator comparator, std::uint32_t threshold);

/// Evaluates every Account-scope rule. Password age is measured in whole
/// calendar days and the bound is inclusive. Throws Error(FutureDate) when the
/// password was set after audit_date.
ComplianceReport evaluate_account(const AccountInfo& account, const PolicySet& rules,
                                  Date audit_date);

/// Evaluates every Machine-scope rule. "Unlimited" maximum age and "Never"
/// lockout threshold compare as +infinity; a "None" history counts as zero
/// remembered passwords. Throws Error(UnknownParameter) for a Machine-scope
/// rule whose parameter has no settings field.
ComplianceReport evaluate_machine(const MachinePasswordSettings& settings, const PolicySet& rules,
                                  Date audit_date = today());

/// Extracts rules from policy text.
///
/// Canonical lines are parsed exactly:
///
///   rule <id>: <parameter> <= | >= | == <integer> [scope=Account|Machine]
///
/// Every other line is matched against the prose pattern table (see
/// README.md). Rules repeating an earlier (parameter, comparator)
/// pair are dropped. Throws Error(NoRulesExtracted) if nothing matched.
PolicySet parse_policy_text(std::string_view text, std::string source_id);

/// Human-readable rule list, as shown to the agent by the policy reader tool.
std::string render_policy(const PolicySet& policy);

}  // namespace secaudit
