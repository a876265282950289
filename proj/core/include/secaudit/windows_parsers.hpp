#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "secaudit/date.hpp"

namespace secaudit {

/// `net user` prints "Never" in several date fields.
struct Never {
  bool operator==(const Never&) const = default;
};

using DateOrNever = std::variant<Never, Date>;

struct AccountInfo {
  std::string username;
  std::optional<Date> password_last_set;
  std::optional<DateOrNever> password_expires;
  std::optional<Date> password_changeable;
  bool password_required = false;
  bool account_active = false;
  std::optional<DateOrNever> last_logon;

  bool operator==(const AccountInfo&) const = default;
};

/// A count that Windows may report as "Unlimited" or "Never"; nullopt is the
/// unbounded variant.
struct Limit {
  std::optional<std::uint32_t> value;

  static Limit unbounded() { return Limit{}; }
  static Limit of(std::uint32_t v) { return Limit{v}; }
  bool is_unbounded() const { return !value.has_value(); }

  bool operator==(const Limit&) const = default;
};

struct MachinePasswordSettings {
  std::uint32_t min_password_age_days = 0;
  Limit max_password_age_days;  // unbounded == "Unlimited"
  std::uint32_t min_password_length = 0;
  std::optional<std::uint32_t> password_history_length;  // nullopt == "None"
  Limit lockout_threshold;  // unbounded == "Never"
  std::uint32_t lockout_duration_minutes = 0;
  std::uint32_t lockout_window_minutes = 0;

  bool operator==(const MachinePasswordSettings&) const = default;
};

/// Parses `net user <name>` output. Labels are matched case-insensitively;
/// unrecognized lines are ignored. Throws Error(MissingUserName) or
/// Error(UnparseableDate).
AccountInfo parse_net_user(std::string_view text, const DateFormat& format = {});

/// Parses `net accounts` output. All seven password/lockout labels are
/// required; throws Error(MissingField) naming the first absent one.
MachinePasswordSettings parse_net_accounts(std::string_view text);

// Renderers produce the label/value layout the parsers accept.
std::string render_net_user(const AccountInfo& info, const DateFormat& format = {});
std::string render_net_accounts(const MachinePasswordSettings& settings);

}  // namespace secaudit
