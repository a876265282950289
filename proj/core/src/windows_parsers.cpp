#include "secaudit/windows_parsers.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <map>
#include <vector>

#include "secaudit/errors.hpp"

namespace secaudit {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
         });
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    out.push_back(text.substr(pos, eol - pos));
    pos = eol + 1;
  }
  return out;
}

/// Finds `label` at the start of a trimmed line (case-insensitive) followed by
/// whitespace, a colon, or end of line. Returns the value with any leading
/// colon removed. Labels are matched longest-first by the callers.
std::optional<std::string_view> match_label(std::string_view line, std::string_view label) {
  line = trim(line);
  if (line.size() < label.size() || !iequals(line.substr(0, label.size()), label)) return std::nullopt;
  std::string_view rest = line.substr(label.size());
  if (!rest.empty() && !std::isspace(static_cast<unsigned char>(rest.front())) && rest.front() != ':')
    return std::nullopt;
  rest = trim(rest);
  if (!rest.empty() && rest.front() == ':') rest = trim(rest.substr(1));
  return rest;
}

/// label -> value for the labels of interest; the first occurrence wins.
std::map<std::string, std::string_view> scan(std::string_view text, std::vector<std::string_view> labels) {
  std::sort(labels.begin(), labels.end(), [](auto a, auto b) { return a.size() > b.size(); });
  std::map<std::string, std::string_view> found;
  for (auto line : lines_of(text)) {
    for (auto label : labels) {
      if (auto value = match_label(line, label)) {
        found.try_emplace(std::string(label), *value);
        break;
      }
    }
  }
  return found;
}

std::string_view first_token(std::string_view s) {
  s = trim(s);
  auto end = s.find_first_of(" \t");
  return s.substr(0, end);
}

Date parse_date_field(std::string_view label, std::string_view value, const DateFormat& format) {
  auto token = first_token(value);
  if (auto d = parse_date(token, format)) return *d;
  throw Error(ErrorCode::UnparseableDate,
              std::string(label) + ": '" + std::string(value) + "' does not match the configured date format");
}

std::optional<DateOrNever> parse_date_or_never(std::string_view label, std::string_view value,
                                               const DateFormat& format) {
  if (trim(value).empty()) return std::nullopt;
  if (iequals(first_token(value), "Never")) return DateOrNever{Never{}};
  return DateOrNever{parse_date_field(label, value, format)};
}

std::optional<Date> parse_optional_date(std::string_view label, std::string_view value, const DateFormat& format) {
  if (trim(value).empty() || iequals(first_token(value), "Never")) return std::nullopt;
  return parse_date_field(label, value, format);
}

bool parse_yes_no(std::string_view value) { return iequals(first_token(value), "Yes"); }

std::uint32_t parse_count(std::string_view label, std::string_view value) {
  auto token = first_token(value);
  std::uint32_t v = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (token.empty() || ec != std::errc{} || ptr != token.data() + token.size())
    throw Error(ErrorCode::MissingField, std::string(label) + ": expected a number, got '" + std::string(value) + "'");
  return v;
}

Limit parse_limit(std::string_view label, std::string_view value, std::string_view unbounded_word) {
  if (iequals(first_token(value), unbounded_word)) return Limit::unbounded();
  return Limit::of(parse_count(label, value));
}

constexpr std::string_view kUserName = "User name";
constexpr std::string_view kAccountActive = "Account active";
constexpr std::string_view kPasswordLastSet = "Password last set";
constexpr std::string_view kPasswordExpires = "Password expires";
constexpr std::string_view kPasswordChangeable = "Password changeable";
constexpr std::string_view kPasswordRequired = "Password required";
constexpr std::string_view kLastLogon = "Last logon";

constexpr std::string_view kMinAge = "Minimum password age (days)";
constexpr std::string_view kMaxAge = "Maximum password age (days)";
constexpr std::string_view kMinLength = "Minimum password length";
constexpr std::string_view kHistory = "Length of password history maintained";
constexpr std::string_view kThreshold = "Lockout threshold";
constexpr std::string_view kDuration = "Lockout duration (minutes)";
constexpr std::string_view kWindow = "Lockout observation window (minutes)";

std::string pad(std::string_view label, std::size_t width) {
  std::string out(label);
  out.append(out.size() < width ? width - out.size() : 1, ' ');
  return out;
}

std::string render_date_or_never(const std::optional<DateOrNever>& v, const DateFormat& f) {
  if (!v) return "";
  if (std::holds_alternative<Never>(*v)) return "Never";
  return format_date(std::get<Date>(*v), f);
}

}  // namespace

AccountInfo parse_net_user(std::string_view text, const DateFormat& format) {
  const auto fields = scan(text, {kUserName, kAccountActive, kPasswordLastSet, kPasswordExpires,
                                  kPasswordChangeable, kPasswordRequired, kLastLogon});
  const auto get = [&](std::string_view label) -> std::optional<std::string_view> {
    auto it = fields.find(std::string(label));
    if (it == fields.end()) return std::nullopt;
    return it->second;
  };

  AccountInfo info;
  auto name = get(kUserName);
  if (!name || trim(*name).empty()) throw Error(ErrorCode::MissingUserName, "no 'User name' line in net user output");
  info.username = std::string(first_token(*name));

  if (auto v = get(kAccountActive)) info.account_active = parse_yes_no(*v);
  if (auto v = get(kPasswordRequired)) info.password_required = parse_yes_no(*v);
  if (auto v = get(kPasswordLastSet)) info.password_last_set = parse_optional_date(kPasswordLastSet, *v, format);
  if (auto v = get(kPasswordChangeable))
    info.password_changeable = parse_optional_date(kPasswordChangeable, *v, format);
  if (auto v = get(kPasswordExpires)) info.password_expires = parse_date_or_never(kPasswordExpires, *v, format);
  if (auto v = get(kLastLogon)) info.last_logon = parse_date_or_never(kLastLogon, *v, format);
  return info;
}

MachinePasswordSettings parse_net_accounts(std::string_view text) {
  const auto fields = scan(text, {kMinAge, kMaxAge, kMinLength, kHistory, kThreshold, kDuration, kWindow});
  const auto require = [&](std::string_view label) -> std::string_view {
    auto it = fields.find(std::string(label));
    if (it == fields.end()) throw Error(ErrorCode::MissingField, "'" + std::string(label) + "' not found");
    return it->second;
  };

  MachinePasswordSettings s;
  s.min_password_age_days = parse_count(kMinAge, require(kMinAge));
  s.max_password_age_days = parse_limit(kMaxAge, require(kMaxAge), "Unlimited");
  s.min_password_length = parse_count(kMinLength, require(kMinLength));
  {
    auto v = require(kHistory);
    if (iequals(first_token(v), "None"))
      s.password_history_length = std::nullopt;
    else
      s.password_history_length = parse_count(kHistory, v);
  }
  s.lockout_threshold = parse_limit(kThreshold, require(kThreshold), "Never");
  s.lockout_duration_minutes = parse_count(kDuration, require(kDuration));
  s.lockout_window_minutes = parse_count(kWindow, require(kWindow));
  return s;
}

std::string render_net_user(const AccountInfo& info, const DateFormat& format) {
  constexpr std::size_t w = 29;
  std::string out;
  out += pad(kUserName, w) + info.username + "\n";
  out += pad(kAccountActive, w) + (info.account_active ? "Yes" : "No") + "\n";
  out += "\n";
  out += pad(kPasswordLastSet, w) + (info.password_last_set ? format_date(*info.password_last_set, format) : "Never") + "\n";
  out += pad(kPasswordExpires, w) + render_date_or_never(info.password_expires, format) + "\n";
  out += pad(kPasswordChangeable, w) +
         (info.password_changeable ? format_date(*info.password_changeable, format) : "") + "\n";
  out += pad(kPasswordRequired, w) + (info.password_required ? "Yes" : "No") + "\n";
  out += "\n";
  out += pad(kLastLogon, w) + render_date_or_never(info.last_logon, format) + "\n";
  out += "The command completed successfully.\n";
  return out;
}

std::string render_net_accounts(const MachinePasswordSettings& s) {
  constexpr std::size_t w = 54;
  const auto num = [](std::uint32_t v) { return std::to_string(v); };
  std::string out;
  out += pad("Force user logoff how long after time expires?:", w) + "Never\n";
  out += pad(std::string(kMinAge) + ":", w) + num(s.min_password_age_days) + "\n";
  out += pad(std::string(kMaxAge) + ":", w) +
         (s.max_password_age_days.is_unbounded() ? "Unlimited" : num(*s.max_password_age_days.value)) + "\n";
  out += pad(std::string(kMinLength) + ":", w) + num(s.min_password_length) + "\n";
  out += pad(std::string(kHistory) + ":", w) +
         (s.password_history_length ? num(*s.password_history_length) : "None") + "\n";
  out += pad(std::string(kThreshold) + ":", w) +
         (s.lockout_threshold.is_unbounded() ? "Never" : num(*s.lockout_threshold.value)) + "\n";
  out += pad(std::string(kDuration) + ":", w) + num(s.lockout_duration_minutes) + "\n";
  out += pad(std::string(kWindow) + ":", w) + num(s.lockout_window_minutes) + "\n";
  out += pad("Computer role:", w) + "WORKSTATION\n";
  out += "The command completed successfully.\n";
  return out;
}

}  // namespace secaudit
