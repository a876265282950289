#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace secaudit {

using Date = std::chrono::year_month_day;

enum class DateOrder { DayMonthYear, MonthDayYear, YearMonthDay };

/// Locale layout of dates printed by `net user`. Defaults to the day-first
/// form ("17/11/2024").
struct DateFormat {
  DateOrder order = DateOrder::DayMonthYear;
  char separator = '/';
};

Date make_date(int year, unsigned month, unsigned day);

/// Parses a date token such as "17/11/2024". Day and month may be one or two
/// digits, the year must be four. Returns nullopt for malformed or
/// out-of-calendar input.
std::optional<Date> parse_date(std::string_view token, const DateFormat& format);

/// Zero-padded rendering; parse_date(format_date(d, f), f) == d for every
/// valid date in years 1..9999.
std::string format_date(Date date, const DateFormat& format);

std::string to_iso(Date date);
std::optional<Date> parse_iso(std::string_view text);

/// Whole calendar days from `from` to `to` (negative when `to` is earlier).
std::int64_t days_between(Date from, Date to);

Date add_days(Date date, std::int64_t days);

/// Host date in UTC.
Date today();

/// ISO-8601 UTC timestamp, second precision.
std::string to_iso_timestamp(std::chrono::system_clock::time_point tp);

}  // namespace secaudit
