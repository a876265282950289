#include "secaudit/date.hpp"

#include <array>
#include <charconv>
#include <cstdio>
#include <ctime>

namespace secaudit {

using namespace std::chrono;

Date make_date(int y, unsigned m, unsigned d) { return Date{year{y}, month{m}, day{d}}; }

namespace {

std::optional<unsigned> parse_digits(std::string_view s, std::size_t min_len, std::size_t max_len) {
  if (s.size() < min_len || s.size() > max_len) return std::nullopt;
  unsigned v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace

std::optional<Date> parse_date(std::string_view token, const DateFormat& format) {
  std::array<std::string_view, 3> parts;
  std::size_t n = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= token.size(); ++i) {
    if (i == token.size() || token[i] == format.separator) {
      if (n == parts.size()) return std::nullopt;
      parts[n++] = token.substr(start, i - start);
      start = i + 1;
    }
  }
  if (n != 3) return std::nullopt;

  std::string_view ys, ms, ds;
  switch (format.order) {
    case DateOrder::DayMonthYear: ds = parts[0]; ms = parts[1]; ys = parts[2]; break;
    case DateOrder::MonthDayYear: ms = parts[0]; ds = parts[1]; ys = parts[2]; break;
    case DateOrder::YearMonthDay: ys = parts[0]; ms = parts[1]; ds = parts[2]; break;
  }
  auto y = parse_digits(ys, 4, 4);
  auto m = parse_digits(ms, 1, 2);
  auto d = parse_digits(ds, 1, 2);
  if (!y || !m || !d || *y == 0) return std::nullopt;
  Date date = make_date(static_cast<int>(*y), *m, *d);
  if (!date.ok()) return std::nullopt;
  return date;
}

std::string format_date(Date date, const DateFormat& format) {
  const int y = static_cast<int>(date.year());
  const unsigned m = static_cast<unsigned>(date.month());
  const unsigned d = static_cast<unsigned>(date.day());
  const char s = format.separator;
  char buf[32];
  switch (format.order) {
    case DateOrder::DayMonthYear:
      std::snprintf(buf, sizeof buf, "%02u%c%02u%c%04d", d, s, m, s, y);
      break;
    case DateOrder::MonthDayYear:
      std::snprintf(buf, sizeof buf, "%02u%c%02u%c%04d", m, s, d, s, y);
      break;
    case DateOrder::YearMonthDay:
      std::snprintf(buf, sizeof buf, "%04d%c%02u%c%02u", y, s, m, s, d);
      break;
  }
  return buf;
}

std::string to_iso(Date date) {
  return format_date(date, DateFormat{DateOrder::YearMonthDay, '-'});
}

std::optional<Date> parse_iso(std::string_view text) {
  if (text.size() != 10) return std::nullopt;
  return parse_date(text, DateFormat{DateOrder::YearMonthDay, '-'});
}

std::int64_t days_between(Date from, Date to) {
  return (sys_days{to} - sys_days{from}).count();
}

Date add_days(Date date, std::int64_t n) { return Date{sys_days{date} + days{n}}; }

Date today() { return Date{floor<days>(system_clock::now())}; }

std::string to_iso_timestamp(system_clock::time_point tp) {
  const std::time_t t = system_clock::to_time_t(tp);
  std::tm tm{};
#ifdef _WIN32
  gmtime_s(&tm, &t);
#else
  gmtime_r(&t, &tm);
#endif
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace secaudit
