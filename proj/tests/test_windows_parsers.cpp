#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "corpus.hpp"
#include "secaudit/errors.hpp"
#include "secaudit/windows_parsers.hpp"

using namespace secaudit;
namespace ts = testsupport;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

std::string replace_all(std::string s, const std::string& from, const std::string& to) {
  for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size()))
    s.replace(pos, from.size(), to);
  return s;
}

}  // namespace

TEST_CASE("shipped net user fixtures parse to the expected records") {
  const auto expected = ts::expected_corpus()["net_user"];
  for (const auto& [file, record] : expected.items()) {
    CAPTURE(file);
    const auto info = parse_net_user(ts::slurp(ts::fixtures_dir() / file));
    CHECK(ts::record_json(info) == record);
  }
}

TEST_CASE("shipped net accounts fixtures parse to the expected records") {
  const auto expected = ts::expected_corpus()["net_accounts"];
  for (const auto& [file, record] : expected.items()) {
    CAPTURE(file);
    CHECK(ts::record_json(parse_net_accounts(ts::slurp(ts::fixtures_dir() / file))) == record);
  }
}

TEST_CASE("Patrick's password was last set on 17/11/2024") {
  const auto info = parse_net_user(ts::slurp(ts::fixtures_dir() / "net_user_Patrick.txt"));
  CHECK(info.password_last_set == make_date(2024, 11, 17));
}

TEST_CASE("parser errors") {
  CHECK(code_of([] { parse_net_user(ts::slurp(ts::test_data_dir() / "net_user_no_name.txt")); }) ==
        ErrorCode::MissingUserName);
  CHECK(code_of([] { parse_net_user(ts::slurp(ts::test_data_dir() / "net_user_bad_date.txt")); }) ==
        ErrorCode::UnparseableDate);
  CHECK(code_of([] { parse_net_user(""); }) == ErrorCode::MissingUserName);
  try {
    parse_net_accounts(ts::slurp(ts::test_data_dir() / "net_accounts_no_threshold.txt"));
    FAIL("expected MissingField");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingField);
    CHECK(std::string(e.what()).find("Lockout threshold") != std::string::npos);
  }
}

TEST_CASE("parsers tolerate CRLF line endings, case and extra spacing") {
  const std::string raw = ts::slurp(ts::fixtures_dir() / "net_user_Patrick.txt");
  const auto base = parse_net_user(raw);
  CHECK(parse_net_user(replace_all(raw, "\n", "\r\n")) == base);
  CHECK(parse_net_user(replace_all(raw, "Password last set", "PASSWORD LAST SET")) == base);
  CHECK(parse_net_user(replace_all(raw, "            ", "   \t   ")) == base);

  const std::string acc = ts::slurp(ts::fixtures_dir() / "net_accounts_after.txt");
  CHECK(parse_net_accounts(replace_all(acc, "\n", "\r\n")) == parse_net_accounts(acc));
}

TEST_CASE("month-first locales parse with an explicit format") {
  const std::string raw = "User name    Jo\nPassword last set    11/17/2024 10:21:45 AM\n";
  CHECK(parse_net_user(raw, DateFormat{DateOrder::MonthDayYear, '/'}).password_last_set ==
        make_date(2024, 11, 17));
  CHECK_THROWS_AS(parse_net_user(raw), Error);
}

TEST_CASE("property: render then parse is the identity") {
  ts::Rng rng(31);
  const auto random_date = [&] { return add_days(make_date(2000, 1, 1), rng.between(0, 12000)); };
  for (int i = 0; i < 500; ++i) {
    AccountInfo a;
    a.username = "user" + std::to_string(i);
    if (rng.coin(0.9)) a.password_last_set = random_date();
    if (rng.coin(0.8)) a.password_expires = rng.coin() ? DateOrNever{Never{}} : DateOrNever{random_date()};
    if (rng.coin(0.8)) a.password_changeable = random_date();
    a.password_required = rng.coin();
    a.account_active = rng.coin();
    if (rng.coin(0.8)) a.last_logon = rng.coin() ? DateOrNever{Never{}} : DateOrNever{random_date()};
    const auto rendered = render_net_user(a);
    CAPTURE(rendered);
    CHECK(parse_net_user(rendered) == a);

    MachinePasswordSettings s;
    s.min_password_age_days = static_cast<std::uint32_t>(rng.between(0, 998));
    s.max_password_age_days = rng.coin(0.2) ? Limit::unbounded() : Limit::of(static_cast<std::uint32_t>(rng.between(1, 999)));
    s.min_password_length = static_cast<std::uint32_t>(rng.between(0, 14));
    if (rng.coin(0.8)) s.password_history_length = static_cast<std::uint32_t>(rng.between(1, 24));
    s.lockout_threshold = rng.coin(0.2) ? Limit::unbounded() : Limit::of(static_cast<std::uint32_t>(rng.between(1, 999)));
    s.lockout_duration_minutes = static_cast<std::uint32_t>(rng.between(0, 99999));
    s.lockout_window_minutes = static_cast<std::uint32_t>(rng.between(1, 99999));
    CHECK(parse_net_accounts(render_net_accounts(s)) == s);
  }
}
