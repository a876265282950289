#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "secaudit/report_sink.hpp"
#include "secaudit/shell.hpp"
#include "secaudit/tools.hpp"
#include "support.hpp"

using namespace secaudit;
namespace ts = testsupport;

namespace {

AuditToolConfig fixture_config(std::shared_ptr<MemoryReportSink> sink) {
  auto shell = std::make_shared<ShellPolicy>();
  shell->fixture_map = {
      {"net user Patrick", ts::slurp(ts::fixtures_dir() / "net_user_Patrick.txt")},
      {"net accounts", ts::slurp(ts::fixtures_dir() / "net_accounts_after.txt")},
  };
  AuditToolConfig cfg;
  cfg.shell = shell;
  cfg.policy_path = ts::fixtures_dir() / "cis_password_policy.txt";
  cfg.clock_override = make_date(2024, 12, 1);
  cfg.sink = std::move(sink);
  cfg.task_query = "audit";
  return cfg;
}

}  // namespace

TEST_CASE("registry rejects duplicates and invalid specs") {
  ToolRegistry reg;
  auto handler = [](std::string_view) { return ToolResult::ok("x"); };
  reg.register_tool({"A", "does a", handler});
  try {
    reg.register_tool({"A", "again", handler});
    FAIL("expected DuplicateToolName");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DuplicateToolName);
  }
  CHECK_THROWS_AS(reg.register_tool({"  ", "blank", handler}), Error);
  CHECK_THROWS_AS(reg.register_tool({"B", "", handler}), Error);
  CHECK_THROWS_AS(reg.register_tool({"C", "no handler", nullptr}), Error);
  CHECK(reg.size() == 1);
  CHECK(reg.find("A") != nullptr);
  CHECK(reg.find("a") == nullptr);
}

TEST_CASE("dispatch turns handler exceptions into error results") {
  ToolRegistry reg;
  reg.register_tool({"Throws", "boom", [](std::string_view) -> ToolResult {
                       throw Error(ErrorCode::FileNotFound, "gone");
                     }});
  const auto r = reg.dispatch("Throws", "");
  CHECK(r.is_error);
  CHECK(r.error_code == ErrorCode::FileNotFound);
  const auto unknown = reg.dispatch("Missing", "");
  CHECK(unknown.is_error);
  CHECK(unknown.error_code == ErrorCode::UnknownTool);
  CHECK(unknown.output.find("Throws") != std::string::npos);
}

TEST_CASE("audit tools expose the four tools") {
  auto sink = std::make_shared<MemoryReportSink>();
  const auto tools = make_audit_tools(fixture_config(sink));
  CHECK(tools.names() == std::vector<std::string>{"WindowsTask", "PolicyReader", "CurrentDate", "SendReport"});

  const auto user = tools.dispatch("WindowsTask", "net user Patrick");
  CHECK_FALSE(user.is_error);
  CHECK(user.output.find("17/11/2024") != std::string::npos);

  const auto bad = tools.dispatch("WindowsTask", "net user Patrick /delete");
  CHECK(bad.error_code == ErrorCode::DisallowedCommand);

  CHECK(tools.dispatch("CurrentDate", "").output == "2024-12-01");

  const auto policy = tools.dispatch("PolicyReader", "");
  CHECK_FALSE(policy.is_error);
  CHECK(policy.output.find("max_password_age_days <= 90") != std::string::npos);

  const auto sent = tools.dispatch("SendReport", "machine: NON-COMPLIANT - history too short; no lockout");
  CHECK_FALSE(sent.is_error);
  CHECK(sent.output.rfind("Report delivered via memory sink", 0) == 0);
  const auto delivered = sink->reports();
  REQUIRE(delivered.size() == 1);
  const auto& report = delivered.front();
  CHECK(report.overall == Compliance::NonCompliant);
  CHECK(report.gap_count() == 2);
  CHECK(report.audit_date == make_date(2024, 12, 1));

  CHECK(tools.dispatch("SendReport", "no colon here").is_error);
}

TEST_CASE("missing policy file surfaces FileNotFound") {
  auto cfg = fixture_config(std::make_shared<MemoryReportSink>());
  cfg.policy_path = "/nonexistent/policy.txt";
  const auto r = make_audit_tools(cfg).dispatch("PolicyReader", "");
  CHECK(r.error_code == ErrorCode::FileNotFound);
}

TEST_CASE("report requests parse both verdict forms") {
  const auto ok = parse_report_request("Patrick: COMPLIANT", make_date(2024, 12, 1), "q");
  CHECK(ok.subject == "Patrick");
  CHECK(ok.overall == Compliance::Compliant);
  CHECK(ok.verdicts.empty());
  const auto bad = parse_report_request("Penny: NON-COMPLIANT - password is 1991 days old", make_date(2024, 12, 1), "q");
  CHECK(bad.overall == Compliance::NonCompliant);
  REQUIRE(bad.verdicts.size() == 1);
  CHECK(bad.verdicts[0].gap == "password is 1991 days old");
  CHECK_THROWS_AS(parse_report_request(": COMPLIANT", make_date(2024, 12, 1), "q"), Error);
  CHECK_THROWS_AS(parse_report_request("x: maybe", make_date(2024, 12, 1), "q"), Error);
}

TEST_CASE("clock_now prefers the override") {
  CHECK(clock_now(make_date(2024, 12, 1)) == "2024-12-01");
  CHECK(clock_now(std::nullopt) == to_iso(today()));
}
