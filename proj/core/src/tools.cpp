#include "secaudit/tools.hpp"

#include <algorithm>
#include <cctype>

#include "secaudit/report_sink.hpp"
#include "secaudit/serialization.hpp"
#include "secaudit/shell.hpp"

namespace secaudit {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool iequals_prefix(std::string_view s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  return std::equal(prefix.begin(), prefix.end(), s.begin(), [](char a, char b) {
    return std::toupper(static_cast<unsigned char>(a)) == std::toupper(static_cast<unsigned char>(b));
  });
}

}  // namespace

ToolResult ToolResult::ok(std::string output) {
  if (output.empty()) output = "(no output)";
  return ToolResult{std::move(output), false, std::nullopt};
}

ToolResult ToolResult::error(ErrorCode code, std::string output) {
  if (output.empty()) output = std::string(to_string(code));
  return ToolResult{std::move(output), true, code};
}

void ToolRegistry::register_tool(ToolSpec spec) {
  if (spec.name.empty() ||
      std::any_of(spec.name.begin(), spec.name.end(), [](unsigned char c) { return std::isspace(c); }))
    throw Error(ErrorCode::InvalidArgument, "tool name must be non-empty and contain no whitespace");
  if (spec.description.empty())
    throw Error(ErrorCode::InvalidArgument, "tool '" + spec.name + "' has an empty description");
  if (!spec.handler) throw Error(ErrorCode::InvalidArgument, "tool '" + spec.name + "' has no handler");
  if (find(spec.name) != nullptr)
    throw Error(ErrorCode::DuplicateToolName, "tool '" + spec.name + "' is already registered");
  tools_.push_back(std::move(spec));
}

const ToolSpec* ToolRegistry::find(std::string_view name) const {
  auto it = std::find_if(tools_.begin(), tools_.end(), [&](const ToolSpec& t) { return t.name == name; });
  return it == tools_.end() ? nullptr : &*it;
}

ToolResult ToolRegistry::dispatch(std::string_view name, std::string_view input) const {
  const ToolSpec* tool = find(name);
  if (tool == nullptr) {
    std::string valid;
    for (const auto& t : tools_) valid += (valid.empty() ? "" : ", ") + t.name;
    return ToolResult::error(ErrorCode::UnknownTool,
                             "UnknownTool: '" + std::string(name) + "' is not a valid tool. Valid tools: [" +
                                 valid + "]");
  }
  try {
    ToolResult r = tool->handler(input);
    if (r.output.empty()) r.output = r.is_error ? "error" : "(no output)";
    return r;
  } catch (const Error& e) {
    return ToolResult::error(e.code(), e.what());
  } catch (const std::exception& e) {
    return ToolResult::error(ErrorCode::InvalidArgument, std::string("tool error: ") + e.what());
  }
}

std::vector<std::string> ToolRegistry::names() const {
  std::vector<std::string> out;
  out.reserve(tools_.size());
  for (const auto& t : tools_) out.push_back(t.name);
  return out;
}

std::string ToolRegistry::render_descriptions() const {
  std::string out;
  for (const auto& t : tools_) {
    if (!out.empty()) out += "\n";
    out += t.name + ": " + t.description;
  }
  return out;
}

PolicySet read_policy_document(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec))
    throw Error(ErrorCode::FileNotFound, "policy document not found: " + path.string());
  return parse_policy_text(read_text_file(path), path.filename().string());
}

std::string clock_now(std::optional<Date> fixed_override) {
  return to_iso(fixed_override ? *fixed_override : today());
}

ComplianceReport parse_report_request(std::string_view input, Date audit_date, std::string task_query) {
  input = trim(input);
  const auto colon = input.find(':');
  if (colon == std::string_view::npos)
    throw Error(ErrorCode::InvalidArgument,
                "expected '<subject>: COMPLIANT' or '<subject>: NON-COMPLIANT - <gap>; <gap>'");
  ComplianceReport report;
  report.subject = std::string(trim(input.substr(0, colon)));
  report.audit_date = audit_date;
  report.task_query = std::move(task_query);
  if (report.subject.empty()) throw Error(ErrorCode::InvalidArgument, "report subject is empty");

  std::string_view rest = trim(input.substr(colon + 1));
  if (iequals_prefix(rest, "NON-COMPLIANT") || iequals_prefix(rest, "NONCOMPLIANT")) {
    rest.remove_prefix(iequals_prefix(rest, "NON-COMPLIANT") ? 13 : 12);
    rest = trim(rest);
    if (!rest.empty() && (rest.front() == '-' || rest.front() == ':')) rest = trim(rest.substr(1));
    std::vector<std::string> gaps;
    while (!rest.empty()) {
      const auto semi = rest.find(';');
      auto gap = trim(rest.substr(0, semi));
      if (!gap.empty()) gaps.emplace_back(gap);
      if (semi == std::string_view::npos) break;
      rest.remove_prefix(semi + 1);
    }
    if (gaps.empty()) gaps.emplace_back("unspecified gap");
    for (std::size_t i = 0; i < gaps.size(); ++i) {
      report.verdicts.push_back(Verdict{"reported-" + std::to_string(i + 1), "reported by agent",
                                        "compliance", false, gaps[i]});
    }
    report.overall = Compliance::NonCompliant;
  } else if (iequals_prefix(rest, "COMPLIANT")) {
    report.overall = Compliance::Compliant;
  } else {
    throw Error(ErrorCode::InvalidArgument, "report status must be COMPLIANT or NON-COMPLIANT");
  }
  return report;
}

ToolRegistry make_audit_tools(const AuditToolConfig& config) {
  if (!config.shell) throw Error(ErrorCode::InvalidArgument, "audit tools need a shell policy");
  if (!config.sink) throw Error(ErrorCode::InvalidArgument, "audit tools need a report sink");

  ToolRegistry registry;

  registry.register_tool(ToolSpec{
      std::string(kShellToolName),
      "Runs a Windows shell command on the audited machine and returns its output. Permitted "
      "commands: 'net user' (list accounts), 'net user <name>' (account details including "
      "\"Password last set\"), 'net accounts' (machine password and lockout policy). "
      "Input: the command text.",
      [shell = config.shell](std::string_view input) { return shell_execute(input, *shell); }});

  registry.register_tool(ToolSpec{
      std::string(kPolicyToolName),
      "Reads the CIS password policy document and returns the baseline rules to audit against. "
      "Input: ignored.",
      [path = config.policy_path](std::string_view) {
        return ToolResult::ok(render_policy(read_policy_document(path)));
      }});

  registry.register_tool(ToolSpec{
      std::string(kClockToolName),
      "Returns today's date in ISO-8601 form (YYYY-MM-DD). Input: ignored.",
      [clock = config.clock_override](std::string_view) { return ToolResult::ok(clock_now(clock)); }});

  registry.register_tool(ToolSpec{
      std::string(kReportToolName),
      "Sends the audit report. Input: '<subject>: COMPLIANT' or "
      "'<subject>: NON-COMPLIANT - <gap>; <gap>; ...'.",
      [sink = config.sink, clock = config.clock_override, task = config.task_query](std::string_view input) {
        ComplianceReport report = parse_report_request(input, clock ? *clock : today(), task);
        DeliveryReceipt receipt = emit_report(report, *sink);
        return ToolResult::ok("Report delivered via " + receipt.sink_id + " sink: " + receipt.location);
      }});

  return registry;
}

}  // namespace secaudit
