#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "secaudit/compliance.hpp"
#include "secaudit/date.hpp"
#include "secaudit/errors.hpp"

namespace secaudit {

struct ToolResult {
  std::string output;
  bool is_error = false;
  std::optional<ErrorCode> error_code;

  static ToolResult ok(std::string output);
  static ToolResult error(ErrorCode code, std::string output);
};

using ToolHandler = std::function<ToolResult(std::string_view input)>;

struct ToolSpec {
  std::string name;
  std::string description;
  ToolHandler handler;
};

/// Name-keyed tool table. Built once, then shared read-only.
class ToolRegistry {
 public:
  /// Throws Error(DuplicateToolName) for a repeated name and
  /// Error(InvalidArgument) for an empty/whitespace name, empty description
  /// or missing handler.
  void register_tool(ToolSpec spec);

  const ToolSpec* find(std::string_view name) const;

  /// Runs the named tool. Unknown names and handler exceptions come back as
  /// error results; the unknown-tool message lists the valid names.
  ToolResult dispatch(std::string_view name, std::string_view input) const;

  std::vector<std::string> names() const;
  std::string render_descriptions() const;
  bool empty() const { return tools_.empty(); }
  std::size_t size() const { return tools_.size(); }

 private:
  std::vector<ToolSpec> tools_;
};

// Names the tools are exposed under.
inline constexpr std::string_view kShellToolName = "WindowsTask";
inline constexpr std::string_view kPolicyToolName = "PolicyReader";
inline constexpr std::string_view kClockToolName = "CurrentDate";
inline constexpr std::string_view kReportToolName = "SendReport";

/// Reads a text policy document. Throws Error(FileNotFound) or
/// Error(NoRulesExtracted).
PolicySet read_policy_document(const std::filesystem::path& path);

/// ISO-8601 date: the override if given, else the host date.
std::string clock_now(std::optional<Date> fixed_override);

class ReportSink;
struct ShellPolicy;

/// Parses the SendReport tool input:
///
///   <subject>: COMPLIANT
///   <subject>: NON-COMPLIANT - <gap>; <gap>; ...
///
/// Each gap becomes a non-compliant verdict. Throws Error(InvalidArgument).
ComplianceReport parse_report_request(std::string_view input, Date audit_date,
                                      std::string task_query);

struct AuditToolConfig {
  std::shared_ptr<const ShellPolicy> shell;
  std::filesystem::path policy_path;
  std::optional<Date> clock_override;
  std::shared_ptr<ReportSink> sink;
  std::string task_query;
};

/// Registers WindowsTask, PolicyReader, CurrentDate and SendReport.
ToolRegistry make_audit_tools(const AuditToolConfig& config);

}  // namespace secaudit
