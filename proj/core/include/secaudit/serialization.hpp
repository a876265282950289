#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "secaudit/agent.hpp"
#include "secaudit/compliance.hpp"

namespace secaudit {

/// {schema_version, subject, audit_date, overall, task_query, verdicts[]}
std::string report_to_json(const ComplianceReport& report, int indent = 2);
ComplianceReport report_from_json(std::string_view json_text);

/// {task_query, output, status, steps[], ...}. `output` is the final answer
/// or null.
std::string transcript_to_json(const Transcript& transcript, int indent = 2);

/// Human-readable log with `--- step N ---` delimiters.
std::string transcript_to_text(const Transcript& transcript);

/// Fixture map file: JSON object of command -> canned output.
std::map<std::string, std::string> load_fixture_map(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace secaudit
