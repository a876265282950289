#include "secaudit/serialization.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "secaudit/errors.hpp"

namespace secaudit {

using nlohmann::json;

namespace {

json verdict_to_json(const Verdict& v) {
  json j{{"rule_id", v.rule_id}, {"observed", v.observed}, {"expected", v.expected}, {"compliant", v.compliant}};
  j["gap"] = v.gap ? json(*v.gap) : json(nullptr);
  return j;
}

template <typename T>
T required(const json& j, const char* key) {
  if (!j.contains(key)) throw Error(ErrorCode::InvalidArgument, std::string("missing key '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::InvalidArgument, std::string("key '") + key + "' has the wrong type");
  }
}

}  // namespace

std::string report_to_json(const ComplianceReport& report, int indent) {
  json verdicts = json::array();
  for (const auto& v : report.verdicts) verdicts.push_back(verdict_to_json(v));
  json j{{"schema_version", kReportSchemaVersion},
         {"subject", report.subject},
         {"audit_date", to_iso(report.audit_date)},
         {"overall", to_string(report.overall)},
         {"task_query", report.task_query},
         {"verdicts", std::move(verdicts)}};
  return j.dump(indent);
}

ComplianceReport report_from_json(std::string_view json_text) {
  json j = json::parse(json_text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(ErrorCode::InvalidArgument, "report is not a JSON object");
  const int version = required<int>(j, "schema_version");
  if (version != kReportSchemaVersion)
    throw Error(ErrorCode::InvalidArgument, "unsupported report schema_version " + std::to_string(version));

  ComplianceReport r;
  r.subject = required<std::string>(j, "subject");
  auto date = parse_iso(required<std::string>(j, "audit_date"));
  if (!date) throw Error(ErrorCode::InvalidArgument, "audit_date is not an ISO-8601 date");
  r.audit_date = *date;
  auto overall = compliance_from_string(required<std::string>(j, "overall"));
  if (!overall) throw Error(ErrorCode::InvalidArgument, "overall must be Compliant or NonCompliant");
  r.overall = *overall;
  r.task_query = required<std::string>(j, "task_query");
  for (const auto& vj : required<json>(j, "verdicts")) {
    Verdict v;
    v.rule_id = required<std::string>(vj, "rule_id");
    v.observed = required<std::string>(vj, "observed");
    v.expected = required<std::string>(vj, "expected");
    v.compliant = required<bool>(vj, "compliant");
    if (vj.contains("gap") && !vj["gap"].is_null()) v.gap = required<std::string>(vj, "gap");
    r.verdicts.push_back(std::move(v));
  }
  return r;
}

std::string transcript_to_json(const Transcript& t, int indent) {
  json steps = json::array();
  for (const auto& s : t.steps) {
    steps.push_back({{"index", s.index},
                     {"thought", s.thought ? json(*s.thought) : json(nullptr)},
                     {"action", s.action_name},
                     {"action_input", s.action_input},
                     {"observation", s.observation},
                     {"observation_is_error", s.observation_is_error},
                     {"duration_ms", s.duration_ms}});
  }
  json j{{"task_query", t.task_query},
         {"output", t.final_answer ? json(*t.final_answer) : json(nullptr)},
         {"status", to_string(t.status)},
         {"steps", std::move(steps)},
         {"completions", t.completions},
         {"started_at", to_iso_timestamp(t.started_at)},
         {"ended_at", to_iso_timestamp(t.ended_at)}};
  if (!t.diagnostic.empty()) j["diagnostic"] = t.diagnostic;
  return j.dump(indent);
}

std::string transcript_to_text(const Transcript& t) {
  std::ostringstream out;
  out << "Task: " << t.task_query << "\n";
  for (const auto& s : t.steps) {
    out << "--- step " << s.index + 1 << " ---\n";
    if (s.thought) out << "Thought: " << *s.thought << "\n";
    out << "Action: " << s.action_name << "\n";
    out << "Action Input: " << s.action_input << "\n";
    out << "Observation:" << (s.observation_is_error ? " [error]" : "") << "\n" << s.observation;
    if (s.observation.empty() || s.observation.back() != '\n') out << "\n";
  }
  out << "--- end ---\n";
  out << "Status: " << to_string(t.status) << "\n";
  if (!t.diagnostic.empty()) out << "Diagnostic: " << t.diagnostic << "\n";
  if (t.final_answer) out << "Final Answer: " << *t.final_answer << "\n";
  return out.str();
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileNotFound, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::map<std::string, std::string> load_fixture_map(const std::filesystem::path& path) {
  json j = json::parse(read_text_file(path), nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw Error(ErrorCode::InvalidArgument, path.string() + ": fixture map must be a JSON object");
  std::map<std::string, std::string> out;
  for (const auto& [command, output] : j.items()) {
    if (!output.is_string())
      throw Error(ErrorCode::InvalidArgument, path.string() + ": output for '" + command + "' is not a string");
    out.emplace(command, output.get<std::string>());
  }
  if (out.empty()) throw Error(ErrorCode::InvalidArgument, path.string() + ": fixture map is empty");
  return out;
}

}  // namespace secaudit
