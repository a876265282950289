#include "secaudit/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <future>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "secaudit/errors.hpp"
#include "secaudit/report_sink.hpp"
#include "secaudit/serialization.hpp"

namespace secaudit {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool contains_any(const std::string& haystack, std::initializer_list<std::string_view> needles) {
  return std::any_of(needles.begin(), needles.end(),
                     [&](std::string_view n) { return haystack.find(n) != std::string::npos; });
}

bool is_machine_subject(std::string_view subject) { return lower(subject) == "machine"; }

std::string yes_no(bool b) { return b ? "Yes" : "No"; }

std::string status_label(ReportedCompliance c) {
  switch (c) {
    case ReportedCompliance::Compliant: return "Compliant";
    case ReportedCompliance::NonCompliant: return "Non-Compliant";
    case ReportedCompliance::Indeterminate: return "Indeterminate";
  }
  return "Indeterminate";
}

ReportedCompliance as_reported(Compliance c) {
  return c == Compliance::Compliant ? ReportedCompliance::Compliant : ReportedCompliance::NonCompliant;
}

bool first_call_targets_scope(const Transcript& t, Scope scope) {
  if (t.steps.empty()) return false;
  const AgentStep& first = t.steps.front();
  if (first.action_name == kPolicyToolName) return true;
  if (first.action_name != kShellToolName) return false;
  const std::string cmd = normalize_command(first.action_input);
  const std::string_view probe = scope == Scope::Account ? "net user" : "net accounts";
  return lower(cmd).rfind(probe, 0) == 0;
}

}  // namespace

std::string_view to_string(ReportedCompliance c) {
  switch (c) {
    case ReportedCompliance::Compliant: return "Compliant";
    case ReportedCompliance::NonCompliant: return "NonCompliant";
    case ReportedCompliance::Indeterminate: return "Indeterminate";
  }
  return "Indeterminate";
}

std::string_view to_string(TaskResult r) { return r == TaskResult::Pass ? "Pass" : "Fail"; }

Scope ScenarioSpec::scope() const { return is_machine_subject(subject) ? Scope::Machine : Scope::Account; }

ReportedCompliance classify_final_answer(std::string_view answer) {
  const std::string text = lower(answer);
  if (contains_any(text, {"not compl", "non-compliant", "does not comply", "fail", "violat"}))
    return ReportedCompliance::NonCompliant;
  if (contains_any(text, {"compliant", "complies", "comply", "within the past", "pass"}))
    return ReportedCompliance::Compliant;
  return ReportedCompliance::Indeterminate;
}

bool contains_date_hedge(std::string_view answer) {
  std::string text = lower(answer);
  for (auto pos = text.find("\xE2\x80\x99"); pos != std::string::npos; pos = text.find("\xE2\x80\x99", pos))
    text.replace(pos, 3, "'");
  return contains_any(text, {"if today's date", "if the current date", "if todays date"});
}

ScenarioSpec load_scenario(const fs::path& scenario_dir) {
  const fs::path spec_path = scenario_dir / "spec.json";
  json j = json::parse(read_text_file(spec_path), nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw Error(ErrorCode::InvalidArgument, spec_path.string() + " is not a JSON object");

  const auto str = [&](const json& obj, const char* key) -> std::string {
    if (!obj.contains(key) || !obj[key].is_string())
      throw Error(ErrorCode::InvalidArgument, spec_path.string() + ": missing string '" + key + "'");
    return obj[key].get<std::string>();
  };

  ScenarioSpec spec;
  spec.id = str(j, "id");
  spec.prompt = str(j, "prompt");
  spec.subject = str(j, "subject");
  spec.note = j.value("note", "");
  spec.script_path = scenario_dir / j.value("script", "script.json");
  auto expected = compliance_from_string(str(j, "expected_compliance"));
  if (!expected) throw Error(ErrorCode::InvalidArgument, spec_path.string() + ": bad expected_compliance");
  spec.expected_compliance = *expected;

  if (!j.contains("fixture_set") || !j["fixture_set"].is_object())
    throw Error(ErrorCode::InvalidArgument, spec_path.string() + ": missing fixture_set");
  const json& f = j["fixture_set"];
  if (f.contains("net_user")) spec.fixtures.net_users = f["net_user"].get<std::vector<std::string>>();
  spec.fixtures.net_accounts_state = f.value("net_accounts", "");
  spec.fixtures.policy_file = str(f, "policy");
  auto clock = parse_iso(str(f, "clock"));
  if (!clock) throw Error(ErrorCode::InvalidArgument, spec_path.string() + ": clock must be YYYY-MM-DD");
  spec.fixtures.clock = *clock;
  return spec;
}

std::vector<ScenarioSpec> load_scenarios(const fs::path& scenarios_dir) {
  std::error_code ec;
  if (!fs::is_directory(scenarios_dir, ec))
    throw Error(ErrorCode::FixtureMissing, "scenario directory not found: " + scenarios_dir.string());
  std::vector<ScenarioSpec> specs;
  for (const auto& entry : fs::directory_iterator(scenarios_dir)) {
    if (entry.is_directory() && fs::exists(entry.path() / "spec.json")) specs.push_back(load_scenario(entry.path()));
  }
  std::sort(specs.begin(), specs.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  return specs;
}

ShellPolicy fixture_shell_policy(const fs::path& fixtures_dir, const FixtureSet& fixtures) {
  ShellPolicy policy;
  policy.mode = ShellMode::Fixture;
  const auto load = [&](const std::string& file) {
    const fs::path p = fixtures_dir / file;
    std::error_code ec;
    if (!fs::is_regular_file(p, ec)) throw Error(ErrorCode::FixtureMissing, p.string());
    return read_text_file(p);
  };
  for (const auto& user : fixtures.net_users) policy.fixture_map["net user " + user] = load("net_user_" + user + ".txt");
  if (!fixtures.net_accounts_state.empty())
    policy.fixture_map["net accounts"] = load("net_accounts_" + fixtures.net_accounts_state + ".txt");
  if (std::error_code ec; fs::is_regular_file(fixtures_dir / "net_user.txt", ec))
    policy.fixture_map["net user"] = read_text_file(fixtures_dir / "net_user.txt");
  if (policy.fixture_map.empty()) throw Error(ErrorCode::FixtureMissing, "fixture bundle is empty");
  return policy;
}

ShellPolicy fixture_shell_policy_from_dir(const fs::path& fixtures_dir, std::string_view net_accounts_state) {
  std::error_code ec;
  if (!fs::is_directory(fixtures_dir, ec))
    throw Error(ErrorCode::FixtureMissing, "fixtures directory not found: " + fixtures_dir.string());
  ShellPolicy policy;
  policy.mode = ShellMode::Fixture;
  const std::string prefix = "net_user_";
  for (const auto& entry : fs::directory_iterator(fixtures_dir)) {
    const std::string name = entry.path().filename().string();
    if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
    if (name.rfind(prefix, 0) == 0) {
      const std::string user = name.substr(prefix.size(), name.size() - prefix.size() - 4);
      policy.fixture_map["net user " + user] = read_text_file(entry.path());
    }
  }
  if (fs::is_regular_file(fixtures_dir / "net_user.txt", ec))
    policy.fixture_map["net user"] = read_text_file(fixtures_dir / "net_user.txt");
  const fs::path accounts = fixtures_dir / ("net_accounts_" + std::string(net_accounts_state) + ".txt");
  if (fs::is_regular_file(accounts, ec)) policy.fixture_map["net accounts"] = read_text_file(accounts);
  if (policy.fixture_map.empty())
    throw Error(ErrorCode::FixtureMissing, "no net_user_*.txt / net_accounts_*.txt in " + fixtures_dir.string());
  return policy;
}

ComplianceReport check_subject(std::string_view subject, const ShellPolicy& shell, const PolicySet& policy,
                               Date audit_date, std::string task_query) {
  const bool machine = is_machine_subject(subject);
  const std::string command = machine ? "net accounts" : "net user " + std::string(subject);
  ToolResult probe = shell_execute(command, shell);
  if (probe.is_error) {
    const ErrorCode code = probe.error_code.value_or(ErrorCode::InvalidArgument);
    if (code == ErrorCode::FixtureMiss) throw Error(ErrorCode::FixtureMissing, "no fixture for '" + command + "'");
    if (code == ErrorCode::DisallowedCommand)
      throw Error(ErrorCode::InvalidArgument, "subject '" + std::string(subject) + "' is not a permitted account name");
    throw Error(code, probe.output);
  }

  ComplianceReport report = machine ? evaluate_machine(parse_net_accounts(probe.output), policy, audit_date)
                                    : evaluate_account(parse_net_user(probe.output), policy, audit_date);
  report.task_query = std::move(task_query);
  return report;
}

ScenarioResult run_scenario(const ScenarioSpec& spec, RunMode mode, const HarnessContext& ctx) {
  auto shell = std::make_shared<ShellPolicy>(fixture_shell_policy(ctx.fixtures_dir, spec.fixtures));
  shell->timeout_seconds = std::min(shell->timeout_seconds, ctx.limits.per_tool_timeout_seconds);

  const fs::path policy_path = ctx.fixtures_dir / spec.fixtures.policy_file;
  if (std::error_code ec; !fs::is_regular_file(policy_path, ec))
    throw Error(ErrorCode::FixtureMissing, policy_path.string());

  ScenarioResult result;
  result.scenario_id = spec.id;

  // Ground truth first; it never touches a backend.
  const PolicySet policy = read_policy_document(policy_path);
  result.oracle_compliance = check_subject(spec.subject, *shell, policy, spec.fixtures.clock, spec.prompt).overall;

  std::unique_ptr<CompletionBackend> backend;
  if (mode == RunMode::Scripted) {
    const fs::path script = ctx.script_override.value_or(spec.script_path);
    if (std::error_code ec; !fs::is_regular_file(script, ec))
      throw Error(ErrorCode::ScriptMissing, script.string());
    backend = std::make_unique<ScriptedSession>(std::make_shared<const Script>(load_script(script)));
  } else {
    if (!ctx.live_backend) throw Error(ErrorCode::InvalidArgument, "live mode needs a backend factory");
    backend = ctx.live_backend();
  }

  std::shared_ptr<ReportSink> sink = ctx.sink ? ctx.sink : std::make_shared<MemoryReportSink>();
  const ToolRegistry tools = make_audit_tools(AuditToolConfig{shell, policy_path, spec.fixtures.clock, sink, spec.prompt});
  const PromptTemplate tmpl = PromptTemplate::for_tools(tools);

  result.transcript = run_agent(spec.prompt, tools, *backend, tmpl, ctx.limits);

  const Transcript& t = result.transcript;
  result.interpreted_task = first_call_targets_scope(t, spec.scope());
  result.executed_independently = t.status == RunStatus::Completed;
  result.reported_compliance =
      t.final_answer ? classify_final_answer(*t.final_answer) : ReportedCompliance::Indeterminate;
  result.hedged = t.final_answer && contains_date_hedge(*t.final_answer);
  result.task_result = result.executed_independently &&
                               result.reported_compliance == as_reported(*result.oracle_compliance)
                           ? TaskResult::Pass
                           : TaskResult::Fail;
  if (t.status != RunStatus::Completed) result.note = std::string(to_string(t.status)) + ": " + t.diagnostic;
  return result;
}

std::size_t ScenarioMatrix::pass_count() const {
  return static_cast<std::size_t>(
      std::count_if(rows.begin(), rows.end(), [](const auto& r) { return r.task_result == TaskResult::Pass; }));
}

bool ScenarioMatrix::matches_reference() const {
  if (rows.size() != specs.size()) return false;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (!r.interpreted_task || !r.executed_independently || r.task_result != TaskResult::Pass ||
        r.reported_compliance != as_reported(specs[i].expected_compliance))
      return false;
  }
  return true;
}

int ScenarioMatrix::exit_code() const {
  if (mode == RunMode::Live) return 0;
  return matches_reference() ? 0 : 1;
}

ScenarioMatrix run_all(const std::vector<ScenarioSpec>& specs, RunMode mode, const HarnessContext& ctx) {
  ScenarioMatrix matrix;
  matrix.mode = mode;
  matrix.specs = specs;
  std::sort(matrix.specs.begin(), matrix.specs.end(), [](const auto& a, const auto& b) { return a.id < b.id; });

  std::vector<std::future<ScenarioResult>> pending;
  pending.reserve(matrix.specs.size());
  for (const auto& spec : matrix.specs) {
    pending.push_back(std::async(std::launch::async, [&spec, mode, &ctx] {
      try {
        return run_scenario(spec, mode, ctx);
      } catch (const std::exception& e) {
        ScenarioResult failed;
        failed.scenario_id = spec.id;
        failed.note = e.what();
        failed.transcript.task_query = spec.prompt;
        return failed;
      }
    }));
  }
  for (auto& f : pending) matrix.rows.push_back(f.get());
  return matrix;
}

std::string render_matrix_text(const ScenarioMatrix& matrix) {
  std::ostringstream out;
  const auto row = [&](const std::string& a, const std::string& b, const std::string& c, const std::string& d,
                       const std::string& e) {
    out << std::left << std::setw(13) << a << std::setw(22) << b << std::setw(28) << c << std::setw(19) << d << e
        << "\n";
  };
  row("Scenario", "Interpret Audit Task", "Execute Task Independently", "Compliance Status", "Task Result Evaluation");
  for (const auto& r : matrix.rows) {
    row("Scenario " + r.scenario_id, yes_no(r.interpreted_task), yes_no(r.executed_independently),
        status_label(r.reported_compliance), std::string(to_string(r.task_result)));
  }
  out << "\n" << matrix.pass_count() << "/" << matrix.rows.size() << " Pass ("
      << (matrix.mode == RunMode::Scripted ? "scripted" : "live, advisory") << ")";
  if (matrix.mode == RunMode::Scripted) out << "; reference matrix " << (matrix.matches_reference() ? "reproduced" : "NOT reproduced");
  out << "\n";
  for (const auto& r : matrix.rows) {
    if (!r.note.empty()) out << "  " << r.scenario_id << ": " << r.note << "\n";
    if (r.hedged) out << "  " << r.scenario_id << ": final answer hedges on the current date\n";
  }
  return out.str();
}

std::string render_matrix_json(const ScenarioMatrix& matrix, int indent) {
  json rows = json::array();
  for (const auto& r : matrix.rows) {
    json j{{"scenario", r.scenario_id},
           {"interpret_audit_task", yes_no(r.interpreted_task)},
           {"execute_task_independently", yes_no(r.executed_independently)},
           {"compliance_status", status_label(r.reported_compliance)},
           {"task_result", to_string(r.task_result)},
           {"oracle_compliance", r.oracle_compliance ? json(to_string(*r.oracle_compliance)) : json(nullptr)},
           {"hedged", r.hedged},
           {"status", to_string(r.transcript.status)},
           {"steps", r.transcript.steps.size()}};
    if (!r.note.empty()) j["note"] = r.note;
    rows.push_back(std::move(j));
  }
  return rows.dump(indent);
}

}  // namespace secaudit
