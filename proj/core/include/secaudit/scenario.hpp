#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "secaudit/agent.hpp"
#include "secaudit/compliance.hpp"
#include "secaudit/shell.hpp"

namespace secaudit {

class ReportSink;

/// Fixture bundle a scenario runs against. Names resolve inside the shared
/// fixtures directory: `net_user_<name>.txt`, `net_accounts_<state>.txt`, and
/// the policy file itself.
struct FixtureSet {
  std::vector<std::string> net_users;
  std::string net_accounts_state;
  std::string policy_file;
  Date clock{};
};

struct ScenarioSpec {
  std::string id;
  std::string prompt;
  // Account name, or "machine".
  std::string subject;
  // Free-text annotation shown by `scenario list`.
  std::string note;
  FixtureSet fixtures;
  std::filesystem::path script_path;
  Compliance expected_compliance = Compliance::Compliant;

  Scope scope() const;
};

enum class RunMode { Scripted, Live };

enum class ReportedCompliance { Compliant, NonCompliant, Indeterminate };

enum class TaskResult { Pass, Fail };

std::string_view to_string(ReportedCompliance c);
std::string_view to_string(TaskResult r);

struct ScenarioResult {
  std::string scenario_id;
  bool interpreted_task = false;
  bool executed_independently = false;
  ReportedCompliance reported_compliance = ReportedCompliance::Indeterminate;
  std::optional<Compliance> oracle_compliance;
  TaskResult task_result = TaskResult::Fail;
  bool hedged = false;
  // Set when the scenario could not run (e.g. "FixtureMissing: ...").
  std::string note;
  Transcript transcript;
};

/// Everything run_scenario needs besides the spec itself.
struct HarnessContext {
  std::filesystem::path fixtures_dir;
  AgentLimits limits;
  // Receives SendReport deliveries; a MemoryReportSink is used when null.
  std::shared_ptr<ReportSink> sink;
  // Live mode only.
  std::function<std::unique_ptr<CompletionBackend>()> live_backend;
  // Replaces every scenario's script in Scripted mode when set.
  std::optional<std::filesystem::path> script_override;
};

/// Negative markers win over positive ones; no marker gives Indeterminate.
ReportedCompliance classify_final_answer(std::string_view answer);

/// True for conditional-date hedges such as "if today's date ...".
bool contains_date_hedge(std::string_view answer);

ScenarioSpec load_scenario(const std::filesystem::path& scenario_dir);

/// Loads every `<dir>/<id>/spec.json`, ordered by id.
std::vector<ScenarioSpec> load_scenarios(const std::filesystem::path& scenarios_dir);

/// Fixture-mode shell policy over the bundle. Throws Error(FixtureMissing).
ShellPolicy fixture_shell_policy(const std::filesystem::path& fixtures_dir,
                                 const FixtureSet& fixtures);

/// Every `net_user_*.txt` in the directory plus `net_accounts_<state>.txt`
/// (and `net_user.txt` for the bare listing if present).
ShellPolicy fixture_shell_policy_from_dir(const std::filesystem::path& fixtures_dir,
                                          std::string_view net_accounts_state);

/// Agent-free audit of one subject: probe through the shell policy, parse,
/// evaluate. Shared by the scenario oracle and `check`. Throws
/// Error(FixtureMissing) when the probe has no canned output and propagates
/// parser errors.
ComplianceReport check_subject(std::string_view subject, const ShellPolicy& shell,
                               const PolicySet& policy, Date audit_date,
                               std::string task_query = {});

/// Runs the agent on one scenario and scores it against the compliance
/// oracle. Throws Error(FixtureMissing) / Error(ScriptMissing).
ScenarioResult run_scenario(const ScenarioSpec& spec, RunMode mode, const HarnessContext& ctx);

struct ScenarioMatrix {
  RunMode mode = RunMode::Scripted;
  std::vector<ScenarioResult> rows;
  std::vector<ScenarioSpec> specs;

  std::size_t pass_count() const;
  /// Every row shows Yes/Yes, the expected compliance status, and Pass.
  bool matches_reference() const;
  /// Scripted: 0 iff matches_reference(). Live: always 0.
  int exit_code() const;
};

/// Runs the scenarios concurrently; failures become Fail rows. Rows are
/// ordered by scenario id.
ScenarioMatrix run_all(const std::vector<ScenarioSpec>& specs, RunMode mode,
                       const HarnessContext& ctx);

std::string render_matrix_text(const ScenarioMatrix& matrix);
std::string render_matrix_json(const ScenarioMatrix& matrix, int indent = 2);

}  // namespace secaudit
