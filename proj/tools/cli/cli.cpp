#include "cli/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>

#include <CLI11.hpp>
#include <json.hpp>

#include "secaudit/agent.hpp"
#include "secaudit/compliance.hpp"
#include "secaudit/errors.hpp"
#include "secaudit/llm_backend.hpp"
#include "secaudit/report_sink.hpp"
#include "secaudit/scenario.hpp"
#include "secaudit/serialization.hpp"
#include "secaudit/shell.hpp"
#include "secaudit/tools.hpp"

#ifndef SECAUDIT_DEFAULT_DATA_DIR
#define SECAUDIT_DEFAULT_DATA_DIR "data"
#endif

namespace secaudit::cli {
namespace {

namespace fs = std::filesystem;

enum class BackendKind { Scripted, Http };
enum class OutputFormat { Text, Json };

struct CliConfig {
  BackendKind backend = BackendKind::Scripted;
  std::string endpoint_url;
  std::string model_id = "gpt-4";
  std::string fixtures;
  std::string policy_path;
  std::string report_dir;
  std::string date_override;
  std::size_t max_steps = 15;
  OutputFormat output_format = OutputFormat::Text;
  std::string script_path;
  std::string data_dir = SECAUDIT_DEFAULT_DATA_DIR;
  std::string api_key_env = "AUDIT_AGENT_API_KEY";
  bool live_shell = false;
};

/// Raised for problems the user must fix before anything runs.
struct ConfigError {
  std::string message;
};

/// Where canned command output comes from. `--fixtures` may name a fixtures
/// directory, a JSON fixture map, or a `net accounts` state within the
/// default directory ("before" / "after").
struct FixtureSource {
  fs::path directory;
  std::optional<fs::path> map_file;
  std::string accounts_state = "before";
};

FixtureSource resolve_fixtures(const CliConfig& cfg) {
  FixtureSource src;
  src.directory = fs::path(cfg.data_dir) / "fixtures";
  if (cfg.fixtures.empty()) return src;
  std::error_code ec;
  if (fs::is_directory(cfg.fixtures, ec)) {
    src.directory = cfg.fixtures;
  } else if (fs::is_regular_file(cfg.fixtures, ec)) {
    src.map_file = fs::path(cfg.fixtures);
  } else if (cfg.fixtures.find('/') == std::string::npos && cfg.fixtures.find('.') == std::string::npos) {
    src.accounts_state = cfg.fixtures;
  } else {
    throw ConfigError{"--fixtures: '" + cfg.fixtures + "' is neither a directory, a fixture map, nor a state name"};
  }
  return src;
}

ShellPolicy make_shell(const CliConfig& cfg, int timeout_seconds) {
  ShellPolicy shell;
  shell.timeout_seconds = timeout_seconds;
  if (cfg.live_shell) {
    shell.mode = ShellMode::Live;
    return shell;
  }
  const FixtureSource src = resolve_fixtures(cfg);
  if (src.map_file) {
    shell.mode = ShellMode::Fixture;
    shell.fixture_map = load_fixture_map(*src.map_file);
    return shell;
  }
  ShellPolicy from_dir = fixture_shell_policy_from_dir(src.directory, src.accounts_state);
  from_dir.timeout_seconds = timeout_seconds;
  return from_dir;
}

fs::path policy_path(const CliConfig& cfg) {
  if (!cfg.policy_path.empty()) return cfg.policy_path;
  return resolve_fixtures(cfg).directory / "cis_password_policy.txt";
}

std::optional<Date> date_override(const CliConfig& cfg) {
  if (cfg.date_override.empty()) return std::nullopt;
  auto d = parse_iso(cfg.date_override);
  if (!d) throw ConfigError{"--date: expected YYYY-MM-DD, got '" + cfg.date_override + "'"};
  return d;
}

AgentLimits limits_for(const CliConfig& cfg) {
  if (cfg.max_steps == 0) throw ConfigError{"--max-steps must be positive"};
  AgentLimits limits;
  limits.max_steps = cfg.max_steps;
  limits.loop_window = std::min<std::size_t>(limits.loop_window, cfg.max_steps);
  return limits;
}

std::shared_ptr<ReportSink> make_sink(const CliConfig& cfg) {
  if (cfg.report_dir.empty()) return std::make_shared<MemoryReportSink>();
  return std::make_shared<FileReportSink>(cfg.report_dir);
}

BackendConfig http_config(const CliConfig& cfg) {
  if (cfg.endpoint_url.empty()) throw ConfigError{"--backend http requires --endpoint (missing field: endpoint_url)"};
  BackendConfig bc;
  bc.endpoint_url = cfg.endpoint_url;
  bc.model_id = cfg.model_id;
  bc.api_key_env_var = cfg.api_key_env;
  try {
    bc.validate();
  } catch (const Error& e) {
    throw ConfigError{e.what()};
  }
  return bc;
}

int cmd_ask(const std::string& prompt, const CliConfig& cfg, std::ostream& out) {
  std::unique_ptr<CompletionBackend> backend;
  if (cfg.backend == BackendKind::Scripted) {
    if (cfg.script_path.empty()) throw ConfigError{"--backend scripted requires --script (missing field: script)"};
    backend = std::make_unique<ScriptedSession>(std::make_shared<const Script>(load_script(cfg.script_path)));
  } else {
    backend = std::make_unique<HttpBackend>(http_config(cfg));
  }

  const AgentLimits limits = limits_for(cfg);
  AuditToolConfig tc;
  tc.shell = std::make_shared<ShellPolicy>(make_shell(cfg, limits.per_tool_timeout_seconds));
  tc.policy_path = policy_path(cfg);
  tc.clock_override = date_override(cfg);
  tc.sink = make_sink(cfg);
  tc.task_query = prompt;
  const ToolRegistry tools = make_audit_tools(tc);

  const Transcript t = run_agent(prompt, tools, *backend, PromptTemplate::for_tools(tools), limits);
  out << (cfg.output_format == OutputFormat::Json ? transcript_to_json(t) + "\n" : transcript_to_text(t));
  return t.status == RunStatus::Completed ? 0 : 1;
}

int cmd_scenario_list(const CliConfig& cfg, std::ostream& out) {
  const auto specs = load_scenarios(fs::path(cfg.data_dir) / "scenarios");
  if (cfg.output_format == OutputFormat::Json) {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& s : specs) list.push_back({{"id", s.id}, {"prompt", s.prompt}, {"note", s.note}});
    out << list.dump(2) << "\n";
    return 0;
  }
  for (const auto& s : specs) {
    out << s.id << "  " << s.prompt;
    if (!s.note.empty()) out << "  (" << s.note << ")";
    out << "\n";
  }
  return 0;
}

int cmd_scenario_run(const std::vector<std::string>& ids, const std::string& mode, const CliConfig& cfg,
                     std::ostream& out) {
  auto specs = load_scenarios(fs::path(cfg.data_dir) / "scenarios");
  if (!ids.empty()) {
    std::set<std::string> known;
    for (const auto& s : specs) known.insert(s.id);
    for (const auto& id : ids)
      if (!known.count(id)) throw ConfigError{"unknown scenario id '" + id + "'"};
    std::erase_if(specs, [&](const ScenarioSpec& s) { return std::find(ids.begin(), ids.end(), s.id) == ids.end(); });
  }

  HarnessContext ctx;
  const FixtureSource src = resolve_fixtures(cfg);
  ctx.fixtures_dir = src.directory;
  ctx.limits = limits_for(cfg);
  if (!cfg.report_dir.empty()) ctx.sink = make_sink(cfg);
  if (!cfg.script_path.empty()) ctx.script_override = fs::path(cfg.script_path);

  RunMode run_mode = RunMode::Scripted;
  if (mode == "live") {
    run_mode = RunMode::Live;
    const BackendConfig bc = http_config(cfg);
    ctx.live_backend = [bc] { return std::make_unique<HttpBackend>(bc); };
  }

  const ScenarioMatrix matrix = run_all(specs, run_mode, ctx);
  out << (cfg.output_format == OutputFormat::Json ? render_matrix_json(matrix) + "\n" : render_matrix_text(matrix));
  return matrix.exit_code();
}

int cmd_check(const std::string& subject, const CliConfig& cfg, std::ostream& out) {
  const PolicySet policy = read_policy_document(policy_path(cfg));
  const ShellPolicy shell = make_shell(cfg, 30);
  const Date audit_date = date_override(cfg).value_or(today());
  const ComplianceReport report =
      check_subject(subject, shell, policy, audit_date, "check " + subject);

  if (!cfg.report_dir.empty()) emit_report(report, *make_sink(cfg));

  if (cfg.output_format == OutputFormat::Json) {
    out << report_to_json(report) << "\n";
  } else {
    out << render_report_body(report);
    for (const auto& v : report.verdicts) {
      out << "  [" << (v.compliant ? "PASS" : "FAIL") << "] " << v.rule_id << ": observed " << v.observed
          << ", expected " << v.expected << "\n";
    }
  }
  return report.overall == Compliance::Compliant ? 0 : 1;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"LLM-driven Windows password-policy audit agent", "audit-agent"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "Key-value config file; command-line flags take precedence");

  CliConfig cfg;
  std::string backend = "scripted";
  std::string output = "text";

  app.add_option("--backend", backend, "LLM backend")->check(CLI::IsMember({"scripted", "http"}));
  app.add_option("--endpoint", cfg.endpoint_url, "Chat-completions endpoint URL (http backend)");
  app.add_option("--model", cfg.model_id, "Model id sent to the endpoint");
  app.add_option("--fixtures", cfg.fixtures, "Fixtures directory, JSON fixture map, or net accounts state");
  app.add_option("--policy", cfg.policy_path, "Policy document (extracted text)");
  app.add_option("--report-dir", cfg.report_dir, "Directory for emitted audit reports");
  app.add_option("--date", cfg.date_override, "Fixed audit date (YYYY-MM-DD)");
  app.add_option("--max-steps", cfg.max_steps, "Agent step limit");
  app.add_option("--out", output, "Output format")->check(CLI::IsMember({"text", "json"}));
  app.add_option("--script", cfg.script_path, "Scripted-backend exchange file (JSON)");
  app.add_option("--data", cfg.data_dir, "Data root holding fixtures/ and scenarios/");
  app.add_option("--api-key-env", cfg.api_key_env, "Environment variable holding the bearer token");
  app.add_flag("--live-shell", cfg.live_shell, "Run allowlisted commands on this host instead of fixtures");

  std::string prompt;
  auto* ask = app.add_subcommand("ask", "Run the agent on one audit question");
  ask->add_option("prompt", prompt, "Audit question")->required();

  auto* scenario = app.add_subcommand("scenario", "Reproduce the scenario matrix");
  scenario->require_subcommand(1);
  auto* list = scenario->add_subcommand("list", "List scenario ids and prompts");
  std::vector<std::string> ids;
  std::string mode = "scripted";
  auto* run_cmd = scenario->add_subcommand("run", "Run scenarios and print the result matrix");
  run_cmd->add_option("ids", ids, "Scenario ids (default: all)");
  run_cmd->add_option("--mode", mode, "Backend mode")->check(CLI::IsMember({"scripted", "live"}));

  std::string subject;
  auto* check = app.add_subcommand("check", "Agent-free compliance check of an account or the machine");
  check->add_option("subject", subject, "Account name, or 'machine'")->required();

  std::vector<const char*> argv{"audit-agent"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  cfg.backend = backend == "http" ? BackendKind::Http : BackendKind::Scripted;
  cfg.output_format = output == "json" ? OutputFormat::Json : OutputFormat::Text;

  try {
    if (ask->parsed()) return cmd_ask(prompt, cfg, out);
    if (list->parsed()) return cmd_scenario_list(cfg, out);
    if (run_cmd->parsed()) return cmd_scenario_run(ids, mode, cfg, out);
    if (check->parsed()) return cmd_check(subject, cfg, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.message << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

}  // namespace secaudit::cli
