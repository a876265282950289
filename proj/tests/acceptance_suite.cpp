// Runs each acceptance check and prints one PASS/FAIL line per check.
// Exit status is non-zero if any check fails.

#include <chrono>
#include <functional>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "cli/cli.hpp"
#include "corpus.hpp"
#include "oracle.hpp"
#include "secaudit/agent.hpp"
#include "secaudit/errors.hpp"
#include "secaudit/scenario.hpp"
#include "secaudit/serialization.hpp"
#include "secaudit/shell.hpp"

using namespace secaudit;
namespace ts = testsupport;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void expect(bool cond, const std::string& what) {
    if (cond) return;
    if (pass) detail = what;
    pass = false;
  }
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt_seconds(double s) {
  std::ostringstream o;
  o.precision(3);
  o << std::fixed << s << "s";
  return o.str();
}

Outcome scripted_matrix() {
  Outcome o;
  const auto t0 = Clock::now();
  std::ostringstream out, err;
  const int code = cli::run({"--data", ts::data_dir().string(), "--out", "json", "scenario", "run", "--mode", "scripted"},
                            out, err);
  const double elapsed = seconds_since(t0);
  o.expect(code == 0, "exit code " + std::to_string(code) + ": " + err.str());
  const auto rows = nlohmann::json::parse(out.str());
  const char* ids[] = {"1a", "1b", "2a", "2b", "3a", "3b"};
  const char* status[] = {"Non-Compliant", "Compliant", "Non-Compliant", "Compliant", "Non-Compliant", "Compliant"};
  o.expect(rows.size() == 6, "expected 6 rows, got " + std::to_string(rows.size()));
  for (std::size_t i = 0; i < rows.size() && i < 6; ++i) {
    const auto& r = rows[i];
    const std::string id = ids[i];
    o.expect(r["scenario"] == id, "row " + std::to_string(i) + " is not " + id);
    o.expect(r["interpret_audit_task"] == "Yes", id + ": interpret != Yes");
    o.expect(r["execute_task_independently"] == "Yes", id + ": execute != Yes");
    o.expect(r["compliance_status"] == status[i], id + ": status " + r["compliance_status"].dump());
    o.expect(r["task_result"] == "Pass", id + ": task result " + r["task_result"].dump());
  }
  o.expect(elapsed < 5.0, "took " + fmt_seconds(elapsed));
  if (o.pass) o.detail = "6/6 rows exact in " + fmt_seconds(elapsed);
  return o;
}

Outcome transcript_shape() {
  Outcome o;
  const auto specs = load_scenarios(ts::scenarios_dir());
  const auto it = std::find_if(specs.begin(), specs.end(), [](const auto& s) { return s.id == "1b"; });
  o.expect(it != specs.end(), "scenario 1b missing");
  if (!o.pass) return o;
  HarnessContext ctx;
  ctx.fixtures_dir = ts::fixtures_dir();
  const auto result = run_scenario(*it, RunMode::Scripted, ctx);
  const auto& t = result.transcript;
  o.expect(!t.steps.empty(), "no steps");
  if (!t.steps.empty()) {
    o.expect(t.steps[0].action_name == "WindowsTask", "step 1 tool is " + t.steps[0].action_name);
    o.expect(t.steps[0].action_input == "net user Patrick", "step 1 input is " + t.steps[0].action_input);
  }
  o.expect(t.final_answer.has_value(), "no final answer");
  o.expect(result.reported_compliance == ReportedCompliance::Compliant, "answer not classified Compliant");
  const auto doc = nlohmann::json::parse(transcript_to_json(t));
  o.expect(doc.contains("task_query") && doc["task_query"] == it->prompt, "task_query key");
  o.expect(doc.contains("output") && doc["output"].is_string(), "output key");
  if (o.pass) o.detail = "WindowsTask(\"net user Patrick\") then Compliant answer; keys task_query/output";
  return o;
}

Outcome oracle_properties() {
  Outcome o;
  const auto t0 = Clock::now();
  ts::Rng rng(0xC0FFEE);
  std::size_t verdicts = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto s = ts::random_settings(rng);
    const auto p = ts::random_machine_policy(rng);
    const auto report = evaluate_machine(s, p, make_date(2024, 12, 1));
    o.expect(report.verdicts.size() == p.rules.size(), "verdict count mismatch");
    bool all = true;
    for (std::size_t k = 0; k < p.rules.size() && k < report.verdicts.size(); ++k) {
      const auto& rule = p.rules[k];
      const bool want = ts::brute_force_holds(ts::raw_value(s, rule.parameter), rule.comparator, rule.threshold);
      all = all && want;
      ++verdicts;
      o.expect(report.verdicts[k].compliant == want, "disagreement on pair " + std::to_string(i));
    }
    o.expect((report.overall == Compliance::Compliant) == all, "overall mismatch on pair " + std::to_string(i));
  }
  for (int i = 0; i < 1000; ++i) {
    const auto s = ts::random_settings(rng);
    PolicyRule rule = ts::random_machine_policy(rng).rules.front();
    rule.comparator = rng.coin() ? Comparator::AtMost : Comparator::AtLeast;
    PolicyRule loose = rule;
    const auto d = static_cast<std::uint32_t>(rng.between(1, 100));
    loose.threshold = rule.comparator == Comparator::AtMost ? rule.threshold + d
                                                           : (rule.threshold > d ? rule.threshold - d : 0);
    const bool tight_ok = evaluate_machine(s, PolicySet{"t", {rule}}).overall == Compliance::Compliant;
    const bool loose_ok = evaluate_machine(s, PolicySet{"l", {loose}}).overall == Compliance::Compliant;
    o.expect(!tight_ok || loose_ok, "monotonicity broken on perturbation " + std::to_string(i));
  }
  const double elapsed = seconds_since(t0);
  o.expect(elapsed < 10.0, "took " + fmt_seconds(elapsed));
  if (o.pass)
    o.detail = "1000 pairs (" + std::to_string(verdicts) + " verdicts) + 1000 perturbations in " + fmt_seconds(elapsed);
  return o;
}

Outcome date_properties() {
  Outcome o;
  const PolicySet age90{"age", {PolicyRule{"AGE", "age", Parameter::PasswordLastSetWithinDays, Comparator::AtMost, 90,
                                           Scope::Account}}};
  const auto eval = [&](Date last_set, Date audit) {
    AccountInfo a;
    a.username = "u";
    a.password_last_set = last_set;
    return evaluate_account(a, age90, audit).overall;
  };
  ts::Rng rng(0xDA7E);
  for (int i = 0; i < 500; ++i) {
    const Date last_set = add_days(make_date(1990, 1, 1), rng.between(0, 15000));
    const Date audit = add_days(last_set, rng.between(0, 365));
    const auto k = rng.between(-5000, 5000);
    o.expect(eval(last_set, audit) == eval(add_days(last_set, k), add_days(audit, k)),
             "shift invariance broken at " + to_iso(last_set) + " / " + to_iso(audit) + " / k=" + std::to_string(k));
  }
  const Date audit = make_date(2024, 12, 1);
  const std::pair<int, Compliance> boundary[] = {{0, Compliance::Compliant},
                                                 {89, Compliance::Compliant},
                                                 {90, Compliance::Compliant},
                                                 {91, Compliance::NonCompliant}};
  for (auto [age, want] : boundary)
    o.expect(eval(add_days(audit, -age), audit) == want, "boundary age " + std::to_string(age));
  if (o.pass) o.detail = "500 shifted triples; ages 0/89/90/91 -> C/C/C/NC";
  return o;
}

class CallbackBackend : public CompletionBackend {
 public:
  explicit CallbackBackend(std::function<std::string()> fn) : fn_(std::move(fn)) {}
  std::string complete(const CompletionRequest&) override { return fn_(); }

 private:
  std::function<std::string()> fn_;
};

Outcome termination() {
  Outcome o;
  std::size_t dispatches = 0;
  ToolRegistry tools;
  tools.register_tool({"Probe", "Probe(x): counts calls", [&dispatches](std::string_view in) {
                         ++dispatches;
                         return ToolResult::ok("seen " + std::string(in));
                       }});
  const auto tmpl = PromptTemplate::for_tools(tools);

  AgentLimits limits;
  CallbackBackend repeating([] { return std::string("Thought: again\nAction: Probe\nAction Input: same"); });
  auto t = run_agent("q", tools, repeating, tmpl, limits);
  o.expect(t.status == RunStatus::LoopDetected, "repeating script ended " + std::string(to_string(t.status)));
  o.expect(dispatches <= limits.loop_window, std::to_string(dispatches) + " dispatches before loop detection");
  const auto loop_dispatches = dispatches;

  dispatches = 0;
  CallbackBackend garbage([] { return std::string("I will not follow the format."); });
  t = run_agent("q", tools, garbage, tmpl, limits);
  o.expect(t.status == RunStatus::ParseFailure, "garbage script ended " + std::string(to_string(t.status)));
  o.expect(t.completions == 2, "parse failure after " + std::to_string(t.completions) + " completions");
  o.expect(dispatches == 0, "garbage script dispatched a tool");

  std::size_t configs = 0;
  for (std::size_t max_steps = 1; max_steps <= 16; ++max_steps) {
    for (std::size_t window = 1; window <= max_steps; ++window) {
      for (bool repeat : {false, true}) {
        dispatches = 0;
        std::size_t n = 0;
        CallbackBackend b([&n, repeat] {
          return "Action: Probe\nAction Input: " + (repeat ? std::string("x") : std::to_string(n++));
        });
        AgentLimits l;
        l.max_steps = max_steps;
        l.loop_window = window;
        run_agent("q", tools, b, tmpl, l);
        o.expect(dispatches <= max_steps, "max_steps " + std::to_string(max_steps) + " exceeded");
        ++configs;
      }
    }
  }
  if (o.pass)
    o.detail = "loop after " + std::to_string(loop_dispatches) + " dispatches; ParseFailure after 2 completions; " +
               std::to_string(configs) + " limit configs bounded";
  return o;
}

Outcome allowlist_soundness() {
  Outcome o;
  ts::TempDir dir("sentinel");
  const fs::path sentinel = dir.path() / "sentinel";
  const std::string s = sentinel.string();

  ShellPolicy policy;
  policy.mode = ShellMode::Live;
  policy.timeout_seconds = 5;

  const std::vector<std::string> injections = {
      "; touch " + s, "&& touch " + s, "| tee " + s, "> " + s, "$(touch " + s + ")", "`touch " + s + "`",
      "|| touch " + s, "\ntouch " + s, "& touch " + s, "< /etc/passwd"};
  const std::vector<std::string> bases = {"net user", "net user Patrick", "net accounts"};
  const std::vector<std::string> foreign = {"touch " + s, "sh -c 'touch " + s + "'", "bash -c id", "rm -rf " + s,
                                            "net localgroup administrators", "net user Patrick /add",
                                            "net user Patrick hunter2", "net accounts /maxpwage:unlimited",
                                            "powershell -c Get-LocalUser", "cmd /c whoami"};

  ts::Rng rng(0x5AFE);
  std::vector<std::string> commands = foreign;
  while (commands.size() < 50) {
    const auto& base = bases[static_cast<std::size_t>(rng.between(0, 2))];
    const auto& inj = injections[static_cast<std::size_t>(rng.between(0, static_cast<std::int64_t>(injections.size()) - 1))];
    commands.push_back(rng.coin() ? base + " " + inj : base + inj);
  }

  const auto before = spawned_process_count();
  std::size_t rejected = 0;
  for (const auto& c : commands) {
    const auto r = shell_execute(c, policy);
    if (r.error_code == ErrorCode::DisallowedCommand) ++rejected;
    else o.expect(false, "not rejected: " + c);
  }
  const auto spawned = spawned_process_count() - before;
  o.expect(spawned == 0, std::to_string(spawned) + " processes spawned");
  o.expect(!fs::exists(sentinel), "sentinel file was created");
  if (o.pass) o.detail = std::to_string(rejected) + "/50 DisallowedCommand, 0 spawns, sentinel absent";
  return o;
}

Outcome parser_corpus() {
  Outcome o;
  const auto expected = ts::expected_corpus();
  std::size_t n = 0;
  for (const auto& [file, record] : expected["net_user"].items()) {
    const auto got = ts::record_json(parse_net_user(ts::slurp(ts::fixtures_dir() / file)));
    o.expect(got == record, file + ": " + got.dump());
    ++n;
  }
  for (const auto& [file, record] : expected["net_accounts"].items()) {
    const auto got = ts::record_json(parse_net_accounts(ts::slurp(ts::fixtures_dir() / file)));
    o.expect(got == record, file + ": " + got.dump());
    ++n;
  }
  const auto patrick = parse_net_user(ts::slurp(ts::fixtures_dir() / "net_user_Patrick.txt"));
  o.expect(patrick.password_last_set == make_date(2024, 11, 17), "Patrick password_last_set");
  if (o.pass) o.detail = std::to_string(n) + " fixtures match; Patrick last set 2024-11-17";
  return o;
}

class UnreachableBackend : public CompletionBackend {
 public:
  std::string complete(const CompletionRequest&) override {
    throw Error(ErrorCode::NetworkError, "no live endpoint in the acceptance environment");
  }
};

Outcome live_advisory() {
  Outcome o;
  HarnessContext ctx;
  ctx.fixtures_dir = ts::fixtures_dir();
  ctx.live_backend = [] { return std::make_unique<UnreachableBackend>(); };
  const auto matrix = run_all(load_scenarios(ts::scenarios_dir()), RunMode::Live, ctx);
  o.expect(matrix.exit_code() == 0, "live matrix exit code " + std::to_string(matrix.exit_code()));
  o.expect(matrix.rows.size() == 6, "live matrix rows");
  if (o.pass)
    o.detail = "live mode is advisory: " + std::to_string(matrix.pass_count()) +
               "/6 Pass with an unreachable backend, exit 0";
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    Outcome (*fn)();
  };
  const Criterion criteria[] = {
      {1, "scripted scenario matrix", scripted_matrix},
      {2, "transcript shape", transcript_shape},
      {3, "oracle agreement and monotonicity", oracle_properties},
      {4, "date arithmetic", date_properties},
      {5, "termination and loop guard", termination},
      {6, "allowlist soundness", allowlist_soundness},
      {7, "parser corpus", parser_corpus},
      {8, "live mode advisory", live_advisory},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  [" << c.id << "] " << c.name << ": " << o.detail << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << "\n";
  return failures == 0 ? 0 : 1;
}
