#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <functional>
#include <iostream>
#include <sstream>

#include "secaudit/agent.hpp"
#include "secaudit/errors.hpp"
#include "support.hpp"

using namespace secaudit;

namespace {

/// Backend driven by a callback; records every request it sees.
class FnBackend : public CompletionBackend {
 public:
  explicit FnBackend(std::function<std::string(std::size_t)> fn) : fn_(std::move(fn)) {}
  std::string complete(const CompletionRequest& request) override {
    requests.push_back(request);
    return fn_(requests.size() - 1);
  }
  std::vector<CompletionRequest> requests;

 private:
  std::function<std::string(std::size_t)> fn_;
};

ToolRegistry echo_tools(std::size_t* dispatches = nullptr) {
  ToolRegistry reg;
  reg.register_tool({"Echo", "Echo(text): returns text", [dispatches](std::string_view in) {
                       if (dispatches) ++*dispatches;
                       return ToolResult::ok("echo:" + std::string(in));
                     }});
  reg.register_tool({"Broken", "Broken(x): always fails", [dispatches](std::string_view) {
                       if (dispatches) ++*dispatches;
                       return ToolResult::error(ErrorCode::NonZeroExit, "exit status 1");
                     }});
  return reg;
}

Transcript run(const ToolRegistry& tools, CompletionBackend& backend, AgentLimits limits = {}) {
  return run_agent("task", tools, backend, PromptTemplate::for_tools(tools), limits);
}

}  // namespace

TEST_CASE("prompt carries persona, tools, format, question and CoT cue") {
  const auto tools = echo_tools();
  const auto tmpl = PromptTemplate::for_tools(tools);
  const auto msgs = render_prompt(tmpl, "Is Penny compliant?", {});
  REQUIRE(msgs.size() == 2);
  CHECK(msgs[0].role == Role::System);
  CHECK(msgs[0].content.rfind("You are a security audit assistant", 0) == 0);
  CHECK(msgs[0].content.find("Echo(text)") != std::string::npos);
  CHECK(msgs[0].content.find("Echo, Broken") != std::string::npos);
  CHECK(msgs[0].content.find("{tool_names}") == std::string::npos);
  CHECK(msgs[1].content.find("Is Penny compliant?") != std::string::npos);
  CHECK(msgs[1].content.find("Let's think step by step.") != std::string::npos);

  AgentStep step;
  step.thought = "look";
  step.action_name = "Echo";
  step.action_input = "x";
  step.observation = "echo:x";
  const std::vector<AgentStep> steps{step};
  const auto with_step = render_prompt(tmpl, "q", steps);
  REQUIRE(with_step.size() == 4);
  CHECK(with_step[2].role == Role::Assistant);
  CHECK(with_step[2].content.find("Action: Echo") != std::string::npos);
  CHECK(with_step[3].content == "Observation: echo:x");
}

TEST_CASE("parse_model_output reads tool calls and final answers") {
  auto d = parse_model_output("Thought: check it\nAction: WindowsTask\nAction Input: \"net user Patrick\"");
  CHECK(d.kind == DirectiveKind::ToolCall);
  CHECK(d.action_name == "WindowsTask");
  CHECK(d.action_input == "net user Patrick");
  CHECK(d.thought == "check it");

  auto pre = parse_model_output("I need the date.\naction: `CurrentDate`\naction input: today");
  CHECK(pre.action_name == "CurrentDate");
  CHECK(pre.thought == "I need the date.");

  auto fin = parse_model_output("Thought: done\nFinal Answer: compliant\nsecond line");
  CHECK(fin.kind == DirectiveKind::FinalAnswer);
  CHECK(fin.answer == "compliant\nsecond line");

  auto first_wins = parse_model_output("Final Answer: yes\nAction: Echo\nAction Input: x");
  CHECK(first_wins.kind == DirectiveKind::FinalAnswer);

  for (const char* bad : {"", "just rambling", "Action: Echo", "Action:\nAction Input: x"}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(parse_model_output(bad), Error);
  }
}

TEST_CASE("detect_loop and truncate_observation") {
  std::vector<AgentStep> steps(3);
  for (auto& s : steps) {
    s.action_name = "A";
    s.action_input = "x";
  }
  CHECK(detect_loop(steps, 3));
  CHECK_FALSE(detect_loop(steps, 4));
  steps[1].action_input = "y";
  CHECK_FALSE(detect_loop(steps, 3));
  CHECK(detect_loop(std::span(steps).last(1), 1));

  CHECK(truncate_observation("short", 10) == "short");
  const std::string t = truncate_observation(std::string(100, 'a'), 10);
  CHECK(t == std::string(10, 'a') + "\n[truncated]");
  // Never split a multi-byte sequence.
  const std::string utf = truncate_observation("ab\xC3\xA9" "cd", 3);
  CHECK(utf == "ab\n[truncated]");
}

TEST_CASE("completed run records steps and the final answer") {
  std::size_t dispatches = 0;
  const auto tools = echo_tools(&dispatches);
  FnBackend backend([](std::size_t i) -> std::string {
    if (i == 0) return "Thought: try\nAction: Echo\nAction Input: hi";
    return "Final Answer: done";
  });
  const auto t = run(tools, backend);
  CHECK(t.status == RunStatus::Completed);
  CHECK(t.final_answer == "done");
  REQUIRE(t.steps.size() == 1);
  CHECK(t.steps[0].observation == "echo:hi");
  CHECK(dispatches == 1);
  CHECK(t.completions == 2);
  CHECK(backend.requests[0].stop_sequences == std::vector<std::string>{"Observation:"});
  CHECK(backend.requests[1].messages.back().content == "Observation: echo:hi");
}

TEST_CASE("unknown tool comes back as an observation listing valid names") {
  const auto tools = echo_tools();
  FnBackend backend([](std::size_t i) -> std::string {
    if (i == 0) return "Action: Nope\nAction Input: x";
    return "Final Answer: gave up";
  });
  const auto t = run(tools, backend);
  REQUIRE(t.steps.size() == 1);
  CHECK(t.steps[0].observation_is_error);
  CHECK(t.steps[0].observation.find("Echo") != std::string::npos);
  CHECK(t.status == RunStatus::Completed);
}

TEST_CASE("two consecutive tool errors end the run") {
  const auto tools = echo_tools();
  FnBackend backend([](std::size_t i) { return "Action: Broken\nAction Input: " + std::to_string(i); });
  const auto t = run(tools, backend);
  CHECK(t.status == RunStatus::ToolFailure);
  CHECK(t.steps.size() == 2);
}

TEST_CASE("a single corrective retry can recover") {
  const auto tools = echo_tools();
  FnBackend backend([](std::size_t i) -> std::string { return i == 0 ? "mumble" : "Final Answer: ok"; });
  const auto t = run(tools, backend);
  CHECK(t.status == RunStatus::Completed);
  CHECK(t.completions == 2);
  CHECK(backend.requests[1].messages.back().content.find("did not follow the required format") !=
        std::string::npos);
}

TEST_CASE("backend exceptions become BackendFailure") {
  const auto tools = echo_tools();
  FnBackend backend([](std::size_t) -> std::string { throw Error(ErrorCode::NetworkError, "down"); });
  const auto t = run(tools, backend);
  CHECK(t.status == RunStatus::BackendFailure);
  CHECK(t.diagnostic.find("down") != std::string::npos);
}

TEST_CASE("invalid limits and empty registries are reported, not thrown") {
  FnBackend backend([](std::size_t) { return std::string("Final Answer: x"); });
  AgentLimits bad;
  bad.loop_window = 20;
  CHECK(run(echo_tools(), backend, bad).status == RunStatus::BackendFailure);
  CHECK(run(ToolRegistry{}, backend).status == RunStatus::ToolFailure);
}

TEST_CASE("property: dispatches never exceed max_steps for any step/window pair") {
  testsupport::Rng rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    AgentLimits limits;
    limits.max_steps = static_cast<std::size_t>(rng.between(1, 20));
    limits.loop_window = static_cast<std::size_t>(rng.between(1, static_cast<std::int64_t>(limits.max_steps)));
    const bool repeat = rng.coin(0.3);
    std::size_t dispatches = 0;
    const auto tools = echo_tools(&dispatches);
    FnBackend backend([repeat](std::size_t i) {
      return "Action: Echo\nAction Input: " + std::string(repeat ? "same" : std::to_string(i));
    });
    const auto t = run(tools, backend, limits);
    CAPTURE(limits.max_steps);
    CAPTURE(limits.loop_window);
    CHECK(dispatches <= limits.max_steps);
    CHECK(t.steps.size() == dispatches);
    if (repeat || limits.loop_window == 1) {
      // A one-step window treats every action as a repeat.
      CHECK(t.status == RunStatus::LoopDetected);
      CHECK(dispatches == limits.loop_window);
    } else {
      CHECK(t.status == RunStatus::StepLimitExceeded);
      CHECK(dispatches == limits.max_steps);
    }
  }
}

TEST_CASE("the loop reads no interactive input") {
  std::istringstream poisoned("Final Answer: from stdin\n");
  auto* old = std::cin.rdbuf(poisoned.rdbuf());
  const auto tools = echo_tools();
  FnBackend backend([](std::size_t i) -> std::string {
    return i == 0 ? "Action: Echo\nAction Input: a" : "Final Answer: scripted";
  });
  const auto t = run(tools, backend);
  std::cin.rdbuf(old);
  CHECK(t.final_answer == "scripted");
  CHECK(poisoned.tellg() == 0);
}
