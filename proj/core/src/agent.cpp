#include "secaudit/agent.hpp"

#include <algorithm>
#include <cctype>

#include "secaudit/errors.hpp"

namespace secaudit {

const std::string kDefaultFormatInstructions =
    "Use the following format:\n"
    "\n"
    "Question: the audit task you must complete\n"
    "Thought: reason about what to do next\n"
    "Action: the tool to use, exactly one of [{tool_names}]\n"
    "Action Input: the input to the tool\n"
    "Observation: the result of the tool\n"
    "... (this Thought/Action/Action Input/Observation can repeat N times)\n"
    "Thought: I now know the final answer\n"
    "Final Answer: the answer to the original question, stating whether the subject is "
    "compliant and naming every gap found\n"
    "\n"
    "Never write an Observation yourself; it is supplied after each Action.";

namespace {

std::string_view trim(std::string_view s) {
  const auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

bool istarts_with(std::string_view s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(s[i])) != std::tolower(static_cast<unsigned char>(prefix[i])))
      return false;
  }
  return true;
}

std::string join(const std::vector<std::string>& items, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

std::string replace_all(std::string s, std::string_view from, std::string_view to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size()))
    s.replace(pos, from.size(), to);
  return s;
}

enum class Label { Thought, Action, ActionInput, FinalAnswer, Observation };

struct LabelText {
  Label label;
  std::string_view text;
};

// Order matters: "Action Input:" must be tried before "Action:".
constexpr LabelText kLabels[] = {
    {Label::Thought, "thought:"},
    {Label::ActionInput, "action input:"},
    {Label::Action, "action:"},
    {Label::FinalAnswer, "final answer:"},
    {Label::Observation, "observation:"},
};

struct Section {
  Label label;
  std::string text;
};

std::string strip_quotes(std::string_view s, char open, char close) {
  s = trim(s);
  if (s.size() >= 2 && s.front() == open && s.back() == close) s = trim(s.substr(1, s.size() - 2));
  return std::string(s);
}

std::string render_step_action(const AgentStep& step) {
  std::string out;
  if (step.thought && !step.thought->empty()) out += "Thought: " + *step.thought + "\n";
  out += "Action: " + step.action_name + "\n";
  out += "Action Input: " + step.action_input;
  return out;
}

}  // namespace

std::string_view to_string(RunStatus status) {
  switch (status) {
    case RunStatus::Completed: return "Completed";
    case RunStatus::StepLimitExceeded: return "StepLimitExceeded";
    case RunStatus::LoopDetected: return "LoopDetected";
    case RunStatus::ToolFailure: return "ToolFailure";
    case RunStatus::ParseFailure: return "ParseFailure";
    case RunStatus::BackendFailure: return "BackendFailure";
  }
  return "Unknown";
}

PromptTemplate PromptTemplate::for_tools(const ToolRegistry& tools) {
  PromptTemplate t;
  t.tool_names = tools.names();
  t.tool_descriptions = tools.render_descriptions();
  return t;
}

void AgentLimits::validate() const {
  if (max_steps == 0) throw Error(ErrorCode::InvalidArgument, "max_steps must be positive");
  if (loop_window == 0 || loop_window > max_steps)
    throw Error(ErrorCode::InvalidArgument, "loop_window must be in [1, max_steps]");
  if (per_tool_timeout_seconds <= 0)
    throw Error(ErrorCode::InvalidArgument, "per_tool_timeout_seconds must be positive");
  if (observation_budget_bytes == 0)
    throw Error(ErrorCode::InvalidArgument, "observation_budget_bytes must be positive");
}

std::vector<ChatMessage> render_prompt(const PromptTemplate& tmpl, std::string_view task_query,
                                       std::span<const AgentStep> steps) {
  std::string system = tmpl.persona_line;
  if (!tmpl.tool_descriptions.empty())
    system += "\n\nYou have access to the following tools:\n\n" + tmpl.tool_descriptions;
  if (!tmpl.format_instructions.empty())
    system += "\n\n" + replace_all(tmpl.format_instructions, "{tool_names}", join(tmpl.tool_names, ", "));

  std::string user = "Question: " + std::string(task_query);
  if (!tmpl.cot_trigger.empty()) user += "\n\n" + tmpl.cot_trigger;

  std::vector<ChatMessage> messages;
  messages.reserve(2 + 2 * steps.size());
  messages.push_back({Role::System, std::move(system)});
  messages.push_back({Role::User, std::move(user)});
  for (const auto& step : steps) {
    messages.push_back({Role::Assistant, render_step_action(step)});
    messages.push_back({Role::User, std::string(kObservationStop) + " " + step.observation});
  }
  return messages;
}

ParsedDirective parse_model_output(std::string_view text) {
  std::vector<Section> sections;
  std::string preamble;

  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    std::string_view lead = line;
    while (!lead.empty() && std::isspace(static_cast<unsigned char>(lead.front()))) lead.remove_prefix(1);

    bool matched = false;
    for (const auto& l : kLabels) {
      if (istarts_with(lead, l.text)) {
        sections.push_back({l.label, std::string(lead.substr(l.text.size()))});
        matched = true;
        break;
      }
    }
    if (!matched) {
      if (sections.empty()) {
        preamble.append(line).push_back('\n');
      } else {
        sections.back().text.append("\n").append(line);
      }
    }
    pos = eol + 1;
  }

  const auto first_of = [&](Label label, std::size_t from = 0) -> std::optional<std::size_t> {
    for (std::size_t i = from; i < sections.size(); ++i)
      if (sections[i].label == label) return i;
    return std::nullopt;
  };

  const auto thought_before = [&](std::size_t limit) -> std::optional<std::string> {
    for (std::size_t i = 0; i < limit; ++i) {
      if (sections[i].label == Label::Thought) {
        auto t = trim(sections[i].text);
        if (!t.empty()) return std::string(t);
      }
    }
    auto p = trim(preamble);
    if (!p.empty()) return std::string(p);
    return std::nullopt;
  };

  const auto action = first_of(Label::Action);
  const auto final_answer = first_of(Label::FinalAnswer);

  if (final_answer && (!action || *final_answer < *action)) {
    auto answer = trim(sections[*final_answer].text);
    if (answer.empty()) throw Error(ErrorCode::UnparseableOutput, "empty Final Answer");
    ParsedDirective d;
    d.kind = DirectiveKind::FinalAnswer;
    d.answer = std::string(answer);
    d.thought = thought_before(*final_answer);
    return d;
  }

  if (action) {
    const auto input = first_of(Label::ActionInput, *action + 1);
    if (!input) throw Error(ErrorCode::UnparseableOutput, "Action without an Action Input line");
    std::string_view name_block = trim(sections[*action].text);
    std::string_view name = name_block.substr(0, name_block.find('\n'));
    std::string action_name = strip_quotes(strip_quotes(name, '`', '`'), '"', '"');
    if (action_name.empty()) throw Error(ErrorCode::UnparseableOutput, "empty Action name");

    ParsedDirective d;
    d.kind = DirectiveKind::ToolCall;
    d.action_name = std::move(action_name);
    d.action_input = strip_quotes(sections[*input].text, '"', '"');
    d.thought = thought_before(*action);
    return d;
  }

  throw Error(ErrorCode::UnparseableOutput, "neither an Action/Action Input pair nor a Final Answer was found");
}

bool detect_loop(std::span<const AgentStep> steps, std::size_t window) {
  if (window == 0 || window > steps.size()) return false;
  const auto tail = steps.last(window);
  return std::all_of(tail.begin(), tail.end(), [&](const AgentStep& s) {
    return s.action_name == tail.front().action_name && s.action_input == tail.front().action_input;
  });
}

std::string truncate_observation(std::string observation, std::size_t budget) {
  if (observation.size() <= budget) return observation;
  std::size_t cut = budget;
  // Back off to a UTF-8 boundary.
  while (cut > 0 && (static_cast<unsigned char>(observation[cut]) & 0xC0) == 0x80) --cut;
  observation.erase(cut);
  observation += "\n";
  observation += kTruncatedMarker;
  return observation;
}

Transcript run_agent(std::string_view task_query, const ToolRegistry& tools, CompletionBackend& backend,
                     const PromptTemplate& tmpl, const AgentLimits& limits) {
  using Clock = std::chrono::steady_clock;

  Transcript transcript;
  transcript.task_query = std::string(task_query);
  transcript.started_at = std::chrono::system_clock::now();

  const auto finish = [&](RunStatus status, std::string diagnostic = {}) {
    transcript.status = status;
    transcript.diagnostic = std::move(diagnostic);
    transcript.ended_at = std::chrono::system_clock::now();
    return transcript;
  };

  try {
    limits.validate();
  } catch (const Error& e) {
    return finish(RunStatus::BackendFailure, e.what());
  }
  if (tools.empty()) return finish(RunStatus::ToolFailure, "no tools registered");

  std::optional<std::string> rejected_output;
  bool previous_step_errored = false;

  while (true) {
    CompletionRequest request;
    request.messages = render_prompt(tmpl, task_query, transcript.steps);
    request.stop_sequences = {std::string(kObservationStop)};
    if (rejected_output) {
      request.messages.push_back(
          {Role::Assistant, rejected_output->empty() ? std::string("(empty reply)") : *rejected_output});
      request.messages.push_back(
          {Role::User,
           "Your last reply did not follow the required format. Reply with either\n"
           "Thought: <reasoning>\nAction: <one of [" + join(tmpl.tool_names, ", ") +
               "]>\nAction Input: <tool input>\nor\nFinal Answer: <answer>"});
    }

    std::string completion;
    try {
      ++transcript.completions;
      completion = backend.complete(request);
    } catch (const std::exception& e) {
      return finish(RunStatus::BackendFailure, e.what());
    }

    ParsedDirective directive;
    try {
      directive = parse_model_output(completion);
    } catch (const Error& e) {
      if (rejected_output) return finish(RunStatus::ParseFailure, e.what());
      rejected_output = completion;
      continue;
    }
    rejected_output.reset();

    if (directive.kind == DirectiveKind::FinalAnswer) {
      transcript.final_answer = directive.answer;
      return finish(RunStatus::Completed);
    }

    if (transcript.steps.size() >= limits.max_steps)
      return finish(RunStatus::StepLimitExceeded,
                    "step limit of " + std::to_string(limits.max_steps) + " reached");

    const auto t0 = Clock::now();
    ToolResult result = tools.dispatch(directive.action_name, directive.action_input);
    const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - t0);

    AgentStep step;
    step.index = transcript.steps.size();
    step.thought = directive.thought;
    step.action_name = directive.action_name;
    step.action_input = directive.action_input;
    step.observation = truncate_observation(std::move(result.output), limits.observation_budget_bytes);
    step.observation_is_error = result.is_error;
    step.duration_ms = elapsed.count();
    transcript.steps.push_back(std::move(step));

    if (result.is_error) {
      if (previous_step_errored)
        return finish(RunStatus::ToolFailure, "tool error persisted after one retry: " +
                                                  transcript.steps.back().observation);
      previous_step_errored = true;
    } else {
      previous_step_errored = false;
    }

    if (detect_loop(transcript.steps, limits.loop_window))
      return finish(RunStatus::LoopDetected,
                    "the last " + std::to_string(limits.loop_window) + " actions were identical");
  }
}

}  // namespace secaudit
