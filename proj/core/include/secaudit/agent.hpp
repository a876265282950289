#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "secaudit/llm_backend.hpp"
#include "secaudit/tools.hpp"

namespace secaudit {

inline constexpr std::string_view kDefaultPersona = "You are a security audit assistant";
inline constexpr std::string_view kDefaultCotTrigger = "Let's think step by step.";
inline constexpr std::string_view kObservationStop = "Observation:";
inline constexpr std::string_view kTruncatedMarker = "[truncated]";

/// Default ReAct grammar. `{tool_names}` is replaced with the comma-separated
/// tool list at render time.
extern const std::string kDefaultFormatInstructions;

struct PromptTemplate {
  std::string persona_line{kDefaultPersona};
  std::vector<std::string> tool_names;
  std::string tool_descriptions;
  std::string format_instructions = kDefaultFormatInstructions;
  std::string cot_trigger{kDefaultCotTrigger};

  static PromptTemplate for_tools(const ToolRegistry& tools);
};

enum class DirectiveKind { ToolCall, FinalAnswer };

struct ParsedDirective {
  DirectiveKind kind = DirectiveKind::FinalAnswer;
  std::string action_name;
  std::string action_input;
  std::string answer;
  std::optional<std::string> thought;
};

struct AgentStep {
  std::size_t index = 0;
  std::optional<std::string> thought;
  std::string action_name;
  std::string action_input;
  std::string observation;
  bool observation_is_error = false;
  std::int64_t duration_ms = 0;
};

enum class RunStatus {
  Completed,
  StepLimitExceeded,
  LoopDetected,
  ToolFailure,
  ParseFailure,
  BackendFailure,
};

std::string_view to_string(RunStatus status);

struct Transcript {
  std::string task_query;
  std::vector<AgentStep> steps;
  std::optional<std::string> final_answer;
  RunStatus status = RunStatus::Completed;
  // Why a non-Completed run stopped.
  std::string diagnostic;
  // Completions requested from the backend, corrective retries included.
  std::size_t completions = 0;
  std::chrono::system_clock::time_point started_at;
  std::chrono::system_clock::time_point ended_at;
};

struct AgentLimits {
  std::size_t max_steps = 15;
  std::size_t loop_window = 3;
  int per_tool_timeout_seconds = 30;
  std::size_t observation_budget_bytes = 8 * 1024;

  /// Throws Error(InvalidArgument) unless 0 < loop_window <= max_steps and
  /// the timeout is positive.
  void validate() const;
};

/// System message: persona, tool list, format instructions. User message:
/// task and CoT cue. Each prior step follows as an assistant turn
/// (Thought/Action/Action Input) and a user turn ("Observation: ...").
std::vector<ChatMessage> render_prompt(const PromptTemplate& tmpl, std::string_view task_query,
                                       std::span<const AgentStep> steps);

/// Reads one model completion. Labels are recognized case-insensitively at
/// line starts; text before the first label counts as the thought when no
/// "Thought:" label is present. When both an Action and a Final Answer occur,
/// the earlier one wins. Throws Error(UnparseableOutput).
ParsedDirective parse_model_output(std::string_view text);

bool detect_loop(std::span<const AgentStep> steps, std::size_t window);

/// Caps `observation` at `budget` bytes, appending the truncation marker.
std::string truncate_observation(std::string observation, std::size_t budget);

/// Drives the Thought/Action/Observation loop to a terminal status. Never
/// throws for model, tool or backend misbehaviour; the outcome is in
/// Transcript::status. Reads no interactive input.
Transcript run_agent(std::string_view task_query, const ToolRegistry& tools,
                     CompletionBackend& backend, const PromptTemplate& tmpl,
                     const AgentLimits& limits);

}  // namespace secaudit
