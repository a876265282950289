#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "secaudit/tools.hpp"

namespace secaudit {

enum class ShellMode { Live, Fixture };

/// Allowlist patterns are whitespace-separated tokens matched against the
/// whole normalized command. Literal tokens compare case-insensitively,
/// `<name>` matches any one argument token and a trailing `*` admits any
/// further arguments.
struct ShellPolicy {
  std::vector<std::string> allowlist = {"net user", "net user <name>", "net accounts"};
  int timeout_seconds = 30;
  ShellMode mode = ShellMode::Fixture;
  std::map<std::string, std::string> fixture_map;

  /// Throws Error(InvalidArgument) for Fixture mode with an empty map or a
  /// non-positive timeout.
  void validate() const;
};

/// Collapses whitespace runs, trims, lower-cases the command word and strips
/// one pair of surrounding double quotes.
std::string normalize_command(std::string_view command);

/// True when every character is permitted in an argument token: letters,
/// digits and `._-/:@`. Shell metacharacters never are.
bool has_only_safe_characters(std::string_view normalized);

bool is_allowed(std::string_view command, const ShellPolicy& policy);

/// Executes (Live) or replays (Fixture) an allowlisted command. A command that
/// fails the allowlist is never spawned. Errors are reported in the result:
/// DisallowedCommand, Timeout, NonZeroExit (output kept), SpawnFailed,
/// FixtureMiss.
ToolResult shell_execute(std::string_view command, const ShellPolicy& policy);

/// Processes spawned by shell_execute since program start.
std::uint64_t spawned_process_count();

}  // namespace secaudit
