#include "secaudit/shell.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <thread>

#ifdef _WIN32
#include <stdio.h>
#else
#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>
extern char** environ;
#endif

#include "secaudit/errors.hpp"

namespace secaudit {
namespace {

std::atomic<std::uint64_t> g_spawned{0};

constexpr std::size_t kMaxCapturedBytes = 1 << 20;

std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
         });
}

bool matches_pattern(const std::vector<std::string>& tokens, std::string_view pattern) {
  const auto ptoks = split_ws(pattern);
  if (ptoks.empty()) return false;
  for (std::size_t i = 0; i < ptoks.size(); ++i) {
    if (ptoks[i] == "*" && i + 1 == ptoks.size()) return tokens.size() >= i;
    if (i >= tokens.size()) return false;
    if (ptoks[i] == "<name>") {
      // Switches such as /add or /delete are never a name.
      if (tokens[i].front() == '/' || tokens[i].front() == '-') return false;
      continue;
    }
    if (!iequals(ptoks[i], tokens[i])) return false;
  }
  return tokens.size() == ptoks.size();
}

#ifndef _WIN32
ToolResult run_process(const std::vector<std::string>& args, int timeout_seconds) {
  int fds[2];
  if (pipe2(fds, O_CLOEXEC) != 0) return ToolResult::error(ErrorCode::SpawnFailed, "SpawnFailed: pipe() failed");

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_addopen(&actions, 0, "/dev/null", O_RDONLY, 0);
  posix_spawn_file_actions_adddup2(&actions, fds[1], 1);
  posix_spawn_file_actions_adddup2(&actions, fds[1], 2);

  posix_spawnattr_t attr;
  posix_spawnattr_init(&attr);
  posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETPGROUP);
  posix_spawnattr_setpgroup(&attr, 0);

  std::vector<char*> argv;
  for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
  argv.push_back(nullptr);

  pid_t pid = 0;
  g_spawned.fetch_add(1, std::memory_order_relaxed);
  const int rc = posix_spawnp(&pid, argv[0], &actions, &attr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  posix_spawnattr_destroy(&attr);
  close(fds[1]);
  if (rc != 0) {
    close(fds[0]);
    return ToolResult::error(ErrorCode::SpawnFailed,
                             "SpawnFailed: could not start '" + args.front() + "' (errno " + std::to_string(rc) + ")");
  }

  using Clock = std::chrono::steady_clock;
  const auto deadline = Clock::now() + std::chrono::seconds(timeout_seconds);
  const auto remaining_ms = [&] {
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
    return static_cast<int>(std::max<long long>(0, left));
  };

  std::string output;
  bool timed_out = false;
  char buf[4096];
  while (true) {
    pollfd pfd{fds[0], POLLIN, 0};
    const int ready = poll(&pfd, 1, remaining_ms());
    if (ready == 0) {
      timed_out = true;
      break;
    }
    if (ready < 0) {
      if (errno == EINTR) continue;
      break;
    }
    const ssize_t n = read(fds[0], buf, sizeof buf);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;
    if (output.size() < kMaxCapturedBytes)
      output.append(buf, static_cast<std::size_t>(std::min<ssize_t>(n, kMaxCapturedBytes - output.size())));
  }
  close(fds[0]);

  int status = 0;
  while (!timed_out) {
    const pid_t w = waitpid(pid, &status, WNOHANG);
    if (w == pid) break;
    if (w < 0 && errno != EINTR) break;
    if (remaining_ms() == 0) {
      timed_out = true;
      break;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  if (timed_out) {
    kill(-pid, SIGKILL);
    waitpid(pid, &status, 0);
    return ToolResult::error(ErrorCode::Timeout, "Timeout: command exceeded " + std::to_string(timeout_seconds) +
                                                     "s\n" + output);
  }

  if (WIFEXITED(status) && WEXITSTATUS(status) == 0) return ToolResult::ok(std::move(output));
  const int code = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
  return ToolResult::error(ErrorCode::NonZeroExit,
                           output + (output.empty() || output.back() == '\n' ? "" : "\n") +
                               "NonZeroExit: exit code " + std::to_string(code));
}
#else
ToolResult run_process(const std::vector<std::string>& args, int /*timeout_seconds*/) {
  std::string cmd;
  for (const auto& a : args) cmd += (cmd.empty() ? "" : " ") + a;
  g_spawned.fetch_add(1, std::memory_order_relaxed);
  FILE* pipe = _popen((cmd + " 2>&1").c_str(), "r");
  if (pipe == nullptr) return ToolResult::error(ErrorCode::SpawnFailed, "SpawnFailed: could not start " + cmd);
  std::string output;
  char buf[4096];
  while (std::size_t n = fread(buf, 1, sizeof buf, pipe)) {
    if (output.size() < kMaxCapturedBytes) output.append(buf, n);
  }
  const int code = _pclose(pipe);
  if (code == 0) return ToolResult::ok(std::move(output));
  return ToolResult::error(ErrorCode::NonZeroExit, output + "\nNonZeroExit: exit code " + std::to_string(code));
}
#endif

}  // namespace

void ShellPolicy::validate() const {
  if (timeout_seconds <= 0) throw Error(ErrorCode::InvalidArgument, "shell timeout must be positive");
  if (mode == ShellMode::Fixture && fixture_map.empty())
    throw Error(ErrorCode::InvalidArgument, "fixture mode requires a non-empty fixture map");
}

std::string normalize_command(std::string_view command) {
  while (!command.empty() && std::isspace(static_cast<unsigned char>(command.front()))) command.remove_prefix(1);
  while (!command.empty() && std::isspace(static_cast<unsigned char>(command.back()))) command.remove_suffix(1);
  if (command.size() >= 2 && command.front() == '"' && command.back() == '"')
    command = command.substr(1, command.size() - 2);

  auto tokens = split_ws(command);
  if (!tokens.empty()) {
    std::transform(tokens.front().begin(), tokens.front().end(), tokens.front().begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  }
  std::string out;
  for (const auto& t : tokens) out += (out.empty() ? "" : " ") + t;
  return out;
}

bool has_only_safe_characters(std::string_view normalized) {
  return std::all_of(normalized.begin(), normalized.end(), [](char ch) {
    const auto c = static_cast<unsigned char>(ch);
    if (c >= 0x80) return false;
    return std::isalnum(c) || c == ' ' || c == '.' || c == '_' || c == '-' || c == '/' || c == ':' || c == '@';
  });
}

bool is_allowed(std::string_view command, const ShellPolicy& policy) {
  const std::string normalized = normalize_command(command);
  if (normalized.empty() || !has_only_safe_characters(normalized)) return false;
  const auto tokens = split_ws(normalized);
  return std::any_of(policy.allowlist.begin(), policy.allowlist.end(),
                     [&](const std::string& p) { return matches_pattern(tokens, p); });
}

ToolResult shell_execute(std::string_view command, const ShellPolicy& policy) {
  const std::string normalized = normalize_command(command);
  if (!is_allowed(normalized, policy)) {
    std::string allowed;
    for (const auto& p : policy.allowlist) allowed += (allowed.empty() ? "'" : ", '") + p + "'";
    return ToolResult::error(ErrorCode::DisallowedCommand, "DisallowedCommand: '" + std::string(command) +
                                                               "' is not permitted. Allowed commands: " + allowed);
  }

  if (policy.mode == ShellMode::Fixture) {
    for (const auto& [key, output] : policy.fixture_map) {
      if (normalize_command(key) == normalized) return ToolResult::ok(output);
    }
    return ToolResult::error(ErrorCode::FixtureMiss, "FixtureMiss: no recorded output for '" + normalized + "'");
  }
  if (policy.timeout_seconds <= 0)
    return ToolResult::error(ErrorCode::InvalidArgument, "shell timeout must be positive");
  return run_process(split_ws(normalized), policy.timeout_seconds);
}

std::uint64_t spawned_process_count() { return g_spawned.load(std::memory_order_relaxed); }

}  // namespace secaudit
