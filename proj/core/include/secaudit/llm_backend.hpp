#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace secaudit {

enum class Role { System, User, Assistant };

std::string_view to_string(Role role);

struct ChatMessage {
  Role role = Role::User;
  std::string content;
};

struct CompletionRequest {
  std::vector<ChatMessage> messages;
  // Empty means "use the backend's configured model".
  std::string model_id;
  double temperature = 0.0;
  int max_tokens = 1024;
  std::vector<std::string> stop_sequences;

  /// Throws Error(InvalidArgument) when the message list is empty, does not
  /// open with a System message, carries an empty User/Assistant message, or
  /// temperature / max_tokens are out of range.
  void validate() const;
};

struct BackendConfig {
  std::string endpoint_url;
  std::string model_id = "gpt-4";
  int timeout_seconds = 60;
  int max_retries = 2;
  std::string api_key_env_var = "AUDIT_AGENT_API_KEY";
  // Base delay for exponential backoff between retries.
  int retry_backoff_ms = 250;

  void validate() const;
};

struct ScriptedExchange {
  std::optional<std::string> expect_substring;
  std::string reply;
};

using Script = std::vector<ScriptedExchange>;

/// Cuts `text` at the earliest occurrence of any stop sequence.
std::string truncate_at_stop(std::string text, std::span<const std::string> stops);

/// Uniform chat-completion interface used by the agent loop.
class CompletionBackend {
 public:
  virtual ~CompletionBackend() = default;
  virtual std::string complete(const CompletionRequest& request) = 0;
};

// ---------------------------------------------------------------------------
// Live backend

struct HttpHeader {
  std::string name;
  std::string value;
};

struct HttpResponse {
  int status = 0;
  std::string body;
};

/// One POST round trip. Implementations throw Error(NetworkError) when the
/// endpoint cannot be reached or the request times out.
class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpResponse post(const std::string& url, const std::vector<HttpHeader>& headers,
                            const std::string& body, std::chrono::seconds timeout) = 0;
};

/// cpp-httplib backed transport. https requires an OpenSSL-enabled build.
std::shared_ptr<HttpTransport> make_default_transport();

struct ParsedUrl {
  std::string scheme;
  std::string host;
  int port = 0;
  std::string path;
};

/// Absolute http/https URL splitter; nullopt if `url` is not absolute.
std::optional<ParsedUrl> parse_url(std::string_view url);

/// JSON body in the de-facto chat-completions shape.
std::string build_request_body(const CompletionRequest& request, const std::string& model_id);

/// Extracts choices[0].message.content (or choices[0].text). Throws
/// Error(MalformedResponse).
std::string parse_completion_body(std::string_view body);

/// Client for an OpenAI-compatible chat-completions endpoint.
///
/// Retries network failures, 429 and 5xx responses up to max_retries times;
/// 401/403 fail immediately with AuthError. The bearer token is read from the
/// configured environment variable on every call.
class HttpBackend final : public CompletionBackend {
 public:
  explicit HttpBackend(BackendConfig config,
                       std::shared_ptr<HttpTransport> transport = make_default_transport());

  std::string complete(const CompletionRequest& request) override;

  const BackendConfig& config() const { return config_; }

 private:
  BackendConfig config_;
  std::shared_ptr<HttpTransport> transport_;
};

// ---------------------------------------------------------------------------
// Scripted backend

/// Replays `script[cursor]`. Throws ScriptExhausted past the end and
/// ExpectationMismatch when the entry's expect_substring is missing from the
/// latest user message. Returns the reply and the advanced cursor.
std::pair<std::string, std::size_t> scripted_complete(const CompletionRequest& request,
                                                      std::span<const ScriptedExchange> script,
                                                      std::size_t cursor);

/// Per-run view over a shared immutable script; owns the cursor.
class ScriptedSession final : public CompletionBackend {
 public:
  explicit ScriptedSession(std::shared_ptr<const Script> script);

  std::string complete(const CompletionRequest& request) override;

  std::size_t cursor() const { return cursor_; }

 private:
  std::shared_ptr<const Script> script_;
  std::size_t cursor_ = 0;
};

Script parse_script_json(std::string_view json_text);
Script load_script(const std::filesystem::path& path);

}  // namespace secaudit
