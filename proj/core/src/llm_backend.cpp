#include "secaudit/llm_backend.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "secaudit/errors.hpp"

namespace secaudit {

using nlohmann::json;

std::string_view to_string(Role role) {
  switch (role) {
    case Role::System: return "system";
    case Role::User: return "user";
    case Role::Assistant: return "assistant";
  }
  return "user";
}

void CompletionRequest::validate() const {
  if (messages.empty()) throw Error(ErrorCode::InvalidArgument, "completion request has no messages");
  if (messages.front().role != Role::System)
    throw Error(ErrorCode::InvalidArgument, "first message must have the system role");
  for (const auto& m : messages) {
    if (m.role != Role::System && m.content.empty())
      throw Error(ErrorCode::InvalidArgument,
                  std::string(to_string(m.role)) + " message has empty content");
  }
  if (!(temperature >= 0.0 && temperature <= 2.0))
    throw Error(ErrorCode::InvalidArgument, "temperature must be in [0, 2]");
  if (max_tokens <= 0) throw Error(ErrorCode::InvalidArgument, "max_tokens must be positive");
}

void BackendConfig::validate() const {
  if (!parse_url(endpoint_url))
    throw Error(ErrorCode::InvalidArgument, "endpoint_url is not an absolute URL: '" + endpoint_url + "'");
  if (timeout_seconds <= 0) throw Error(ErrorCode::InvalidArgument, "timeout_seconds must be positive");
  if (max_retries < 0) throw Error(ErrorCode::InvalidArgument, "max_retries must be nonnegative");
  if (retry_backoff_ms < 0) throw Error(ErrorCode::InvalidArgument, "retry_backoff_ms must be nonnegative");
  if (api_key_env_var.empty()) throw Error(ErrorCode::InvalidArgument, "api_key_env_var is empty");
}

std::string truncate_at_stop(std::string text, std::span<const std::string> stops) {
  std::size_t cut = std::string::npos;
  for (const auto& stop : stops) {
    if (stop.empty()) continue;
    cut = std::min(cut, text.find(stop));
  }
  if (cut != std::string::npos) text.erase(cut);
  return text;
}

std::optional<ParsedUrl> parse_url(std::string_view url) {
  const auto sep = url.find("://");
  if (sep == std::string_view::npos) return std::nullopt;
  ParsedUrl out;
  out.scheme = std::string(url.substr(0, sep));
  std::transform(out.scheme.begin(), out.scheme.end(), out.scheme.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (out.scheme != "http" && out.scheme != "https") return std::nullopt;

  std::string_view rest = url.substr(sep + 3);
  const auto slash = std::find(rest.begin(), rest.end(), '/');
  std::string_view authority(rest.data(), static_cast<std::size_t>(slash - rest.begin()));
  out.path = slash == rest.end() ? "/" : std::string(slash, rest.end());
  if (authority.empty() || std::find(authority.begin(), authority.end(), '@') != authority.end()) return std::nullopt;

  out.port = out.scheme == "https" ? 443 : 80;
  const auto colon = authority.rfind(':');
  if (colon != std::string_view::npos && std::find(authority.begin(), authority.end(), ']') == authority.end()) {
    std::string_view port = authority.substr(colon + 1);
    int value = 0;
    auto [ptr, ec] = std::from_chars(port.data(), port.data() + port.size(), value);
    if (port.empty() || ec != std::errc{} || ptr != port.data() + port.size() || value <= 0 ||
        value > 65535)
      return std::nullopt;
    out.port = value;
    authority = authority.substr(0, colon);
  }
  if (authority.empty()) return std::nullopt;
  out.host = std::string(authority);
  return out;
}

std::string build_request_body(const CompletionRequest& request, const std::string& model_id) {
  json body;
  body["model"] = request.model_id.empty() ? model_id : request.model_id;
  json messages = json::array();
  for (const auto& m : request.messages) {
    messages.push_back({{"role", to_string(m.role)}, {"content", m.content}});
  }
  body["messages"] = std::move(messages);
  body["temperature"] = request.temperature;
  body["max_tokens"] = request.max_tokens;
  if (!request.stop_sequences.empty()) body["stop"] = request.stop_sequences;
  return body.dump();
}

std::string parse_completion_body(std::string_view body) {
  json doc = json::parse(body, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) throw Error(ErrorCode::MalformedResponse, "response body is not JSON");
  if (!doc.is_object() || !doc.contains("choices") || !doc["choices"].is_array() ||
      doc["choices"].empty())
    throw Error(ErrorCode::MalformedResponse, "response has no choices");
  const json& choice = doc["choices"][0];
  if (choice.contains("message") && choice["message"].is_object()) {
    const json& msg = choice["message"];
    if (msg.contains("content") && msg["content"].is_string()) return msg["content"].get<std::string>();
  }
  if (choice.contains("text") && choice["text"].is_string()) return choice["text"].get<std::string>();
  throw Error(ErrorCode::MalformedResponse, "first choice carries no completion text");
}

HttpBackend::HttpBackend(BackendConfig config, std::shared_ptr<HttpTransport> transport)
    : config_(std::move(config)), transport_(std::move(transport)) {
  config_.validate();
  if (!transport_) throw Error(ErrorCode::InvalidArgument, "null HTTP transport");
}

std::string HttpBackend::complete(const CompletionRequest& request) {
  request.validate();

  const char* key = std::getenv(config_.api_key_env_var.c_str());
  if (key == nullptr || *key == '\0')
    throw Error(ErrorCode::AuthError, "environment variable " + config_.api_key_env_var + " is not set");

  std::string url = config_.endpoint_url;
  if (auto parsed = parse_url(url); parsed && parsed->path == "/") {
    if (url.back() == '/') url.pop_back();
    url += "/v1/chat/completions";
  }

  const std::vector<HttpHeader> headers{
      {"Authorization", std::string("Bearer ") + key},
      {"Content-Type", "application/json"},
  };
  const std::string body = build_request_body(request, config_.model_id);
  const auto timeout = std::chrono::seconds(config_.timeout_seconds);

  std::string last_failure;
  ErrorCode last_code = ErrorCode::NetworkError;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0 && config_.retry_backoff_ms > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(config_.retry_backoff_ms << (attempt - 1)));
    }
    HttpResponse response;
    try {
      response = transport_->post(url, headers, body, timeout);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NetworkError) throw;
      last_code = ErrorCode::NetworkError;
      last_failure = e.what();
      continue;
    }

    if (response.status == 401 || response.status == 403)
      throw Error(ErrorCode::AuthError, "HTTP " + std::to_string(response.status) + " from " + url);
    if (response.status == 429) {
      last_code = ErrorCode::RateLimited;
      last_failure = "HTTP 429 from " + url;
      continue;
    }
    if (response.status >= 500) {
      last_code = ErrorCode::NetworkError;
      last_failure = "HTTP " + std::to_string(response.status) + " from " + url;
      continue;
    }
    if (response.status < 200 || response.status >= 300)
      throw Error(ErrorCode::MalformedResponse,
                  "HTTP " + std::to_string(response.status) + ": " + response.body.substr(0, 200));

    return truncate_at_stop(parse_completion_body(response.body), request.stop_sequences);
  }
  throw Error(last_code, last_failure + " (after " + std::to_string(config_.max_retries + 1) + " attempts)");
}

std::pair<std::string, std::size_t> scripted_complete(const CompletionRequest& request,
                                                      std::span<const ScriptedExchange> script,
                                                      std::size_t cursor) {
  if (cursor >= script.size())
    throw Error(ErrorCode::ScriptExhausted,
                "completion #" + std::to_string(cursor + 1) + " requested but the script has " +
                    std::to_string(script.size()) + " entries");
  const ScriptedExchange& entry = script[cursor];
  if (entry.expect_substring) {
    const ChatMessage* latest_user = nullptr;
    for (auto it = request.messages.rbegin(); it != request.messages.rend(); ++it) {
      if (it->role == Role::User) {
        latest_user = &*it;
        break;
      }
    }
    if (latest_user == nullptr || latest_user->content.find(*entry.expect_substring) == std::string::npos)
      throw Error(ErrorCode::ExpectationMismatch,
                  "script entry " + std::to_string(cursor + 1) + " expected '" + *entry.expect_substring +
                      "' in the latest user message");
  }
  return {truncate_at_stop(entry.reply, request.stop_sequences), cursor + 1};
}

ScriptedSession::ScriptedSession(std::shared_ptr<const Script> script) : script_(std::move(script)) {
  if (!script_) throw Error(ErrorCode::InvalidArgument, "null script");
}

std::string ScriptedSession::complete(const CompletionRequest& request) {
  request.validate();
  auto [reply, next] = scripted_complete(request, *script_, cursor_);
  cursor_ = next;
  return reply;
}

Script parse_script_json(std::string_view json_text) {
  json doc = json::parse(json_text, nullptr, false);
  if (doc.is_discarded()) throw Error(ErrorCode::InvalidArgument, "script is not valid JSON");
  if (doc.is_object() && doc.contains("exchanges")) doc = doc["exchanges"];
  if (!doc.is_array()) throw Error(ErrorCode::InvalidArgument, "script must be a JSON array of exchanges");
  Script script;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const json& e = doc[i];
    if (!e.is_object() || !e.contains("reply") || !e["reply"].is_string())
      throw Error(ErrorCode::InvalidArgument, "script entry " + std::to_string(i + 1) + " lacks a string 'reply'");
    ScriptedExchange x;
    x.reply = e["reply"].get<std::string>();
    if (x.reply.empty())
      throw Error(ErrorCode::InvalidArgument, "script entry " + std::to_string(i + 1) + " has an empty reply");
    if (e.contains("expect_substring") && !e["expect_substring"].is_null()) {
      if (!e["expect_substring"].is_string())
        throw Error(ErrorCode::InvalidArgument, "expect_substring must be a string");
      x.expect_substring = e["expect_substring"].get<std::string>();
    }
    script.push_back(std::move(x));
  }
  return script;
}

Script load_script(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ScriptMissing, "cannot open script " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_script_json(ss.str());
}

}  // namespace secaudit
