#pragma once

#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace pman {

inline constexpr int kDefaultMaxTokens = 512;

struct ChatRequest {
  std::string model;
  std::string prompt;
  double temperature = 0.0;
  int max_tokens = kDefaultMaxTokens;
  std::string request_id;
  /// Position in the assessor's escalation loop; part of the fingerprint.
  int attempt = 0;

  /// Throws ConfigError if temperature is outside [0, 2], the prompt is
  /// empty, or max_tokens is not positive.
  void validate() const;
};

struct ChatResponse {
  std::string text;  // may be empty
  std::string backend;
  std::chrono::milliseconds latency{0};
  std::string raw;  // verbatim payload, kept for the audit log
};

/// Hex SHA-256 over (model, prompt, attempt). Scripted backends key on it.
std::string request_fingerprint(const std::string& model, const std::string& prompt, int attempt);

/// Canned responses for the scripted backend.
///
/// Lookup order for a request: exact fingerprint entries first (replayed in
/// list order, one per call), then the first `contains` rule whose needle
/// occurs in the prompt (indexed by the request's attempt number). Missing
/// or exhausted entries are configuration errors.
struct Script {
  struct Rule {
    std::string contains;
    std::string model;  // empty matches any model
    std::vector<std::string> responses;
  };

  std::map<std::string, std::vector<std::string>> by_fingerprint;
  std::vector<Rule> rules;

  /// Registers `responses[i]` under fingerprint(model, prompt, i).
  void add_attempts(const std::string& model, const std::string& prompt,
                    const std::vector<std::string>& responses);

  /// Reads a script file (JSON Lines). Accepts script lines
  /// {"fingerprint", "responses"} / {"contains", "responses", "model"?} and
  /// audit-log lines {"fingerprint", "response", "ok": true}, so a recorded
  /// live run can be replayed offline.
  static Script load(const std::string& path);

  nlohmann::json to_json_lines() const;
};

struct RetryPolicy {
  /// One entry per transport retry; the number of retries is its length.
  std::vector<std::chrono::milliseconds> backoff{std::chrono::milliseconds(500),
                                                 std::chrono::milliseconds(1000),
                                                 std::chrono::milliseconds(2000),
                                                 std::chrono::milliseconds(4000)};
};

struct BackendConfig {
  enum class Kind { Http, Scripted };

  Kind kind = Kind::Scripted;
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  /// Name of the environment variable holding the API key. Empty sends no
  /// Authorization header.
  std::string api_key_env = "OPENAI_API_KEY";
  std::chrono::milliseconds timeout{120000};
  Script script;
  /// Requests per second; 0 disables limiting.
  double rate_limit = 0.0;
  RetryPolicy retry;
};

std::string to_string(BackendConfig::Kind kind);

/// A single wire exchange. Implementations throw RetryableTransport for
/// failures worth retrying (connection errors, timeouts, 429, 5xx) and
/// TransportError for the rest.
class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual ChatResponse send(const ChatRequest& req) = 0;
  virtual std::string identity() const = 0;
};

class RetryableTransport : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Append-only JSON Lines record of every complete() call, failed ones
/// included. Writes are serialized; entries can also be kept in memory.
class AuditLog {
 public:
  AuditLog() = default;
  explicit AuditLog(const std::string& path, bool append = false);
  ~AuditLog();

  void append(const nlohmann::json& entry);

  std::size_t size() const;
  std::vector<nlohmann::json> entries() const;

 private:
  mutable std::mutex mu_;
  std::unique_ptr<std::ofstream> out_;
  std::vector<nlohmann::json> entries_;
};

/// Token bucket: `rate` tokens per second, burst of max(1, rate).
class RateLimiter {
 public:
  explicit RateLimiter(double rate);
  void acquire();

 private:
  using Clock = std::chrono::steady_clock;
  std::mutex mu_;
  double rate_;
  double capacity_;
  double tokens_;
  Clock::time_point last_;
};

/// The uniform chat-completion entry point. Safe to call concurrently.
class ChatClient {
 public:
  explicit ChatClient(BackendConfig cfg, std::shared_ptr<AuditLog> audit = nullptr);
  ChatClient(std::unique_ptr<ChatBackend> backend, RetryPolicy retry, double rate_limit,
             std::shared_ptr<AuditLog> audit = nullptr);

  /// One response per request. Transport failures are retried per the
  /// backoff schedule at the same temperature; exhaustion throws
  /// TransportError. Every call, successful or not, is audited.
  ChatResponse complete(const ChatRequest& req);

  std::string identity() const { return backend_->identity(); }
  const std::shared_ptr<AuditLog>& audit() const { return audit_; }

 private:
  std::unique_ptr<ChatBackend> backend_;
  RetryPolicy retry_;
  RateLimiter limiter_;
  std::shared_ptr<AuditLog> audit_;
};

std::unique_ptr<ChatBackend> make_backend(const BackendConfig& cfg);
std::unique_ptr<ChatBackend> make_scripted_backend(Script script);
std::unique_ptr<ChatBackend> make_http_backend(const BackendConfig& cfg);

/// Request body sent to chat-completion endpoints.
nlohmann::json chat_request_body(const ChatRequest& req);

/// Extracts choices[0].message.content; null content is an empty string.
/// Throws TransportError when the payload has no such field.
std::string parse_chat_response(const std::string& body);

}  // namespace pman
