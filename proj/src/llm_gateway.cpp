#include "pman/llm_gateway.hpp"

#include <algorithm>
#include <fstream>
#include <thread>

#include "pman/digest.hpp"
#include "pman/error.hpp"
#include "pman/jsonl.hpp"

namespace pman {

using nlohmann::json;

void ChatRequest::validate() const {
  if (!(temperature >= 0.0 && temperature <= 2.0)) {
    throw ConfigError("temperature " + std::to_string(temperature) + " outside [0, 2]");
  }
  if (prompt.empty()) throw ConfigError("empty prompt");
  if (max_tokens <= 0) throw ConfigError("max_tokens must be positive");
}

std::string request_fingerprint(const std::string& model, const std::string& prompt, int attempt) {
  std::string key;
  key.reserve(model.size() + prompt.size() + 16);
  key += model;
  key += '\x1f';
  key += prompt;
  key += '\x1f';
  key += std::to_string(attempt);
  return sha256_hex(key);
}

std::string to_string(BackendConfig::Kind kind) {
  return kind == BackendConfig::Kind::Http ? "http" : "scripted";
}

// --- Script -----------------------------------------------------------------

void Script::add_attempts(const std::string& model, const std::string& prompt,
                          const std::vector<std::string>& responses) {
  for (std::size_t i = 0; i < responses.size(); ++i) {
    by_fingerprint[request_fingerprint(model, prompt, static_cast<int>(i))].push_back(responses[i]);
  }
}

Script Script::load(const std::string& path) {
  Script script;
  const auto lines = read_jsonl(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const json& j = lines[i];
    const std::string where = path + " line " + std::to_string(i + 1);
    if (!j.is_object()) throw ConfigError(where + ": not a JSON object");
    if (j.contains("responses")) {
      auto responses = j.at("responses").get<std::vector<std::string>>();
      if (j.contains("fingerprint")) {
        auto& list = script.by_fingerprint[j.at("fingerprint").get<std::string>()];
        list.insert(list.end(), responses.begin(), responses.end());
      } else if (j.contains("contains")) {
        script.rules.push_back(
            {j.at("contains").get<std::string>(), j.value("model", std::string()), std::move(responses)});
      } else {
        throw ConfigError(where + ": script line needs 'fingerprint' or 'contains'");
      }
    } else if (j.contains("fingerprint") && j.contains("response")) {
      // Audit-log line: replay successful exchanges only.
      if (j.value("ok", false) && j.at("response").is_string()) {
        script.by_fingerprint[j.at("fingerprint").get<std::string>()].push_back(
            j.at("response").get<std::string>());
      }
    } else {
      throw ConfigError(where + ": unrecognized script line");
    }
  }
  return script;
}

json Script::to_json_lines() const {
  json out = json::array();
  for (const auto& [fp, responses] : by_fingerprint) {
    out.push_back({{"fingerprint", fp}, {"responses", responses}});
  }
  for (const auto& rule : rules) {
    json j{{"contains", rule.contains}, {"responses", rule.responses}};
    if (!rule.model.empty()) j["model"] = rule.model;
    out.push_back(std::move(j));
  }
  return out;
}

// --- Scripted backend -------------------------------------------------------

namespace {

class ScriptedBackend final : public ChatBackend {
 public:
  explicit ScriptedBackend(Script script) : script_(std::move(script)) {}

  ChatResponse send(const ChatRequest& req) override {
    const std::string fp = request_fingerprint(req.model, req.prompt, req.attempt);
    std::string text;
    {
      std::lock_guard lock(mu_);
      if (auto it = script_.by_fingerprint.find(fp); it != script_.by_fingerprint.end()) {
        std::size_t& cursor = cursors_[fp];
        if (cursor >= it->second.size()) {
          throw ConfigError("scripted responses exhausted for fingerprint " + fp);
        }
        text = it->second[cursor++];
      } else {
        const Script::Rule* rule = find_rule(req);
        if (rule == nullptr) {
          throw ConfigError("no scripted response for fingerprint " + fp + " (request '" +
                            req.request_id + "')");
        }
        const auto attempt = static_cast<std::size_t>(req.attempt);
        if (attempt >= rule->responses.size()) {
          throw ConfigError("scripted responses exhausted for rule '" + rule->contains +
                            "' at attempt " + std::to_string(req.attempt));
        }
        text = rule->responses[attempt];
      }
    }
    ChatResponse resp;
    resp.raw = json{{"scripted", true}, {"text", text}}.dump();
    resp.text = std::move(text);
    resp.backend = identity();
    return resp;
  }

  std::string identity() const override { return "scripted"; }

 private:
  const Script::Rule* find_rule(const ChatRequest& req) const {
    for (const auto& rule : script_.rules) {
      if (!rule.model.empty() && rule.model != req.model) continue;
      if (req.prompt.find(rule.contains) != std::string::npos) return &rule;
    }
    return nullptr;
  }

  std::mutex mu_;
  Script script_;
  std::map<std::string, std::size_t> cursors_;
};

}  // namespace

std::unique_ptr<ChatBackend> make_scripted_backend(Script script) {
  return std::make_unique<ScriptedBackend>(std::move(script));
}

std::unique_ptr<ChatBackend> make_backend(const BackendConfig& cfg) {
  if (cfg.kind == BackendConfig::Kind::Http) return make_http_backend(cfg);
  return make_scripted_backend(cfg.script);
}

// --- Audit log --------------------------------------------------------------

AuditLog::AuditLog(const std::string& path, bool append)
    : out_(std::make_unique<std::ofstream>(
          path, std::ios::binary | (append ? std::ios::app : std::ios::trunc))) {
  if (!*out_) throw DataError("cannot write audit log " + path);
}

AuditLog::~AuditLog() = default;

void AuditLog::append(const json& entry) {
  std::lock_guard lock(mu_);
  if (out_) {
    *out_ << dump_line(entry) << '\n';
    out_->flush();
  }
  entries_.push_back(entry);
}

std::size_t AuditLog::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

std::vector<json> AuditLog::entries() const {
  std::lock_guard lock(mu_);
  return entries_;
}

// --- Rate limiter -----------------------------------------------------------

RateLimiter::RateLimiter(double rate)
    : rate_(rate), capacity_(std::max(1.0, rate)), tokens_(capacity_), last_(Clock::now()) {}

void RateLimiter::acquire() {
  if (rate_ <= 0.0) return;
  std::unique_lock lock(mu_);
  for (;;) {
    const auto now = Clock::now();
    const double elapsed = std::chrono::duration<double>(now - last_).count();
    tokens_ = std::min(capacity_, tokens_ + elapsed * rate_);
    last_ = now;
    if (tokens_ >= 1.0) {
      tokens_ -= 1.0;
      return;
    }
    const auto wait = std::chrono::duration<double>((1.0 - tokens_) / rate_);
    // Sleeping under the lock queues later callers behind this one.
    std::this_thread::sleep_for(wait);
  }
}

// --- Client -----------------------------------------------------------------

ChatClient::ChatClient(BackendConfig cfg, std::shared_ptr<AuditLog> audit)
    : backend_(make_backend(cfg)),
      retry_(cfg.retry),
      limiter_(cfg.rate_limit),
      audit_(std::move(audit)) {}

ChatClient::ChatClient(std::unique_ptr<ChatBackend> backend, RetryPolicy retry, double rate_limit,
                       std::shared_ptr<AuditLog> audit)
    : backend_(std::move(backend)),
      retry_(std::move(retry)),
      limiter_(rate_limit),
      audit_(std::move(audit)) {}

ChatResponse ChatClient::complete(const ChatRequest& req) {
  json entry{{"request_id", req.request_id},
             {"fingerprint", request_fingerprint(req.model, req.prompt, req.attempt)},
             {"backend", backend_->identity()},
             {"model", req.model},
             {"temperature", req.temperature},
             {"max_tokens", req.max_tokens},
             {"attempt", req.attempt},
             {"prompt", req.prompt}};
  const auto record = [&](bool ok, const ChatResponse* resp, const std::string& error,
                          std::size_t retries) {
    if (!audit_) return;
    entry["ok"] = ok;
    entry["transport_retries"] = retries;
    entry["response"] = resp ? json(resp->text) : json(nullptr);
    entry["raw"] = resp ? json(resp->raw) : json(nullptr);
    entry["latency_ms"] = resp ? resp->latency.count() : 0;
    entry["error"] = error.empty() ? json(nullptr) : json(error);
    audit_->append(entry);
  };

  std::size_t retries = 0;
  try {
    req.validate();
    for (;;) {
      limiter_.acquire();
      try {
        ChatResponse resp = backend_->send(req);
        record(true, &resp, {}, retries);
        return resp;
      } catch (const RetryableTransport& e) {
        if (retries >= retry_.backoff.size()) {
          throw TransportError("request '" + req.request_id + "' failed after " +
                               std::to_string(retries) + " retries: " + e.what());
        }
        std::this_thread::sleep_for(retry_.backoff[retries]);
        ++retries;
      }
    }
  } catch (const std::exception& e) {
    record(false, nullptr, e.what(), retries);
    throw;
  }
}

}  // namespace pman
