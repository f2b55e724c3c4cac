#include <httplib.h>

#include <cstdlib>

#include "pman/error.hpp"
#include "pman/llm_gateway.hpp"

namespace pman {

using nlohmann::json;

json chat_request_body(const ChatRequest& req) {
  return json{{"model", req.model},
              {"messages", json::array({json{{"role", "user"}, {"content", req.prompt}}})},
              {"temperature", req.temperature},
              {"max_tokens", req.max_tokens}};
}

std::string parse_chat_response(const std::string& body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::parse_error& e) {
    throw TransportError(std::string("unparseable completion payload: ") + e.what());
  }
  const auto choices = j.find("choices");
  if (choices == j.end() || !choices->is_array() || choices->empty()) {
    throw TransportError("completion payload has no choices");
  }
  const json& first = (*choices)[0];
  if (!first.contains("message") || !first["message"].is_object()) {
    throw TransportError("completion payload has no message");
  }
  const json& content = first["message"].value("content", json(nullptr));
  if (content.is_null()) return {};
  if (!content.is_string()) throw TransportError("message content is not a string");
  return content.get<std::string>();
}

namespace {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Endpoint split_endpoint(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("endpoint '" + url + "' has no scheme");
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

class HttpBackend final : public ChatBackend {
 public:
  explicit HttpBackend(const BackendConfig& cfg)
      : endpoint_(split_endpoint(cfg.endpoint)), url_(cfg.endpoint), timeout_(cfg.timeout) {
    if (!cfg.api_key_env.empty()) {
      const char* key = std::getenv(cfg.api_key_env.c_str());
      if (key == nullptr || *key == '\0') {
        throw ConfigError("environment variable " + cfg.api_key_env + " is not set");
      }
      api_key_ = key;
    }
  }

  ChatResponse send(const ChatRequest& req) override {
    // httplib::Client is not safe for concurrent use; one per call.
    httplib::Client client(endpoint_.origin);
    client.set_connection_timeout(timeout_);
    client.set_read_timeout(timeout_);
    client.set_write_timeout(timeout_);

    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

    const auto start = std::chrono::steady_clock::now();
    auto res = client.Post(endpoint_.path, headers, chat_request_body(req).dump(), "application/json");
    const auto latency = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - start);

    if (!res) {
      throw RetryableTransport("HTTP request to " + url_ + " failed: " + httplib::to_string(res.error()));
    }
    if (res->status == 429 || res->status >= 500) {
      throw RetryableTransport("HTTP " + std::to_string(res->status) + " from " + url_);
    }
    if (res->status < 200 || res->status >= 300) {
      throw TransportError("HTTP " + std::to_string(res->status) + " from " + url_ + ": " + res->body);
    }

    ChatResponse resp;
    resp.text = parse_chat_response(res->body);
    resp.backend = identity();
    resp.latency = latency;
    resp.raw = res->body;
    return resp;
  }

  std::string identity() const override { return "http:" + url_; }

 private:
  Endpoint endpoint_;
  std::string url_;
  std::chrono::milliseconds timeout_;
  std::string api_key_;
};

}  // namespace

std::unique_ptr<ChatBackend> make_http_backend(const BackendConfig& cfg) {
  return std::make_unique<HttpBackend>(cfg);
}

}  // namespace pman
