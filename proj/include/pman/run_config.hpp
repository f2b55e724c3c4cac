#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pman/assessor.hpp"
#include "pman/llm_gateway.hpp"

namespace pman {

/// Settings shared by the commands that talk to a backend.
///
/// Config file format: one `key = value` per line, `#` starts a comment.
/// Keys: model, backend (http | scripted), endpoint, api_key_env, script,
/// rate_limit, timeout_ms, backoff_ms (comma list), schedule (comma list),
/// max_tokens, workers, cot (true | false). Secrets are never read from the
/// file; api_key_env names the environment variable that holds the key.
struct RunConfig {
  std::string model = "gpt-4-0613";
  BackendConfig::Kind backend = BackendConfig::Kind::Http;
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  std::string api_key_env = "OPENAI_API_KEY";
  std::string script_path;
  double rate_limit = 0.0;
  int timeout_ms = 120000;
  std::vector<int> backoff_ms{500, 1000, 2000, 4000};
  EscalationSchedule schedule;
  int max_tokens = kDefaultMaxTokens;
  unsigned workers = 4;
  bool cot = true;

  /// Applies `key = value` lines from `path` over the current values.
  void load_file(const std::string& path);
  void set(const std::string& key, const std::string& value);

  /// Backend settings; loads the script file for the scripted backend.
  BackendConfig backend_config() const;

  /// Canonical JSON of every setting; contains no secrets.
  nlohmann::json to_json() const;
  std::string hash() const;
};

/// Provenance of one command invocation, written before any backend call.
struct RunManifest {
  std::string command;
  nlohmann::json config = nlohmann::json::object();
  std::string config_hash;
  std::vector<std::string> inputs;  // paths; recorded as basename + sha256
  std::uint64_t seed = 0;
  bool has_seed = false;
  nlohmann::json extra = nlohmann::json::object();

  /// Everything except the timestamp.
  nlohmann::json body() const;
  /// SHA-256 of body(); stamped into every output line.
  std::string digest() const;
  /// body() plus digest and timestamp (SOURCE_DATE_EPOCH when set).
  nlohmann::json document() const;
  void write(const std::string& path) const;
};

/// ISO-8601 UTC; honors SOURCE_DATE_EPOCH for reproducible builds and runs.
std::string run_timestamp();

}  // namespace pman
