#include "pman/run_config.hpp"

#include <array>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>

#include "pman/digest.hpp"
#include "pman/error.hpp"
#include "pman/jsonl.hpp"
#include "pman/prompting.hpp"
#include "text_util.hpp"

namespace pman {

using nlohmann::json;

namespace {

double to_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  try {
    const double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  throw ConfigError("config key '" + key + "': not a number: '" + v + "'");
}

long to_long(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  try {
    const long n = std::stol(v, &used);
    if (used == v.size()) return n;
  } catch (const std::exception&) {
  }
  throw ConfigError("config key '" + key + "': not an integer: '" + v + "'");
}

bool to_bool(const std::string& key, const std::string& v) {
  const std::string s = detail::to_lower(v);
  if (s == "true" || s == "yes" || s == "1" || s == "on") return true;
  if (s == "false" || s == "no" || s == "0" || s == "off") return false;
  throw ConfigError("config key '" + key + "': not a boolean: '" + v + "'");
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
  if (key == "model") {
    model = value;
  } else if (key == "backend") {
    if (value == "http") backend = BackendConfig::Kind::Http;
    else if (value == "scripted") backend = BackendConfig::Kind::Scripted;
    else throw ConfigError("unknown backend '" + value + "' (expected http or scripted)");
  } else if (key == "endpoint") {
    endpoint = value;
  } else if (key == "api_key_env") {
    api_key_env = value;
  } else if (key == "script") {
    script_path = value;
  } else if (key == "rate_limit") {
    rate_limit = to_double(key, value);
    if (rate_limit < 0) throw ConfigError("rate_limit must be >= 0");
  } else if (key == "timeout_ms") {
    timeout_ms = static_cast<int>(to_long(key, value));
  } else if (key == "backoff_ms") {
    backoff_ms.clear();
    std::size_t pos = 0;
    while (pos <= value.size()) {
      std::size_t comma = value.find(',', pos);
      if (comma == std::string::npos) comma = value.size();
      const std::string item(detail::trim(std::string_view(value).substr(pos, comma - pos)));
      if (!item.empty()) backoff_ms.push_back(static_cast<int>(to_long(key, item)));
      pos = comma + 1;
    }
  } else if (key == "schedule") {
    schedule = EscalationSchedule::parse(value);
  } else if (key == "max_tokens") {
    max_tokens = static_cast<int>(to_long(key, value));
    if (max_tokens <= 0) throw ConfigError("max_tokens must be positive");
  } else if (key == "workers") {
    const long w = to_long(key, value);
    if (w < 1) throw ConfigError("workers must be >= 1");
    workers = static_cast<unsigned>(w);
  } else if (key == "cot") {
    cot = to_bool(key, value);
  } else if (key == "api_key" || key == "credentials") {
    throw ConfigError("secrets are not accepted in config files; set api_key_env instead");
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

void RunConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string_view body = detail::trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key(detail::trim(body.substr(0, eq)));
    const std::string value(detail::trim(body.substr(eq + 1)));
    try {
      set(key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

BackendConfig RunConfig::backend_config() const {
  BackendConfig cfg;
  cfg.kind = backend;
  cfg.endpoint = endpoint;
  cfg.api_key_env = api_key_env;
  cfg.timeout = std::chrono::milliseconds(timeout_ms);
  cfg.rate_limit = rate_limit;
  cfg.retry.backoff.clear();
  for (int ms : backoff_ms) cfg.retry.backoff.emplace_back(ms);
  if (backend == BackendConfig::Kind::Scripted) {
    if (script_path.empty()) throw ConfigError("scripted backend needs a script file (--script)");
    cfg.script = Script::load(script_path);
  }
  return cfg;
}

json RunConfig::to_json() const {
  json j{{"model", model},
         {"backend", pman::to_string(backend)},
         {"schedule", schedule.temperatures()},
         {"max_tokens", max_tokens},
         {"cot", cot},
         {"rate_limit", rate_limit},
         {"backoff_ms", backoff_ms},
         {"timeout_ms", timeout_ms}};
  if (backend == BackendConfig::Kind::Http) {
    j["endpoint"] = endpoint;
    j["api_key_env"] = api_key_env;
  } else if (!script_path.empty()) {
    // Content, not location, identifies a script.
    j["script_sha256"] = sha256_file_hex(script_path);
  }
  return j;
}

std::string RunConfig::hash() const { return sha256_hex(dump_line(to_json())); }

std::string run_timestamp() {
  std::time_t t = 0;
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch != nullptr && *epoch != '\0') {
    t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
  } else {
    t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::array<char, 32> buf{};
  std::strftime(buf.data(), buf.size(), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf.data();
}

json RunManifest::body() const {
  json inputs_json = json::array();
  for (const auto& p : inputs) {
    inputs_json.push_back({{"name", std::filesystem::path(p).filename().string()},
                           {"sha256", sha256_file_hex(p)}});
  }
  json j{{"schema_version", kSchemaVersion},
         {"command", command},
         {"config", config},
         {"config_hash", config_hash},
         {"inputs", std::move(inputs_json)},
         {"template_version", std::string(template_version())},
         {"extra", extra}};
  j["seed"] = has_seed ? json(seed) : json(nullptr);
  return j;
}

std::string RunManifest::digest() const { return sha256_hex(dump_line(body())); }

json RunManifest::document() const {
  json j = body();
  j["digest"] = sha256_hex(dump_line(j));
  j["timestamp"] = run_timestamp();
  return j;
}

void RunManifest::write(const std::string& path) const { write_json(path, document()); }

}  // namespace pman
