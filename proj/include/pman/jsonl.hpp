#pragma once

#include <nlohmann/json.hpp>

#include <fstream>
#include <string>
#include <vector>

namespace pman {

/// Version stamped into every JSON / JSON Lines artifact the toolkit writes.
inline constexpr int kSchemaVersion = 1;

/// Reads a JSON Lines file. Blank lines are skipped. A malformed line throws
/// ParseError whose byte offset is relative to the start of the file.
std::vector<nlohmann::json> read_jsonl(const std::string& path);

/// Reads a whole JSON document; ParseError carries the byte offset.
nlohmann::json read_json(const std::string& path);

/// Canonical single-line serialization used for every artifact line. Keys are
/// sorted (nlohmann::json objects are std::map-backed), so output is stable.
std::string dump_line(const nlohmann::json& j);

/// Writes `j` pretty-printed with a trailing newline.
void write_json(const std::string& path, const nlohmann::json& j);

/// Append-or-truncate JSON Lines writer. Flushes after every line so a crash
/// leaves a valid prefix behind.
class JsonlWriter {
 public:
  JsonlWriter(const std::string& path, bool append);

  void write(const nlohmann::json& j);

 private:
  std::string path_;
  std::ofstream out_;
};

}  // namespace pman
