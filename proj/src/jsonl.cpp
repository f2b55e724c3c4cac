#include "pman/jsonl.hpp"

#include <iterator>
#include <sstream>

#include "pman/error.hpp"

namespace pman {

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

nlohmann::json parse_at(const std::string& text, const std::string& path, std::size_t base) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const std::size_t offset = base + (e.byte > 0 ? e.byte - 1 : 0);
    throw ParseError(path + ": malformed JSON at byte " + std::to_string(offset) + ": " + e.what(),
                     offset);
  }
}

}  // namespace

std::vector<nlohmann::json> read_jsonl(const std::string& path) {
  const std::string text = slurp(path);
  std::vector<nlohmann::json> out;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    const std::string line = text.substr(start, end - start);
    if (line.find_first_not_of(" \t\r") != std::string::npos) {
      out.push_back(parse_at(line, path, start));
    }
    start = end + 1;
  }
  return out;
}

nlohmann::json read_json(const std::string& path) { return parse_at(slurp(path), path, 0); }

std::string dump_line(const nlohmann::json& j) {
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path);
  out << j.dump(2, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
}

JsonlWriter::JsonlWriter(const std::string& path, bool append)
    : path_(path),
      out_(path, std::ios::binary | (append ? std::ios::app : std::ios::trunc)) {
  if (!out_) throw DataError("cannot write " + path);
}

void JsonlWriter::write(const nlohmann::json& j) {
  out_ << dump_line(j) << '\n';
  out_.flush();
  if (!out_) throw DataError("write failed: " + path_);
}

}  // namespace pman
