#include "pman/assessor.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "ordered_pool.hpp"
#include "pman/error.hpp"
#include "pman/jsonl.hpp"
#include "pman/prompting.hpp"
#include "text_util.hpp"

namespace pman {

using nlohmann::json;

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Yes: return "YES";
    case Verdict::No: return "NO";
    case Verdict::Invalid: return "INVALID";
  }
  return "INVALID";
}

Verdict parse_verdict_name(std::string_view s) {
  if (s == "YES") return Verdict::Yes;
  if (s == "NO") return Verdict::No;
  if (s == "INVALID") return Verdict::Invalid;
  throw DataError("unknown verdict '" + std::string(s) + "'");
}

// --- Verdict parsing --------------------------------------------------------

namespace {

bool is_word_char(char c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
}

}  // namespace

std::optional<VerdictMatch> parse_verdict(std::string_view response) {
  std::optional<VerdictMatch> strict;
  std::optional<VerdictMatch> loose;
  std::size_t i = 0;
  while (i < response.size()) {
    if (!is_word_char(response[i])) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    while (i < response.size() && is_word_char(response[i])) ++i;
    const std::string_view token = response.substr(start, i - start);
    if (token.size() > 3) continue;

    if (token == "YES" || token == "NO") {
      strict = VerdictMatch{token == "YES" ? Verdict::Yes : Verdict::No, 1, start};
    }
    const std::string lower = detail::to_lower(token);
    if (lower == "yes" || lower == "no") {
      loose = VerdictMatch{lower == "yes" ? Verdict::Yes : Verdict::No, 2, start};
    }
  }
  return strict ? strict : loose;
}

// --- Escalation schedule ----------------------------------------------------

EscalationSchedule::EscalationSchedule() : temps_{0.0, 0.25, 0.5, 0.75, 1.0} {}

EscalationSchedule::EscalationSchedule(std::vector<double> temperatures)
    : temps_(std::move(temperatures)) {
  if (temps_.empty()) throw ConfigError("escalation schedule is empty");
  if (temps_.front() != 0.0) throw ConfigError("escalation schedule must start at 0.0");
  for (std::size_t i = 0; i < temps_.size(); ++i) {
    if (!(temps_[i] >= 0.0 && temps_[i] <= 2.0)) {
      throw ConfigError("escalation temperature outside [0, 2]");
    }
    if (i > 0 && temps_[i] < temps_[i - 1]) {
      throw ConfigError("escalation schedule must be non-decreasing");
    }
  }
}

EscalationSchedule EscalationSchedule::parse(std::string_view text) {
  std::vector<double> temps;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t comma = text.find(',', pos);
    if (comma == std::string_view::npos) comma = text.size();
    const std::string item(detail::trim(text.substr(pos, comma - pos)));
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (item.empty() || used != item.size()) {
      throw ConfigError("malformed escalation schedule '" + std::string(text) + "'");
    }
    temps.push_back(v);
    pos = comma + 1;
  }
  return EscalationSchedule(std::move(temps));
}

std::string EscalationSchedule::to_string() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < temps_.size(); ++i) {
    if (i) os << ',';
    os << temps_[i];
  }
  return os.str();
}

// --- Records ----------------------------------------------------------------

json to_json(const AssessmentRecord& r) {
  json attempts = json::array();
  for (const auto& a : r.attempts) {
    json aj{{"temperature", a.temperature}, {"response", a.response}};
    if (a.parsed) {
      aj["parsed"] = to_string(a.parsed->value);
      aj["tier"] = a.parsed->tier;
      aj["position"] = a.parsed->position;
    } else {
      aj["parsed"] = nullptr;
      aj["tier"] = nullptr;
      aj["position"] = nullptr;
    }
    attempts.push_back(std::move(aj));
  }
  return json{{"schema_version", kSchemaVersion}, {"sample_id", r.sample_id}, {"model", r.model},
              {"cot", r.cot}, {"verdict", to_string(r.verdict)}, {"attempts", std::move(attempts)}};
}

AssessmentRecord record_from_json(const json& j) {
  try {
    AssessmentRecord r;
    r.sample_id = j.at("sample_id").get<std::string>();
    r.model = j.at("model").get<std::string>();
    r.cot = j.at("cot").get<bool>();
    r.verdict = parse_verdict_name(j.at("verdict").get<std::string>());
    for (const auto& aj : j.at("attempts")) {
      Attempt a;
      a.temperature = aj.at("temperature").get<double>();
      a.response = aj.at("response").get<std::string>();
      if (!aj.at("parsed").is_null()) {
        a.parsed = VerdictMatch{parse_verdict_name(aj.at("parsed").get<std::string>()),
                                aj.at("tier").get<int>(), aj.at("position").get<std::size_t>()};
      }
      r.attempts.push_back(std::move(a));
    }
    if (r.attempts.empty()) throw DataError("record '" + r.sample_id + "' has no attempts");
    return r;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed assessment record: ") + e.what());
  }
}

// --- Assessment -------------------------------------------------------------

AssessmentRecord assess(const Sample& sample, ChatClient& client, const AssessOptions& opts) {
  const std::string prompt = render_assessment(sample, opts.cot);
  AssessmentRecord rec;
  rec.sample_id = sample.id;
  rec.cot = opts.cot;
  rec.model = opts.model;

  const auto& temps = opts.schedule.temperatures();
  for (std::size_t i = 0; i < temps.size(); ++i) {
    ChatRequest req;
    req.model = opts.model;
    req.prompt = prompt;
    req.temperature = temps[i];
    req.max_tokens = opts.max_tokens;
    req.request_id = "assess:" + sample.id + "#" + std::to_string(i);
    req.attempt = static_cast<int>(i);

    ChatResponse resp;
    try {
      resp = client.complete(req);
    } catch (const TransportError& e) {
      throw TransportError("sample '" + sample.id + "': " + e.what());
    }
    Attempt attempt{temps[i], std::move(resp.text), std::nullopt};
    attempt.parsed = parse_verdict(attempt.response);
    const auto parsed = attempt.parsed;
    rec.attempts.push_back(std::move(attempt));
    if (parsed) {
      rec.verdict = parsed->value;
      return rec;
    }
  }
  rec.verdict = Verdict::Invalid;
  return rec;
}

void assess_batch(std::span<const Sample> samples, ChatClient& client, const AssessOptions& opts,
                  unsigned workers, const std::function<void(AssessmentRecord&&)>& sink) {
  detail::ordered_parallel_map<AssessmentRecord>(
      samples.size(), workers, [&](std::size_t i) { return assess(samples[i], client, opts); },
      [&](std::size_t, AssessmentRecord&& r) { sink(std::move(r)); });
}

// --- Aggregation ------------------------------------------------------------

PmanScore pman_score(std::span<const AssessmentRecord> records) {
  if (records.empty()) throw DataError("PMAN score needs at least one assessment record");
  PmanScore s;
  for (const auto& r : records) {
    switch (r.verdict) {
      case Verdict::Yes: ++s.yes_count; break;
      case Verdict::No: ++s.no_count; break;
      case Verdict::Invalid: ++s.invalid_count; break;
    }
  }
  const std::size_t valid = s.yes_count + s.no_count;
  if (valid > 0) s.score = static_cast<double>(s.yes_count) / static_cast<double>(valid);
  return s;
}

json to_json(const PmanScore& s) {
  json j{{"schema_version", kSchemaVersion},
         {"yes", s.yes_count},
         {"no", s.no_count},
         {"invalid", s.invalid_count},
         {"valid", s.yes_count + s.no_count},
         {"assessed", s.total()}};
  if (s.score) {
    j["score"] = *s.score;
    j["percent"] = *s.score * 100.0;
    j["outcome"] = "ok";
  } else {
    j["score"] = nullptr;
    j["percent"] = nullptr;
    j["outcome"] = "no_valid_assessments";
  }
  return j;
}

PmanScore pman_score_from_json(const json& j) {
  try {
    PmanScore s;
    s.yes_count = j.at("yes").get<std::size_t>();
    s.no_count = j.at("no").get<std::size_t>();
    s.invalid_count = j.at("invalid").get<std::size_t>();
    if (s.yes_count + s.no_count > 0) {
      s.score = static_cast<double>(s.yes_count) / static_cast<double>(s.yes_count + s.no_count);
    }
    return s;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed score document: ") + e.what());
  }
}

std::string format_percent(const PmanScore& s) {
  if (!s.score) return "no valid assessments";
  std::ostringstream os;
  const double pct = *s.score * 100.0;
  if (std::abs(pct - std::round(pct)) < 1e-9) {
    os << static_cast<long long>(std::llround(pct)) << '%';
  } else {
    os << std::fixed << std::setprecision(1) << pct << '%';
  }
  return os.str();
}

std::vector<RankedModel> rank_by_pman(std::vector<RankedModel> models) {
  std::stable_sort(models.begin(), models.end(), [](const RankedModel& a, const RankedModel& b) {
    if (a.score.score && b.score.score) return *a.score.score > *b.score.score;
    return a.score.score.has_value() && !b.score.score.has_value();
  });
  return models;
}

std::string render_pman_table(const std::vector<RankedModel>& ranked) {
  std::size_t width = 5;
  for (const auto& m : ranked) width = std::max(width, detail::display_width(m.name));
  std::ostringstream os;
  os << detail::pad_right("Model", width) << "  " << detail::pad_left("PMAN", 8) << "  "
     << detail::pad_left("YES", 5) << "  " << detail::pad_left("NO", 5) << "  "
     << detail::pad_left("invalid", 7) << '\n';
  for (const auto& m : ranked) {
    os << detail::pad_right(m.name, width) << "  "
       << detail::pad_left(m.score.score ? format_percent(m.score) : "—", 8) << "  "
       << detail::pad_left(std::to_string(m.score.yes_count), 5) << "  "
       << detail::pad_left(std::to_string(m.score.no_count), 5) << "  "
       << detail::pad_left(std::to_string(m.score.invalid_count), 7) << '\n';
  }
  if (std::any_of(ranked.begin(), ranked.end(), [](const RankedModel& m) { return !m.score.score; })) {
    os << "— no valid assessments\n";
  }
  return os.str();
}

}  // namespace pman
