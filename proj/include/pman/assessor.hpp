#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "pman/corpus.hpp"
#include "pman/llm_gateway.hpp"

namespace pman {

enum class Verdict { Yes, No, Invalid };

std::string to_string(Verdict v);
Verdict parse_verdict_name(std::string_view s);

/// A verdict token found in a judge response.
struct VerdictMatch {
  Verdict value = Verdict::Invalid;  // Yes or No
  int tier = 0;                      // 1 = exact uppercase, 2 = case-insensitive
  std::size_t position = 0;          // byte offset of the winning token

  friend bool operator==(const VerdictMatch&, const VerdictMatch&) = default;
};

/// Finds the judge's verdict. Tokens are maximal runs of [A-Za-z0-9_], so
/// "not", "nobody" and "yesterday" never match. Tier 1 looks for "YES"/"NO"
/// exactly; only if it finds nothing does tier 2 retry case-insensitively.
/// Within a tier the last occurrence wins, because CoT responses reason
/// first and conclude last.
std::optional<VerdictMatch> parse_verdict(std::string_view response);

/// Ordered decoding temperatures tried until a valid verdict appears.
class EscalationSchedule {
 public:
  EscalationSchedule();  // 0.0, 0.25, 0.5, 0.75, 1.0
  explicit EscalationSchedule(std::vector<double> temperatures);

  /// Parses "0,0.25,0.5". Throws ConfigError on malformed input.
  static EscalationSchedule parse(std::string_view text);

  const std::vector<double>& temperatures() const noexcept { return temps_; }
  std::string to_string() const;

 private:
  std::vector<double> temps_;
};

struct Attempt {
  double temperature = 0.0;
  std::string response;
  std::optional<VerdictMatch> parsed;
};

struct AssessmentRecord {
  std::string sample_id;
  std::vector<Attempt> attempts;
  Verdict verdict = Verdict::Invalid;
  bool cot = true;
  std::string model;
};

nlohmann::json to_json(const AssessmentRecord& r);
AssessmentRecord record_from_json(const nlohmann::json& j);

struct AssessOptions {
  std::string model = "gpt-4-0613";
  bool cot = true;
  EscalationSchedule schedule;
  int max_tokens = kDefaultMaxTokens;
};

/// Runs the escalation loop for one sample. Transport failures propagate as
/// TransportError naming the sample; they never become an Invalid verdict.
AssessmentRecord assess(const Sample& sample, ChatClient& client, const AssessOptions& opts);

/// Assesses `samples` on `workers` threads and hands records to `sink` in
/// input order from the calling thread. On the first error no new samples
/// are started, records already completed ahead of the failure are still
/// delivered in order, and the error is rethrown.
void assess_batch(std::span<const Sample> samples, ChatClient& client, const AssessOptions& opts,
                  unsigned workers, const std::function<void(AssessmentRecord&&)>& sink);

struct PmanScore {
  std::size_t yes_count = 0;
  std::size_t no_count = 0;
  std::size_t invalid_count = 0;
  /// yes / (yes + no); empty when every record is Invalid.
  std::optional<double> score;

  std::size_t total() const noexcept { return yes_count + no_count + invalid_count; }
};

/// Throws DataError on an empty record list.
PmanScore pman_score(std::span<const AssessmentRecord> records);

nlohmann::json to_json(const PmanScore& s);
PmanScore pman_score_from_json(const nlohmann::json& j);

/// "97%" style rendering, or "no valid assessments".
std::string format_percent(const PmanScore& s);

struct RankedModel {
  std::string name;
  PmanScore score;
};

/// Sorts by PMAN score, best first. Equal scores keep their input order;
/// undefined scores go last.
std::vector<RankedModel> rank_by_pman(std::vector<RankedModel> models);

/// Plain-text leaderboard, one row per model.
std::string render_pman_table(const std::vector<RankedModel>& ranked);

}  // namespace pman
