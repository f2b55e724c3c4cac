#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pman {

enum class QuestionType { YesNo, Other };
enum class Label { Answerable, NonAnswerable };

/// Where a sample's question came from.
struct Origin {
  enum class Kind { Gold, Forged, ModelGenerated };
  Kind kind = Kind::Gold;
  std::string model;  // set only for ModelGenerated

  static Origin gold() { return {Kind::Gold, {}}; }
  static Origin forged() { return {Kind::Forged, {}}; }
  static Origin generated(std::string model) { return {Kind::ModelGenerated, std::move(model)}; }

  friend bool operator==(const Origin&, const Origin&) = default;
};

/// One (passage, question, answer) triple under evaluation.
struct Sample {
  std::string id;
  std::string passage;
  std::string question;
  std::string answer;
  QuestionType qtype = QuestionType::Other;
  std::optional<Label> label;
  Origin origin;

  friend bool operator==(const Sample&, const Sample&) = default;
};

struct Corpus {
  std::vector<Sample> samples;
  std::string source;
  std::uint64_t seed = 0;

  std::size_t size() const noexcept { return samples.size(); }
};

/// YesNo iff the trimmed, lowercased answer is exactly "yes" or "no".
QuestionType classify_answer(std::string_view answer);

/// Builds a sample and enforces its invariants (non-empty fields after
/// trimming, qtype derived from the answer). Throws DataError naming `id`.
Sample make_sample(std::string id, std::string passage, std::string question, std::string answer,
                   std::optional<Label> label, Origin origin);

/// Throws DataError on the first duplicate id.
void check_unique_ids(const Corpus& corpus);

/// Loads the public HotpotQA JSON array. Passage is every context sentence in
/// file order joined with single spaces; titles are dropped.
Corpus load_hotpotqa(const std::string& path);
Corpus parse_hotpotqa(const nlohmann::json& records, std::string source);

/// Order-preserving filter on question type.
Corpus stratify(const Corpus& corpus, QuestionType qtype);

/// `n` distinct samples chosen uniformly without replacement, in draw order.
/// Identical output for identical (corpus, n, seed).
Corpus sample_random(const Corpus& corpus, std::size_t n, std::uint64_t seed);

/// `n` non-answerable samples: each keeps a randomly chosen base passage and
/// takes the question/answer of a different same-qtype donor whose
/// (question, answer) differs from the base's.
Corpus forge_negatives(const Corpus& corpus, std::size_t n, std::uint64_t seed);

/// Loads externally generated questions (JSON Lines records with id,
/// passage, answer, generated_question, optional human_label).
Corpus load_generated(const std::string& path, const std::string& model);
Corpus parse_generated(const std::vector<nlohmann::json>& records, const std::string& model,
                       std::string source);

/// Labeled test-set JSON Lines (the format cmd_forge writes and cmd_assess
/// reads). `manifest` is the digest of the run that produced the file.
nlohmann::json sample_to_json(const Sample& s);
Sample sample_from_json(const nlohmann::json& j, std::size_t index);
Corpus load_samples(const std::string& path);

std::string to_string(QuestionType t);
std::string to_string(Label l);
std::string to_string(const Origin& o);
QuestionType parse_question_type(std::string_view s);
Label parse_label(std::string_view s);

}  // namespace pman
