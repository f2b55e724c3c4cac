#pragma once

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <variant>

#include <nlohmann/json.hpp>

#include "pman/corpus.hpp"
#include "pman/error.hpp"
#include "pman/llm_gateway.hpp"

namespace pman {

/// The model produced nothing usable for a sample.
class GenerationError : public DataError {
 public:
  using DataError::DataError;
};

struct GeneratedQuestion {
  std::string sample_id;
  std::string question;
  std::string model;
  std::string raw_response;
};

/// Strips an echoed leading "Question:" cue, keeps the first line, and removes
/// surrounding whitespace and one layer of matching quotes. May return an
/// empty string.
std::string clean_generated_question(std::string_view raw);

/// Prompts the backend at temperature 0.0 and keeps the first question.
/// Throws GenerationError when nothing remains after cleaning.
GeneratedQuestion generate(std::string_view sample_id, std::string_view passage,
                           std::string_view answer, ChatClient& client, const std::string& model,
                           int max_tokens = kDefaultMaxTokens);

/// Either a question or the reason this sample was flagged.
using GenerationOutcome = std::variant<GeneratedQuestion, GenerationError>;

/// Generates for every sample on `workers` threads; `sink` sees outcomes in
/// input order. Transport errors abort the batch.
void generate_batch(std::span<const Sample> samples, ChatClient& client, const std::string& model,
                    unsigned workers,
                    const std::function<void(const Sample&, GenerationOutcome&&)>& sink);

/// JSON Lines record readable by load_generated().
nlohmann::json to_json(const GeneratedQuestion& q, const Sample& source);

}  // namespace pman
