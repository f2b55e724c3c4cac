#include "pman/generator.hpp"

#include "ordered_pool.hpp"
#include "pman/jsonl.hpp"
#include "pman/prompting.hpp"
#include "text_util.hpp"

namespace pman {

std::string clean_generated_question(std::string_view raw) {
  std::string_view q = detail::trim(raw);
  constexpr std::string_view kCue = "Question:";
  if (q.size() >= kCue.size() && detail::to_lower(q.substr(0, kCue.size())) == "question:") {
    q = detail::trim(q.substr(kCue.size()));
  }
  // Only the first line; models sometimes append an answer or a second try.
  if (const auto nl = q.find('\n'); nl != std::string_view::npos) q = detail::trim(q.substr(0, nl));
  if (q.size() >= 2) {
    const char open = q.front();
    const char close = q.back();
    if ((open == '"' && close == '"') || (open == '\'' && close == '\'') ||
        (open == '`' && close == '`')) {
      q = detail::trim(q.substr(1, q.size() - 2));
    } else if (q.size() >= 6 && q.substr(0, 3) == "“" && q.substr(q.size() - 3) == "”") {
      q = detail::trim(q.substr(3, q.size() - 6));
    }
  }
  return std::string(q);
}

GeneratedQuestion generate(std::string_view sample_id, std::string_view passage,
                           std::string_view answer, ChatClient& client, const std::string& model,
                           int max_tokens) {
  ChatRequest req;
  req.model = model;
  req.prompt = render_generation(passage, answer);
  req.temperature = 0.0;
  req.max_tokens = max_tokens;
  req.request_id = "generate:" + std::string(sample_id);
  req.attempt = 0;

  ChatResponse resp = client.complete(req);
  GeneratedQuestion out;
  out.sample_id = std::string(sample_id);
  out.model = model;
  out.question = clean_generated_question(resp.text);
  out.raw_response = std::move(resp.text);
  if (out.question.empty()) {
    throw GenerationError("sample '" + out.sample_id + "': model returned no question");
  }
  return out;
}

void generate_batch(std::span<const Sample> samples, ChatClient& client, const std::string& model,
                    unsigned workers,
                    const std::function<void(const Sample&, GenerationOutcome&&)>& sink) {
  detail::ordered_parallel_map<GenerationOutcome>(
      samples.size(), workers,
      [&](std::size_t i) -> GenerationOutcome {
        try {
          return generate(samples[i].id, samples[i].passage, samples[i].answer, client, model);
        } catch (const GenerationError& e) {
          return e;
        }
      },
      [&](std::size_t i, GenerationOutcome&& outcome) { sink(samples[i], std::move(outcome)); });
}

nlohmann::json to_json(const GeneratedQuestion& q, const Sample& source) {
  return nlohmann::json{{"schema_version", kSchemaVersion},
                        {"id", q.sample_id},
                        {"passage", source.passage},
                        {"answer", source.answer},
                        {"generated_question", q.question},
                        {"model", q.model},
                        {"raw_response", q.raw_response}};
}

}  // namespace pman
